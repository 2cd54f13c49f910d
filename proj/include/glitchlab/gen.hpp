// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glitchlab/boot.hpp"
#include "glitchlab/crypto.hpp"
#include "glitchlab/machine.hpp"

namespace glitchlab::gen {

// Everything that defines one synthetic device. All key material and the
// second-stage plaintext are drawn from the seed, so one (seed, params)
// pair regenerates the identical device bit for bit.
struct DeviceParams {
  uint64_t seed = 1;
  boot::BootImageParams boot{};  // key_blob is filled in by the generator
  sim::FuseBank fuses{};         // production part: FAM/PPM unblown
  crypto::Fek2Select fek2_select = crypto::Fek2Select::TESTKEY;
  bool odm_enabled = true;
  uint32_t mb1_plain_bytes = 2048;  // multiple of 16
};

struct Device {
  uint64_t seed = 0;
  boot::BootImage image;        // ROM with the encrypted key blob on top
  sim::MachineConfig mcfg;      // fuses and FEK banks wired in
  crypto::FekSource feks;
  std::vector<crypto::BlobEntry> blob_entries;
  crypto::Key128 mb1_key{};     // the blob's vendor-image key (MB1 slot)
  std::vector<uint8_t> mb1_plain;
  std::vector<uint8_t> mb1_encrypted;
  bool odm_enabled = true;
};

// Builds the ROM, the key blob, and the two-layer second stage.
// Throws std::invalid_argument on an infeasible parameter set.
Device generate_device(const DeviceParams &p);

// Image persistence: a flat ROM dump plus a JSON manifest carrying the
// base addresses, label map, registered loops and timeline constants.
void save_image(const boot::BootImage &img, const std::string &rom_path,
                const std::string &manifest_path);
boot::BootImage load_image(const std::string &rom_path,
                           const std::string &manifest_path);

// Writes the full bundle into dir: irom.bin, manifest.json, mb1.enc,
// mb1_plain.bin, secrets.json. Creates dir if needed.
void write_device_bundle(const Device &d, const std::string &dir);

// Reconstructs a full simulated device from a bundle directory, including
// the ground-truth secrets used to wire up the machine's fuse and key
// banks (and to verify recovered material against).
Device load_device_bundle(const std::string &dir);

// Helpers shared by the CLI and the tests.
std::string to_hex(const uint8_t *data, size_t n);
std::string to_hex(const std::vector<uint8_t> &data);
std::string to_hex(const crypto::Key128 &key);
std::vector<uint8_t> from_hex(const std::string &hex);

std::vector<uint8_t> read_file(const std::string &path);
void write_file(const std::string &path, const std::vector<uint8_t> &bytes);
void write_text(const std::string &path, const std::string &text);

}  // namespace glitchlab::gen
