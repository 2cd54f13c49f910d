// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace glitchlab::crypto {

using Key128 = std::array<uint8_t, 16>;
using Bytes = std::vector<uint8_t>;

// AES-128 block primitives. Self-contained so the key engine model has no
// external dependencies; the test suite cross-checks against OpenSSL.
struct Aes128 {
  explicit Aes128(const Key128 &key);
  void encrypt_block(const uint8_t in[16], uint8_t out[16]) const;
  void decrypt_block(const uint8_t in[16], uint8_t out[16]) const;

 private:
  std::array<uint32_t, 44> rk_;  // round keys, big-endian words
};

// CBC without padding: data length must be a multiple of 16.
Bytes cbc_encrypt(const Key128 &key, const Key128 &iv, const Bytes &plain);
Bytes cbc_decrypt(const Key128 &key, const Key128 &iv, const Bytes &cipher);
// Classic CBC-MAC with zero IV; the signature stand-in for image layers.
Key128 cbc_mac(const Key128 &key, const Bytes &data);

constexpr Key128 kZeroIv{};

// FEK material as it leaves the fuse/register block. The select bit picks
// the second key's source: NVKEY reuses fek1's source, TESTKEY uses fek2.
enum class Fek2Select : uint8_t { NVKEY = 0, TESTKEY = 1 };

struct FekSource {
  Key128 fek1{};
  Fek2Select fek2_select = Fek2Select::NVKEY;
  Key128 fek2{};  // TESTKEY bank value

  Key128 effective_fek2() const {
    return fek2_select == Fek2Select::TESTKEY ? fek2 : fek1;
  }
};

struct KeySlot {
  bool populated = false;
  std::string label;
  Key128 key{};
};

enum class EngineStatus {
  OK,
  ALREADY_LOADED,
  FEKS_NOT_LOADED,
  BAD_BLOB_LENGTH,
  BAD_SLOT_INDEX,
  SLOT_EMPTY,
  AUTH_FAILED,
  BAD_IMAGE,
};

const char *to_string(EngineStatus s);

// Fixed slot assignments used by the key blob layout.
constexpr int kSlotFek1 = 0;
constexpr int kSlotFek2 = 1;
constexpr int kSlotMb1 = 4;
constexpr int kNumSlots = 16;

// Key blob layout (topmost 4 KiB of the boot ROM): a sequence of 32-byte
// entries, each a 16-byte descriptor block followed by one encrypted key
// block. Descriptor: bytes 0..11 ASCII label (zero padded), byte 12 the
// designated slot index, bytes 13..15 zero. An all-zero descriptor ends
// the list. Each key block is decrypted independently with the 128-bit
// block cipher in CBC mode, IV all zeros, key FEK1.
struct BlobEntry {
  std::string label;
  int slot = 0;
  Key128 key{};  // plaintext key (builder side)
};

constexpr size_t kKeyBlobSize = 4096;

Bytes build_key_blob(const Key128 &fek1, const std::vector<BlobEntry> &entries,
                     size_t blob_size = kKeyBlobSize);

// Model of the device's 16-slot hardware key engine.
class CryptoEngine {
 public:
  // Copies both FEK values into their slots and raises the readout
  // protection bit. Valid once per boot.
  EngineStatus load_feks(const FekSource &source);

  // Walks the blob entries; requires FEK1 loaded first.
  EngineStatus decrypt_key_blob(const Bytes &blob);

  bool feks_loaded() const { return feks_loaded_; }
  bool fek_readout_protect() const { return readout_protect_; }
  const FekSource &fek_source() const { return source_; }

  const KeySlot &slot(int i) const;
  void clear_slot(int i);
  int populated_count() const;

 private:
  std::array<KeySlot, kNumSlots> slots_{};
  FekSource source_{};
  bool feks_loaded_ = false;
  bool readout_protect_ = false;
};

// One authenticated-encryption layer: CBC ciphertext followed by a CBC-MAC
// tag block, both under the same key.
Bytes wrap_layer(const Key128 &key, const Bytes &plain);
std::optional<Bytes> unwrap_layer(const Key128 &key, const Bytes &wrapped);

// Builds the encrypted bootloader image: always the vendor layer (MB1 slot
// key); with odm_enabled the owner layer (FEK2) is applied outermost.
Bytes build_mb1_image(const Key128 &mb1_key, const Key128 &fek2,
                      bool odm_enabled, const Bytes &plain);

struct Mb1Result {
  EngineStatus status = EngineStatus::OK;
  Bytes plain;
};

// Peels the owner layer first when enabled, then the vendor layer. On
// success the MB1 key slot is wiped; every other slot stays intact.
Mb1Result decrypt_mb1(CryptoEngine &engine, const Bytes &mb1_image,
                      bool odm_enabled);

}  // namespace glitchlab::crypto
