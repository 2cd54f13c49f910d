// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#include "glitchlab/gen.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "glitchlab/rng.hpp"

namespace glitchlab::gen {

using nlohmann::json;

std::string to_hex(const uint8_t *data, size_t n) {
  static const char *digits = "0123456789abcdef";
  std::string out;
  out.reserve(2 * n);
  for (size_t i = 0; i < n; ++i) {
    out.push_back(digits[data[i] >> 4]);
    out.push_back(digits[data[i] & 0xf]);
  }
  return out;
}

std::string to_hex(const std::vector<uint8_t> &data) {
  return to_hex(data.data(), data.size());
}

std::string to_hex(const crypto::Key128 &key) {
  return to_hex(key.data(), key.size());
}

std::vector<uint8_t> from_hex(const std::string &hex) {
  auto nib = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2) throw std::invalid_argument("odd hex string length");
  std::vector<uint8_t> out(hex.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) {
    int hi = nib(hex[2 * i]), lo = nib(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("bad hex digit");
    out[i] = uint8_t(hi << 4 | lo);
  }
  return out;
}

std::vector<uint8_t> read_file(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(f),
                              std::istreambuf_iterator<char>());
}

void write_file(const std::string &path, const std::vector<uint8_t> &bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.write(reinterpret_cast<const char *>(bytes.data()),
          std::streamsize(bytes.size()));
}

void write_text(const std::string &path, const std::string &text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

namespace {

crypto::Key128 draw_key(Rng &rng) {
  crypto::Key128 k{};
  for (size_t i = 0; i < k.size(); i += 8) {
    uint64_t w = rng.next();
    for (size_t j = 0; j < 8; ++j) k[i + j] = uint8_t(w >> (8 * j));
  }
  return k;
}

std::vector<uint8_t> draw_bytes(Rng &rng, size_t n) {
  std::vector<uint8_t> out(n);
  for (size_t i = 0; i < n; i += 8) {
    uint64_t w = rng.next();
    for (size_t j = 0; j < 8 && i + j < n; ++j) {
      out[i + j] = uint8_t(w >> (8 * j));
    }
  }
  return out;
}

}  // namespace

Device generate_device(const DeviceParams &p) {
  if (p.mb1_plain_bytes == 0 || p.mb1_plain_bytes % 16 != 0) {
    throw std::invalid_argument("second-stage plaintext length must be a "
                                "positive multiple of 16");
  }
  Device d;
  d.seed = p.seed;
  d.odm_enabled = p.odm_enabled;

  // Independent streams so a parameter tweak never shifts unrelated draws.
  Rng key_rng(derive_seed(p.seed, 0x1001));
  Rng blob_rng(derive_seed(p.seed, 0x1002));
  Rng plain_rng(derive_seed(p.seed, 0x1003));

  d.feks.fek1 = draw_key(key_rng);
  d.feks.fek2 = draw_key(key_rng);
  d.feks.fek2_select = p.fek2_select;

  d.blob_entries = {
      {"KEK0", 2, draw_key(blob_rng)},
      {"KEK1", 3, draw_key(blob_rng)},
      {"MB1KEY", crypto::kSlotMb1, draw_key(blob_rng)},
      {"SSK", 5, draw_key(blob_rng)},
  };
  d.mb1_key = d.blob_entries[2].key;

  boot::BootImageParams bp = p.boot;
  bp.key_blob = crypto::build_key_blob(d.feks.fek1, d.blob_entries);

  d.mcfg = sim::MachineConfig{};
  d.mcfg.fuses = p.fuses;
  d.mcfg.fuses.fek2_select =
      p.fek2_select == crypto::Fek2Select::TESTKEY ? 1 : 0;
  d.mcfg.feks = d.feks;

  d.image = boot::build_boot_image(bp, d.mcfg);

  d.mb1_plain = draw_bytes(plain_rng, p.mb1_plain_bytes);
  d.mb1_encrypted = crypto::build_mb1_image(
      d.mb1_key, d.feks.effective_fek2(), p.odm_enabled, d.mb1_plain);
  return d;
}

static json timeline_to_json(const boot::Timeline &t) {
  return json{{"fuse_check_time_ns", t.fuse_check_time_ns},
              {"qspi_probe_time_ns", t.qspi_probe_time_ns},
              {"mb2_entry_time_ns", t.mb2_entry_time_ns}};
}

void save_image(const boot::BootImage &img, const std::string &rom_path,
                const std::string &manifest_path) {
  write_file(rom_path, img.irom_bytes);
  json loops = json::array();
  for (const sim::LoopInfo &l : img.loops) {
    loops.push_back(json{{"head_addr", l.head_addr},
                         {"branch_addr", l.branch_addr},
                         {"counter", l.counter},
                         {"exit_addr", l.exit_addr}});
  }
  json m{
      {"format", "glitchlab-device-manifest/1"},
      {"irom_base", sim::kIromBase},
      {"irom_size", img.irom_bytes.size()},
      {"timeline", timeline_to_json(img.timeline)},
      {"prompt", img.prompt},
      {"pirom", json{{"reset_from", img.reset_pirom_from},
                     {"reset_to", img.reset_pirom_to},
                     {"lockdown", img.lockdown_pirom_start}}},
      {"boot_done_time_ns", img.boot_done_time_ns},
      {"labels", img.labels},
      {"loops", loops},
  };
  write_text(manifest_path, m.dump(2) + "\n");
}

boot::BootImage load_image(const std::string &rom_path,
                           const std::string &manifest_path) {
  std::ifstream f(manifest_path);
  if (!f) throw std::runtime_error("cannot open " + manifest_path);
  json m = json::parse(f);
  if (m.value("format", "") != "glitchlab-device-manifest/1") {
    throw std::runtime_error("unrecognized manifest format");
  }
  boot::BootImage img;
  img.irom_bytes = read_file(rom_path);
  if (m.at("irom_base").get<uint32_t>() != sim::kIromBase) {
    throw std::runtime_error("manifest base address mismatch");
  }
  if (m.at("irom_size").get<size_t>() != img.irom_bytes.size()) {
    throw std::runtime_error("ROM size disagrees with manifest");
  }
  const json &t = m.at("timeline");
  img.timeline.fuse_check_time_ns = t.at("fuse_check_time_ns").get<uint64_t>();
  img.timeline.qspi_probe_time_ns = t.at("qspi_probe_time_ns").get<uint64_t>();
  img.timeline.mb2_entry_time_ns = t.at("mb2_entry_time_ns").get<uint64_t>();
  img.prompt = m.at("prompt").get<std::string>();
  const json &pi = m.at("pirom");
  img.reset_pirom_from = pi.at("reset_from").get<uint32_t>();
  img.reset_pirom_to = pi.at("reset_to").get<uint32_t>();
  img.lockdown_pirom_start = pi.at("lockdown").get<uint32_t>();
  img.boot_done_time_ns = m.at("boot_done_time_ns").get<uint64_t>();
  for (auto &[k, v] : m.at("labels").items()) {
    img.labels[k] = v.get<uint32_t>();
  }
  for (const json &l : m.at("loops")) {
    sim::LoopInfo li;
    li.head_addr = l.at("head_addr").get<uint32_t>();
    li.branch_addr = l.at("branch_addr").get<uint32_t>();
    li.counter = l.at("counter").get<int>();
    li.exit_addr = l.at("exit_addr").get<uint32_t>();
    img.loops.push_back(li);
  }
  return img;
}

void write_device_bundle(const Device &d, const std::string &dir) {
  std::filesystem::create_directories(dir);
  auto in_dir = [&dir](const char *name) {
    return (std::filesystem::path(dir) / name).string();
  };
  save_image(d.image, in_dir("irom.bin"), in_dir("manifest.json"));
  write_file(in_dir("mb1.enc"), d.mb1_encrypted);
  write_file(in_dir("mb1_plain.bin"), d.mb1_plain);

  json blob = json::array();
  for (const crypto::BlobEntry &e : d.blob_entries) {
    blob.push_back(json{{"label", e.label},
                        {"slot", e.slot},
                        {"key", to_hex(e.key)}});
  }
  json s{
      {"seed", d.seed},
      {"fek1", to_hex(d.feks.fek1)},
      {"fek2_bank", to_hex(d.feks.fek2)},
      {"fek2_select",
       d.feks.fek2_select == crypto::Fek2Select::TESTKEY ? "TESTKEY"
                                                         : "NVKEY"},
      {"effective_fek2", to_hex(d.feks.effective_fek2())},
      {"mb1_key", to_hex(d.mb1_key)},
      {"odm_enabled", d.odm_enabled},
      {"fuses",
       json{{"failure_analysis_mode", d.mcfg.fuses.failure_analysis_mode},
            {"preproduction_mode", d.mcfg.fuses.preproduction_mode},
            {"production_mode", d.mcfg.fuses.production_mode},
            {"fek2_select", d.mcfg.fuses.fek2_select}}},
      {"blob_entries", blob},
  };
  write_text(in_dir("secrets.json"), s.dump(2) + "\n");
}

Device load_device_bundle(const std::string &dir) {
  auto in_dir = [&dir](const char *name) {
    return (std::filesystem::path(dir) / name).string();
  };
  Device d;
  d.image = load_image(in_dir("irom.bin"), in_dir("manifest.json"));
  d.mb1_encrypted = read_file(in_dir("mb1.enc"));
  d.mb1_plain = read_file(in_dir("mb1_plain.bin"));

  const std::vector<uint8_t> raw = read_file(in_dir("secrets.json"));
  const json s = json::parse(std::string(raw.begin(), raw.end()));
  auto key_from_hex = [](const std::string &hex) {
    const std::vector<uint8_t> bytes = from_hex(hex);
    crypto::Key128 k{};
    if (bytes.size() != k.size()) {
      throw std::invalid_argument("key field has wrong length");
    }
    std::copy(bytes.begin(), bytes.end(), k.begin());
    return k;
  };
  d.seed = s.at("seed").get<uint64_t>();
  d.feks.fek1 = key_from_hex(s.at("fek1").get<std::string>());
  d.feks.fek2 = key_from_hex(s.at("fek2_bank").get<std::string>());
  d.feks.fek2_select = s.at("fek2_select").get<std::string>() == "TESTKEY"
                           ? crypto::Fek2Select::TESTKEY
                           : crypto::Fek2Select::NVKEY;
  d.mb1_key = key_from_hex(s.at("mb1_key").get<std::string>());
  d.odm_enabled = s.at("odm_enabled").get<bool>();
  const json &f = s.at("fuses");
  d.mcfg.fuses.failure_analysis_mode =
      f.at("failure_analysis_mode").get<uint32_t>();
  d.mcfg.fuses.preproduction_mode = f.at("preproduction_mode").get<uint32_t>();
  d.mcfg.fuses.production_mode = f.at("production_mode").get<uint32_t>();
  d.mcfg.fuses.fek2_select = f.at("fek2_select").get<uint32_t>();
  d.mcfg.feks = d.feks;
  d.mcfg.reset_pirom_start = d.image.reset_pirom_from;
  for (const json &e : s.at("blob_entries")) {
    crypto::BlobEntry be;
    be.label = e.at("label").get<std::string>();
    be.slot = e.at("slot").get<uint32_t>();
    be.key = key_from_hex(e.at("key").get<std::string>());
    d.blob_entries.push_back(be);
  }
  return d;
}

}  // namespace glitchlab::gen
