// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
//
// Campaign orchestrator and toolbox: feasibility sweeps, full boot-attack
// campaigns with key extraction, synthetic device generation, payload
// tooling, the single-fault oracle, and campaign log reports.
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "glitchlab/boot.hpp"
#include "glitchlab/config.hpp"
#include "glitchlab/crypto.hpp"
#include "glitchlab/fixtures.hpp"
#include "glitchlab/gen.hpp"
#include "glitchlab/machine.hpp"
#include "glitchlab/oracle.hpp"
#include "glitchlab/payload.hpp"
#include "glitchlab/rail.hpp"
#include "glitchlab/rig.hpp"
#include "glitchlab/search.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace glitchlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitBudget = 2;

std::string read_text(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string fmt_duration(double seconds) {
  char buf[64];
  if (seconds < 120.0) {
    std::snprintf(buf, sizeof buf, "%.2f s", seconds);
  } else if (seconds < 7200.0) {
    std::snprintf(buf, sizeof buf, "%.2f min", seconds / 60.0);
  } else if (seconds < 2.0 * 86400.0) {
    std::snprintf(buf, sizeof buf, "%.2f h", seconds / 3600.0);
  } else {
    std::snprintf(buf, sizeof buf, "%.2f days", seconds / 86400.0);
  }
  return buf;
}

search::AttemptClass classify_boot(boot::BootResult r) {
  switch (r) {
    case boot::BootResult::UART_PROMPT: return search::AttemptClass::SUCCESS;
    case boot::BootResult::NORMAL_BOOT: return search::AttemptClass::NORMAL;
    case boot::BootResult::CRASHED: return search::AttemptClass::CRASH;
    case boot::BootResult::DETECT_SHUTDOWN: return search::AttemptClass::DETECTED;
    case boot::BootResult::HANG: return search::AttemptClass::HANG;
  }
  return search::AttemptClass::HANG;
}

json stats_json(const search::CampaignStats &s) {
  return json{{"attempts", s.attempts},
              {"successes", s.successes},
              {"crashes", s.crashes},
              {"normals", s.normals},
              {"detects", s.detects},
              {"hangs", s.hangs},
              {"success_rate", s.success_rate},
              {"total_sim_time_ns", s.total_sim_time_ns},
              {"time_to_first_success_ns", s.time_to_first_success_ns},
              {"attempts_per_simulated_second", s.attempts_per_simulated_second},
              {"narrowed", s.narrowed},
              {"pre_narrow_attempts", s.pre_narrow_attempts},
              {"pre_narrow_successes", s.pre_narrow_successes},
              {"post_narrow_attempts", s.post_narrow_attempts},
              {"post_narrow_successes", s.post_narrow_successes},
              {"grid_exhausted", s.grid_exhausted}};
}

// Written in worker-then-index order so multi-worker logs merge the same
// way every run; with one worker this is plain index order.
void write_attempts(const std::string &path,
                    std::vector<search::AttemptRecord> records, bool append) {
  std::stable_sort(records.begin(), records.end(),
                   [](const search::AttemptRecord &a,
                      const search::AttemptRecord &b) {
                     if (a.worker != b.worker) return a.worker < b.worker;
                     return a.index < b.index;
                   });
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw std::invalid_argument("cannot write log: " + path);
  for (const search::AttemptRecord &r : records) {
    out << search::attempt_jsonl_line(r) << "\n";
  }
}

void describe_stats(std::ostream &os, const search::CampaignStats &s) {
  os << "attempts: " << s.attempts << " (successes " << s.successes
     << ", crashes " << s.crashes << ", normals " << s.normals << ", hangs "
     << s.hangs << ", detects " << s.detects << ")\n";
  char rate[32];
  std::snprintf(rate, sizeof rate, "%.4f%%", s.success_rate * 100.0);
  os << "success rate: " << rate << "\n";
  os << "simulated time: " << fmt_duration(double(s.total_sim_time_ns) * 1e-9)
     << "; attempts per simulated second: ";
  char aps[32];
  std::snprintf(aps, sizeof aps, "%.1f", s.attempts_per_simulated_second);
  os << aps << "\n";
  if (s.time_to_first_success_ns >= 0) {
    os << "time to first success: "
       << fmt_duration(double(s.time_to_first_success_ns) * 1e-9) << "\n";
  } else {
    os << "time to first success: none\n";
  }
  if (s.narrowed) {
    os << "narrowing: active (pre: " << s.pre_narrow_successes << "/"
       << s.pre_narrow_attempts << " successes/attempts, post: "
       << s.post_narrow_successes << "/" << s.post_narrow_attempts << ")\n";
  } else {
    os << "narrowing: not reached\n";
  }
  if (s.grid_exhausted) os << "grid: exhausted\n";
}

config::CampaignConfig load_effective_config(const std::string &config_path) {
  return config_path.empty() ? config::default_config()
                             : config::load_config(config_path);
}

gen::Device device_from_config(const config::CampaignConfig &cfg) {
  return cfg.image.bundle_dir.empty()
             ? gen::generate_device(cfg.image.generate)
             : gen::load_device_bundle(cfg.image.bundle_dir);
}

// ---------------------------------------------------------------- attack --

int cmd_attack(const config::CampaignConfig &cfg, const std::string &out_dir,
               const std::string &resume_path) {
  config::validate(cfg);
  fs::create_directories(out_dir);
  auto in_out = [&out_dir](const char *name) {
    return (fs::path(out_dir) / name).string();
  };

  gen::Device dev = device_from_config(cfg);
  boot::BootRunner runner(dev.image, dev.mcfg);

  search::CampaignParams cp;
  cp.grid = cfg.grid;
  cp.strategy = cfg.strategy;
  cp.rig = cfg.rig;
  cp.cost = cfg.cost;
  cp.budget = cfg.budget;
  cp.seed = cfg.seed;
  cp.workers = cfg.workers;
  cp.retain_log = true;

  const rail::RailConfig rail_cfg = cfg.rail;
  search::AttemptRunner attempt = [&runner, &rail_cfg](
                                      const rail::GlitchPulse &pulse,
                                      uint64_t seed) {
    boot::BootOutcome out = runner.run(pulse, rail_cfg, seed);
    search::AttemptOutcome ao;
    ao.cls = classify_boot(out.result);
    ao.label = boot::to_string(out.result);
    ao.end_time_ns = out.end_time_ns;
    return ao;
  };

  std::string resume_blob;
  if (!resume_path.empty()) resume_blob = read_text(resume_path);

  search::CampaignHooks hooks;
  hooks.checkpoint_every = 4096;
  hooks.on_checkpoint = [&in_out](const std::string &s) {
    gen::write_text(in_out("checkpoint.json"), s + "\n");
  };

  search::CampaignResult res =
      search::run_campaign(cp, attempt, &hooks, resume_blob);

  write_attempts(in_out("attempts.jsonl"), res.attempts, !resume_blob.empty());
  gen::write_text(in_out("stats.json"), stats_json(res.stats).dump(2) + "\n");

  std::ostringstream rep;
  rep << "boot-attack campaign\n";
  rep << "seed: " << cfg.seed << "  workers: " << cfg.workers
      << "  strategy: " << search::to_string(cfg.strategy.kind) << "\n";
  rep << "grid: offsets [" << cfg.grid.offset_lo_ns << ", "
      << cfg.grid.offset_hi_ns << "] step " << cfg.grid.offset_step_ns
      << " ns, lengths {";
  for (size_t i = 0; i < cfg.grid.lengths_ns.size(); ++i) {
    rep << (i ? ", " : "") << cfg.grid.lengths_ns[i];
  }
  rep << "} ns\n";
  describe_stats(rep, res.stats);
  if (res.stats.narrowed) {
    rep << "narrowed grid: offsets [" << res.final_grid.offset_lo_ns << ", "
        << res.final_grid.offset_hi_ns << "], " << res.final_grid.lengths_ns.size()
        << " length(s)\n";
  }

  if (!res.first_success) {
    rep << "result: budget exhausted without reaching the download prompt\n";
    gen::write_text(in_out("report.txt"), rep.str());
    std::cout << rep.str();
    return kExitBudget;
  }

  const search::AttemptRecord win = *res.first_success;
  rep << "first success: attempt " << win.index << " offset " << win.offset_ns
      << " ns length " << win.length_ns << " ns\n";

  // Reproduce the winning run and park the machine at the prompt.
  sim::Machine parked(dev.mcfg);
  const rail::GlitchPulse delivered{win.delivered_offset_ns, win.length_ns};
  boot::BootOutcome again = runner.run(delivered, rail_cfg, win.seed, &parked);
  if (again.result != boot::BootResult::UART_PROMPT) {
    rep << "result: internal error: winning attempt did not replay\n";
    gen::write_text(in_out("report.txt"), rep.str());
    std::cout << rep.str();
    return kExitConfig;
  }

  // Payload 1: the full boot ROM, protected region included.
  const uint32_t irom_size = uint32_t(dev.image.irom_bytes.size());
  payload::UartPayload dump_irom =
      payload::build_dump_payload(sim::kIromBase, irom_size, sim::kMmioUartThr);
  sim::Machine m1 = parked;
  boot::UploadReport r1 = runner.upload(m1, payload::encode(dump_irom));
  gen::write_file(in_out("irom_dump.bin"), r1.uart);
  const bool irom_match = r1.uart == dev.image.irom_bytes;
  rep << "irom dump: " << r1.uart.size() << " bytes captured, "
      << (irom_match ? "MATCH" : "MISMATCH") << " against the device image\n";

  // Payload 2: both FEK banks, readable until the engine latches them.
  payload::UartPayload dump_feks =
      payload::build_dump_payload(sim::kMmioFek1, 32, sim::kMmioUartThr);
  sim::Machine m2 = parked;
  boot::UploadReport r2 = runner.upload(m2, payload::encode(dump_feks));
  gen::write_file(in_out("feks.bin"), r2.uart);
  bool fek_ok = r2.uart.size() == 32;
  crypto::Key128 cap_fek1{}, cap_fek2{};
  if (fek_ok) {
    std::copy(r2.uart.begin(), r2.uart.begin() + 16, cap_fek1.begin());
    std::copy(r2.uart.begin() + 16, r2.uart.end(), cap_fek2.begin());
    fek_ok = cap_fek1 == dev.feks.fek1 && cap_fek2 == dev.feks.effective_fek2();
  }
  rep << "fek capture: " << r2.uart.size() << " bytes, "
      << (fek_ok ? "MATCH" : "MISMATCH") << "\n";
  if (fek_ok) {
    rep << "  fek1:           " << gen::to_hex(cap_fek1) << "\n";
    rep << "  effective fek2: " << gen::to_hex(cap_fek2) << "\n";
  }

  // Decrypt the second stage using only captured material.
  bool mb1_match = false;
  if (irom_match && fek_ok && r1.uart.size() >= crypto::kKeyBlobSize) {
    crypto::Bytes blob(r1.uart.end() - crypto::kKeyBlobSize, r1.uart.end());
    crypto::CryptoEngine eng;
    crypto::FekSource src;
    src.fek1 = cap_fek1;
    src.fek2_select = crypto::Fek2Select::TESTKEY;  // captured value is effective
    src.fek2 = cap_fek2;
    eng.load_feks(src);
    crypto::EngineStatus bs = eng.decrypt_key_blob(blob);
    rep << "key blob: " << crypto::to_string(bs) << ", "
        << eng.populated_count() << " slots populated\n";
    if (bs == crypto::EngineStatus::OK) {
      crypto::Mb1Result mb1 =
          crypto::decrypt_mb1(eng, dev.mb1_encrypted, dev.odm_enabled);
      rep << "mb1 decrypt: " << crypto::to_string(mb1.status) << "\n";
      if (mb1.status == crypto::EngineStatus::OK) {
        gen::write_file(in_out("mb1_decrypted.bin"), mb1.plain);
        mb1_match = mb1.plain == dev.mb1_plain;
        rep << "mb1 plaintext: " << mb1.plain.size() << " bytes, "
            << (mb1_match ? "MATCH" : "MISMATCH")
            << " against the generator original\n";
      }
    }
  }

  const bool all_ok = irom_match && fek_ok && mb1_match;
  rep << "result: " << (all_ok ? "full extraction verified" : "extraction FAILED")
      << "\n";
  gen::write_text(in_out("report.txt"), rep.str());
  std::cout << rep.str();
  return all_ok ? kExitOk : kExitConfig;
}

// ----------------------------------------------------------- feasibility --

int cmd_feasibility(const config::CampaignConfig &cfg,
                    const std::string &out_dir) {
  cfg.rail.validate();
  cfg.rig.validate();
  const fixtures::Fixture fx = fixtures::build_fixture(fixtures::FixtureName::ADD_LOOP);
  const int64_t tick = int64_t(cfg.rig.tick_ns);
  const int64_t offset = 50'000;  // deep inside the add loop
  const int64_t max_len = int64_t(cfg.rig.max_length_ticks) * tick;
  int64_t hi = cfg.rail.crash_min_ns + cfg.rail.decoupling_attenuation_ns + 2'000;
  hi = std::min(hi, max_len);
  constexpr int kSeedsPerLength = 25;

  int64_t min_corrupt = -1, min_crash = -1;
  uint64_t sims = 0;
  for (int64_t len = tick; len <= hi; len += tick) {
    const rail::GlitchPulse pulse{offset, len};
    const rail::RailOutcome ro = rail::resolve_rail(pulse, cfg.rail, 0);
    if (ro.kind == rail::RailRegime::NONE) continue;  // fully absorbed
    if (ro.kind == rail::RailRegime::CRASH ||
        ro.kind == rail::RailRegime::DETECTED) {
      if (min_crash < 0) min_crash = len;
      if (min_corrupt >= 0 && min_crash >= 0) break;
      continue;
    }
    if (min_corrupt >= 0) continue;
    for (int k = 0; k < kSeedsPerLength; ++k) {
      const uint64_t seed = derive_seed(cfg.seed, uint64_t(len) * 100 + uint64_t(k));
      fixtures::FixtureResult fr = fixtures::run_fixture(fx, pulse, cfg.rail, seed);
      ++sims;
      if (fr.corruption) {
        min_corrupt = len;
        break;
      }
    }
  }

  std::ostringstream rep;
  rep << "pulse length feasibility sweep (add-loop fixture)\n";
  rep << "pulse offset: " << offset << " ns; lengths " << tick << ".." << hi
      << " ns step " << tick << "; up to " << kSeedsPerLength
      << " seeds per length; " << sims << " runs\n";
  rep << "rail: attenuation " << cfg.rail.decoupling_attenuation_ns
      << " ns, fault threshold " << cfg.rail.fault_min_ns
      << " ns, crash threshold " << cfg.rail.crash_min_ns << " ns\n";
  if (min_corrupt >= 0) {
    rep << "minimal corrupting length: " << min_corrupt << " ns\n";
  } else {
    rep << "minimal corrupting length: none observed\n";
  }
  if (min_crash >= 0) {
    rep << "minimal crashing length: " << min_crash << " ns\n";
  } else {
    rep << "minimal crashing length: none observed\n";
  }
  std::cout << rep.str();
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    gen::write_text((fs::path(out_dir) / "feasibility.txt").string(), rep.str());
  }
  return kExitOk;
}

// -------------------------------------------------------------- generate --

int cmd_generate(const config::CampaignConfig &cfg, const std::string &out_dir) {
  if (out_dir.empty()) throw std::invalid_argument("generate needs --out-dir");
  config::validate(cfg);
  gen::Device dev = gen::generate_device(cfg.image.generate);
  gen::write_device_bundle(dev, out_dir);
  std::cout << "device bundle written to " << out_dir << "\n";
  std::cout << "  irom: " << dev.image.irom_bytes.size() << " bytes, prompt \""
            << dev.image.prompt << "\"\n";
  std::cout << "  fuse-check instant: " << dev.image.timeline.fuse_check_time_ns
            << " ns; boot done: " << dev.image.boot_done_time_ns << " ns\n";
  std::cout << "  mb1: " << dev.mb1_encrypted.size() << " bytes encrypted, "
            << dev.mb1_plain.size() << " bytes plain\n";
  return kExitOk;
}

// ---------------------------------------------------------------- report --

int cmd_report(const std::string &log_path, const config::CampaignConfig &cfg) {
  std::ifstream in(log_path);
  if (!in) throw std::invalid_argument("cannot open log: " + log_path);

  uint64_t attempts = 0, successes = 0, crashes = 0, normals = 0, hangs = 0,
           detects = 0;
  uint64_t total_sim = 0;
  int64_t first_success_time = -1;
  std::vector<int64_t> success_offsets;
  int64_t lo = INT64_MAX, hi = INT64_MIN;

  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error &) {
      throw std::invalid_argument("corrupt log line " + std::to_string(lineno));
    }
    ++attempts;
    const std::string outcome = j.at("outcome").get<std::string>();
    const int64_t off = j.at("offset_ns").get<int64_t>();
    total_sim += j.at("sim_time").get<uint64_t>();
    lo = std::min(lo, off);
    hi = std::max(hi, off);
    if (outcome == "UART_PROMPT") {
      ++successes;
      success_offsets.push_back(off);
      if (first_success_time < 0) first_success_time = int64_t(total_sim);
    } else if (outcome == "CRASHED") {
      ++crashes;
    } else if (outcome == "NORMAL_BOOT") {
      ++normals;
    } else if (outcome == "DETECT_SHUTDOWN") {
      ++detects;
    } else {
      ++hangs;
    }
  }

  std::ostringstream rep;
  rep << "campaign log: " << log_path << "\n";
  search::CampaignStats s;
  s.attempts = attempts;
  s.successes = successes;
  s.crashes = crashes;
  s.normals = normals;
  s.hangs = hangs;
  s.detects = detects;
  s.total_sim_time_ns = total_sim;
  s.time_to_first_success_ns = first_success_time;
  s.success_rate = attempts ? double(successes) / double(attempts) : 0.0;
  s.attempts_per_simulated_second =
      total_sim ? double(attempts) / (double(total_sim) * 1e-9) : 0.0;
  describe_stats(rep, s);

  if (!success_offsets.empty()) {
    rep << "success offsets: " << success_offsets.size() << " in [" << lo
        << ", " << hi << "] ns\n";
    constexpr int kBuckets = 24;
    const int64_t blo = *std::min_element(success_offsets.begin(), success_offsets.end());
    const int64_t bhi = *std::max_element(success_offsets.begin(), success_offsets.end());
    const int64_t span = std::max<int64_t>(bhi - blo, 1);
    std::vector<int> hist(kBuckets, 0);
    for (int64_t off : success_offsets) {
      int b = int((off - blo) * (kBuckets - 1) / span);
      hist[size_t(b)] += 1;
    }
    const int peak = *std::max_element(hist.begin(), hist.end());
    for (int b = 0; b < kBuckets; ++b) {
      const int64_t left = blo + span * b / kBuckets;
      char head[40];
      std::snprintf(head, sizeof head, "%10" PRId64 " ns |", left);
      rep << head;
      const int bar = peak ? hist[size_t(b)] * 40 / peak : 0;
      for (int i = 0; i < bar; ++i) rep << '#';
      rep << " " << hist[size_t(b)] << "\n";
    }
  }

  const uint64_t window =
      uint64_t(cfg.grid.offset_hi_ns - cfg.grid.offset_lo_ns);
  const search::Estimate one =
      search::estimate_full_pass(window, uint64_t(cfg.grid.offset_step_ns), 1);
  const search::Estimate all = search::estimate_full_pass(
      window, uint64_t(cfg.grid.offset_step_ns), cfg.grid.lengths_ns.size());
  rep << "estimate (grid window " << window << " ns, step "
      << cfg.grid.offset_step_ns << " ns):\n";
  rep << "  single pass, one length: " << one.num_offsets << " offsets ≈ "
      << fmt_duration(one.total_seconds()) << "\n";
  rep << "  single pass, " << cfg.grid.lengths_ns.size()
      << " length(s): ≈ " << fmt_duration(all.total_seconds()) << "\n";
  rep << "  actual simulated time: " << fmt_duration(double(total_sim) * 1e-9)
      << "\n";
  std::cout << rep.str();
  return kExitOk;
}

// ---------------------------------------------------------------- oracle --

int cmd_oracle(const std::string &fixture_name, uint32_t samples,
               std::string target) {
  const fixtures::Fixture fx =
      fixtures::build_fixture(fixtures::fixture_from_name(fixture_name), samples);
  if (target.empty()) target = fx.target_label;
  if (target.empty()) {
    throw std::invalid_argument("fixture has no target label; pass --target");
  }
  const oracle::Program prog = oracle::from_fixture(fx);
  const std::vector<oracle::TraceEntry> trace = oracle::clean_trace(prog);
  const std::vector<oracle::FaultElement> set =
      oracle::fault_path_oracle(prog, target);

  std::map<uint32_t, std::string> names;
  for (const auto &[name, addr] : fx.labels) names[addr] = name;

  std::cout << "fixture " << fx.name << " (" << samples
            << " samples per fuse), target " << target << "\n";
  std::cout << "clean trace: " << trace.size() << " instructions\n";
  std::cout << "single-fault openings: " << set.size() << "\n";
  for (const oracle::FaultElement &e : set) {
    char pc[16];
    std::snprintf(pc, sizeof pc, "0x%08x", e.pc);
    std::cout << "  trace_index=" << e.trace_index << " pc=" << pc;
    auto it = names.find(e.pc);
    if (it != names.end()) std::cout << " (" << it->second << ")";
    std::cout << " " << sim::to_string(e.effect) << "\n";
  }
  return kExitOk;
}

// --------------------------------------------------------------- payload --

int cmd_payload_encode(uint32_t entry, const std::string &code_path,
                       const std::string &out_path) {
  payload::UartHeader h;
  h.entry_addr = entry;
  const std::vector<uint8_t> code = gen::read_file(code_path);
  h.code_length = uint32_t(code.size());
  gen::write_file(out_path, payload::encode(h, code));
  std::cout << "encoded " << code.size() << " code bytes to " << out_path << "\n";
  return kExitOk;
}

int cmd_payload_decode(const std::string &in_path) {
  const std::vector<uint8_t> wire = gen::read_file(in_path);
  const payload::DecodeResult res = payload::decode(wire);
  if (res.error != payload::DecodeError::OK) {
    std::cout << "decode error: " << payload::to_string(res.error) << "\n";
    return kExitConfig;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "0x%08x", res.payload.header.entry_addr);
  std::cout << "entry_addr:  " << buf << "\n";
  std::cout << "code_length: " << res.payload.header.code_length << "\n";
  std::snprintf(buf, sizeof buf, "0x%08x 0x%08x 0x%08x 0x%08x",
                res.payload.header.id[0], res.payload.header.id[1],
                res.payload.header.id[2], res.payload.header.id[3]);
  std::cout << "id:          " << buf << "\n";
  std::snprintf(buf, sizeof buf, "0x%08x", res.payload.checksum);
  std::cout << "checksum:    " << buf << " (valid)\n";
  return kExitOk;
}

int cmd_payload_build_dump(uint32_t start, uint32_t count, uint32_t uart,
                           uint32_t entry, const std::string &out_path) {
  const payload::UartPayload p =
      payload::build_dump_payload(start, count, uart, entry);
  gen::write_file(out_path, payload::encode(p));
  std::cout << "dump payload for [" << start << ", " << (start + count)
            << ") written to " << out_path << " (" << p.code.size()
            << " code bytes)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"simulated voltage-glitch boot attack workbench"};
  app.require_subcommand(1);

  std::string config_path, out_dir, resume_path;
  uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;

  auto add_common = [&](CLI::App *c, bool with_resume) {
    c->add_option("--config", config_path, "campaign config file (JSON)");
    c->add_option("--seed", seed, "override the campaign seed")
        ->each([&seed_set](const std::string &) { seed_set = true; });
    c->add_option("--workers", workers, "override the worker count");
    c->add_option("--out-dir", out_dir, "artifact output directory");
    if (with_resume) {
      c->add_option("--resume", resume_path, "checkpoint file to resume from");
    }
  };

  CLI::App *c_feas = app.add_subcommand("feasibility",
                                        "pulse length sweep on the add-loop fixture");
  add_common(c_feas, false);

  CLI::App *c_attack = app.add_subcommand("attack",
                                          "full glitch campaign with key extraction");
  add_common(c_attack, true);

  CLI::App *c_gen = app.add_subcommand("generate", "write a synthetic device bundle");
  add_common(c_gen, false);

  std::string log_path;
  CLI::App *c_report = app.add_subcommand("report", "summarize a campaign log");
  c_report->add_option("--log", log_path, "attempts JSONL file")->required();
  c_report->add_option("--config", config_path, "config for the estimate comparison");

  std::string fixture_name = "FUSECHECK_POC", oracle_target;
  uint32_t oracle_samples = 8;
  CLI::App *c_oracle = app.add_subcommand("oracle",
                                          "exhaustive single-fault path search");
  c_oracle->add_option("--fixture", fixture_name,
                       "ADD_LOOP | SIGCHECK | FUSECHECK_POC | FUSECHECK_HARDENED");
  c_oracle->add_option("--samples", oracle_samples, "fuse samples per read");
  c_oracle->add_option("--target", oracle_target, "target label override");

  CLI::App *c_payload = app.add_subcommand("payload", "payload codec tools");
  c_payload->require_subcommand(1);
  uint32_t p_entry = payload::kDefaultEntry;
  uint32_t p_start = sim::kIromBase, p_count = 0x1200;
  uint32_t p_uart = sim::kMmioUartThr;
  std::string p_code, p_in, p_out = "payload.bin";
  CLI::App *c_enc = c_payload->add_subcommand("encode", "wrap code bytes");
  c_enc->add_option("--entry", p_entry, "entry/load address");
  c_enc->add_option("--code", p_code, "raw code file")->required();
  c_enc->add_option("--out", p_out, "output wire file");
  CLI::App *c_dec = c_payload->add_subcommand("decode", "parse and verify");
  c_dec->add_option("--in", p_in, "wire file")->required();
  CLI::App *c_bld = c_payload->add_subcommand("build-dump",
                                              "canonical memory-dump payload");
  c_bld->add_option("--start", p_start, "first address");
  c_bld->add_option("--count", p_count, "byte count");
  c_bld->add_option("--uart", p_uart, "UART data register address");
  c_bld->add_option("--entry", p_entry, "entry/load address");
  c_bld->add_option("--out", p_out, "output wire file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(c_feas) || app.got_subcommand(c_attack) ||
        app.got_subcommand(c_gen)) {
      config::CampaignConfig cfg = load_effective_config(config_path);
      if (seed_set) cfg.seed = seed;
      if (workers > 0) cfg.workers = workers;
      if (app.got_subcommand(c_feas)) return cmd_feasibility(cfg, out_dir);
      if (app.got_subcommand(c_gen)) return cmd_generate(cfg, out_dir);
      return cmd_attack(cfg, out_dir.empty() ? "out" : out_dir, resume_path);
    }
    if (app.got_subcommand(c_report)) {
      config::CampaignConfig cfg = load_effective_config(config_path);
      return cmd_report(log_path, cfg);
    }
    if (app.got_subcommand(c_oracle)) {
      return cmd_oracle(fixture_name, oracle_samples, oracle_target);
    }
    if (app.got_subcommand(c_payload)) {
      if (c_payload->got_subcommand(c_enc)) {
        return cmd_payload_encode(p_entry, p_code, p_out);
      }
      if (c_payload->got_subcommand(c_dec)) return cmd_payload_decode(p_in);
      return cmd_payload_build_dump(p_start, p_count, p_uart, p_entry, p_out);
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
