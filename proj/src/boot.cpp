// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#include "glitchlab/boot.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include "glitchlab/crypto.hpp"
#include "glitchlab/rng.hpp"

namespace glitchlab::boot {

using sim::FaultEvent;
using sim::Instr;
using sim::LoopInfo;
using sim::Machine;
using sim::MachineConfig;
using sim::MachState;
using sim::PendingFault;

const char *to_string(BootResult r) {
  switch (r) {
    case BootResult::NORMAL_BOOT: return "NORMAL_BOOT";
    case BootResult::CRASHED: return "CRASHED";
    case BootResult::DETECT_SHUTDOWN: return "DETECT_SHUTDOWN";
    case BootResult::UART_PROMPT: return "UART_PROMPT";
    case BootResult::HANG: return "HANG";
  }
  return "?";
}

void Timeline::validate() const {
  if (!(fuse_check_time_ns < qspi_probe_time_ns &&
        qspi_probe_time_ns < mb2_entry_time_ns)) {
    throw std::invalid_argument(
        "timeline must order fuse check < QSPI probe < MB2 entry");
  }
}

uint32_t BootImage::addr(const std::string &label) const {
  auto it = labels.find(label);
  if (it == labels.end()) {
    throw std::invalid_argument("unknown boot image label: " + label);
  }
  return it->second;
}

void emit_zero_barrier(sim::Asm &a) {
  a.bytes(std::vector<uint8_t>(4 * sim::kInstrBytes, 0));
}

void emit_fuse_sampler(sim::Asm &a, uint32_t fuse_mmio_addr,
                       uint32_t samples) {
  using namespace sim;
  a.mov(R0, 0);
  a.mov(R2, samples);
  int lp = a.bind_new();
  a.ldr_abs(R1, fuse_mmio_addr);
  a.add(R0, R0, R1);
  a.add(R2, R2, -1);
  a.cbnz(R2, lp);
  a.ret();
}

void emit_fuse_check_gate(sim::Asm &a, int fuse_lbl, int isfam_lbl,
                          int isppm_lbl, int download_lbl) {
  using namespace sim;
  a.bind(fuse_lbl);
  a.name(fuse_lbl, "fuse_check");
  int fam_or_ppm = a.label(), not_fam = a.label(), fc_exit = a.label();
  a.push((1u << FP) | (1u << LR));
  a.bl(isfam_lbl);
  int cbz_fam = a.bind_new();
  a.name(cbz_fam, "fc_cbz_fam");
  a.cbz(R0, not_fam);
  a.bind(fam_or_ppm);
  a.name(fam_or_ppm, "is_fam_or_ppm");
  a.bl(isppm_lbl);
  int cbnz_ppm = a.bind_new();
  a.name(cbnz_ppm, "fc_cbnz_ppm");
  a.cbnz(R0, fc_exit);
  int bl_dl = a.bind_new();
  a.name(bl_dl, "fc_bl_download");
  a.bl(download_lbl);
  a.bind(not_fam);
  a.name(not_fam, "is_not_fam");
  a.bl(isppm_lbl);
  int cmp_ppm = a.bind_new();
  a.name(cmp_ppm, "fc_cmp_ppm");
  a.cmp(R0, 0);
  int bne_back = a.bind_new();
  a.name(bne_back, "fc_bne_loopback");
  a.bne(fam_or_ppm);
  a.bind(fc_exit);
  a.name(fc_exit, "fuse_check_exit");
  a.pop((1u << FP) | (1u << PC));
}

void emit_fuse_check_gate_hardened(sim::Asm &a, int fuse_lbl, int isfam_lbl,
                                   int isppm_lbl, int download_lbl) {
  using namespace sim;
  int trap = a.label();
  int fam_zero = a.label(), ppm_zero = a.label();
  int dl_path = a.label(), dl_ppm = a.label(), hc_exit = a.label();
  a.bind(fuse_lbl);
  a.name(fuse_lbl, "fuse_check");
  a.push((1u << FP) | (1u << LR));
  a.bl(isfam_lbl);
  a.mov(R4, R0);
  a.bl(isfam_lbl);
  a.mov(R5, R0);
  a.bl(isppm_lbl);
  a.mov(R6, R0);
  a.bl(isppm_lbl);
  a.mov(R7, R0);
  // agreement checks: any single corrupted register trips one of these
  a.cmp(R4, R5);
  a.bne(trap);
  a.cmp(R6, R7);
  a.bne(trap);
  // opposite-polarity double checks on each pair
  a.cbz(R4, fam_zero);
  a.cbz(R5, trap);
  a.b(dl_path);
  a.bind(fam_zero);
  a.cbnz(R5, trap);
  a.cbz(R6, ppm_zero);
  a.cbz(R7, trap);
  a.b(dl_path);
  a.bind(ppm_zero);
  a.cbnz(R7, trap);
  a.b(hc_exit);
  a.bind(dl_path);
  a.name(dl_path, "hc_download_path");
  // the claiming pair must read blown in both copies, re-verified here
  a.cbz(R4, dl_ppm);
  a.cbz(R5, trap);
  a.bl(download_lbl);
  a.b(hc_exit);
  a.bind(dl_ppm);
  a.cbz(R6, trap);
  a.cbz(R7, trap);
  a.bl(download_lbl);
  a.b(hc_exit);
  a.bind(hc_exit);
  a.name(hc_exit, "hc_exit");
  a.pop((1u << FP) | (1u << PC));
  emit_zero_barrier(a);
  a.bind(trap);
  a.name(trap, "hc_trap");
  emit_zero_barrier(a);  // decision trap: illegal on arrival
}

namespace {

// Analytic advance of a registered delay loop. Only applies when the pc
// sits on a loop head (the ADD); whole iterations are consumed, capped so
// that no advanced instruction could overlap a still-pending fault window.
// Architecturally identical to stepping and touches no RNG.
bool ff_loops(Machine &m, const std::vector<LoopInfo> &loops,
              const PendingFault &pf) {
  uint32_t pc = m.regs[sim::PC];
  const LoopInfo *L = nullptr;
  for (const LoopInfo &l : loops) {
    if (l.head_addr == pc) { L = &l; break; }
  }
  if (!L) return false;
  uint64_t dur = m.instr_duration_ns();
  uint32_t v32 = m.regs[L->counter];
  // A corrupted counter of zero still runs: the decrement wraps first.
  uint64_t remaining = v32 == 0 ? (1ull << 32) : v32;
  uint64_t iters = remaining;
  if (!pf.consumed && int64_t(m.clock_ns) <= pf.window_end_ns) {
    if (int64_t(m.clock_ns) + int64_t(dur) > pf.window_start_ns) {
      return false;  // already overlapping: must step and draw
    }
    uint64_t budget = uint64_t(pf.window_start_ns) - m.clock_ns;
    iters = std::min(iters, budget / (2 * dur));
  }
  if (iters == 0) return false;
  m.regs[L->counter] = uint32_t(v32 - uint32_t(iters));
  m.clock_ns += iters * 2 * dur;
  m.instr_count += iters * 2;
  if (iters == remaining) m.regs[sim::PC] = L->exit_addr;
  return true;
}

struct Emitted {
  std::vector<uint8_t> bytes;
  std::map<std::string, uint32_t> labels;
  std::vector<LoopInfo> loops;
};

Emitted emit_program(const BootImageParams &p, uint32_t i1, uint32_t pad1,
                     uint32_t i2, uint32_t pad2) {
  using namespace sim;
  Asm a(kIromBase);
  auto barrier = [&a] { emit_zero_barrier(a); };

  int reset = a.label(), fuse = a.label(), dl = a.label();
  int isfam = a.label(), isppm = a.label();

  a.b(reset);  // reset vector

  a.bind(reset);
  a.name(reset, "reset_handler");
  a.mov(R0, p.reset_pirom_to);
  a.str_abs(R0, kMmioPiromStart);  // 0x400 -> 0x2000 while secure_boot = 1
  a.delay_iters(R0, i1);           // calibrated: fuse check instant
  for (uint32_t k = 0; k < pad1; ++k) a.nop();
  a.bl(fuse);
  a.delay_iters(R0, i2);           // calibrated: QSPI probe instant
  for (uint32_t k = 0; k < pad2; ++k) a.nop();
  int qspi = a.bind_new();
  a.name(qspi, "qspi_probe");
  a.mov(R1, 1);
  a.out_gpio(R1);                  // first QSPI clock stands in as a GPIO edge
  a.mov(R1, kCryptoCmdLoadFeks);
  a.str_abs(R1, kMmioCryptoCmd);
  a.mov(R1, kCryptoCmdDecryptBlob);
  a.str_abs(R1, kMmioCryptoCmd);
  // lockdown before hand-off: protected window re-armed, secure world left
  a.mov(R1, p.lockdown_pirom_start);
  a.str_abs(R1, kMmioPiromStart);
  a.mov(R1, 0);
  a.str_abs(R1, kMmioAccessPirom);
  a.str_abs(R1, kMmioSecureBoot);
  a.mov(R1, 1);
  a.str_abs(R1, kMmioModeDrop);
  int done = a.bind_new();
  a.name(done, "boot_done");
  a.halt();
  barrier();

  int prompt_lbl = a.bind_new();
  a.name(prompt_lbl, "prompt_data");
  std::vector<uint8_t> pd(p.prompt.begin(), p.prompt.end());
  pd.push_back(0);
  a.bytes(pd);
  a.align();
  barrier();

  // The gate in front of the hidden bootloader. Normal path: both fuse
  // reads accumulate to zero and the routine returns without ever touching
  // the download entry.
  if (p.hardened_fuse_check) {
    emit_fuse_check_gate_hardened(a, fuse, isfam, isppm, dl);
  } else {
    emit_fuse_check_gate(a, fuse, isfam, isppm, dl);
  }
  barrier();

  a.bind(isfam);
  a.name(isfam, "is_fam");
  emit_fuse_sampler(a, kMmioFuseFam, p.fuse_samples);
  barrier();

  a.bind(isppm);
  a.name(isppm, "is_ppm");
  emit_fuse_sampler(a, kMmioFusePpm, p.fuse_samples);
  barrier();

  a.bind(dl);
  a.name(dl, "download_entry");
  a.mov(R0, a.addr_of(prompt_lbl));
  int lp = a.bind_new();
  int wait = a.label();
  a.ldrb(R1, R0);
  a.cbz(R1, wait);
  a.out_uart(R1);
  a.add(R0, R0, 1);
  a.b(lp);
  a.bind(wait);
  a.name(wait, "download_wait");
  a.b(wait);

  Emitted e;
  e.bytes = a.assemble();
  for (const auto &[n, l] : a.names()) e.labels[n] = a.addr_of(l);
  e.loops = a.loops();
  return e;
}

std::vector<uint8_t> assemble_rom(const std::vector<uint8_t> &code,
                                  const BootImageParams &p) {
  if (p.irom_size < crypto::kKeyBlobSize ||
      code.size() > p.irom_size - crypto::kKeyBlobSize) {
    throw std::invalid_argument("boot code does not fit under the key blob");
  }
  if (!p.key_blob.empty() && p.key_blob.size() != crypto::kKeyBlobSize) {
    throw std::invalid_argument("key blob must be exactly 4 KiB");
  }
  std::vector<uint8_t> rom(p.irom_size, 0);
  std::copy(code.begin(), code.end(), rom.begin());
  if (!p.key_blob.empty()) {
    std::copy(p.key_blob.begin(), p.key_blob.end(),
              rom.end() - crypto::kKeyBlobSize);
  }
  return rom;
}

struct CleanTimes {
  uint64_t fuse = 0, qspi = 0, done = 0;
  bool fuse_seen = false, qspi_seen = false;
};

CleanTimes measure(const Emitted &e, const BootImageParams &p,
                   const MachineConfig &cfg) {
  Machine m(cfg);
  m.load_irom(assemble_rom(e.bytes, p));
  m.release_reset(sim::kIromBase);
  uint32_t fuse_addr = e.labels.at("fuse_check");
  uint32_t qspi_addr = e.labels.at("qspi_probe");
  PendingFault none;
  none.consumed = true;
  CleanTimes t;
  while (m.state == MachState::RUNNING) {
    uint32_t pc = m.regs[sim::PC];
    if (!t.fuse_seen && pc == fuse_addr) {
      t.fuse = m.clock_ns;
      t.fuse_seen = true;
    }
    if (!t.qspi_seen && pc == qspi_addr) {
      t.qspi = m.clock_ns;
      t.qspi_seen = true;
    }
    if (ff_loops(m, e.loops, none)) continue;
    m.step(nullptr, nullptr);
    if (m.trapped || m.instr_count > 50'000'000) {
      throw std::logic_error("boot program failed to run to completion");
    }
  }
  if (!t.fuse_seen || !t.qspi_seen || m.state != MachState::HALTED) {
    throw std::logic_error("boot program missed a timeline anchor");
  }
  t.done = m.clock_ns;
  return t;
}

}  // namespace

BootImage build_boot_image(const BootImageParams &p,
                           const MachineConfig &mcfg) {
  p.timeline.validate();
  if (p.fuse_samples == 0) {
    throw std::invalid_argument("fuse_samples must be positive");
  }
  const uint64_t quantum = uint64_t(mcfg.tick_ns) * mcfg.ticks_per_instr;
  if (p.timeline.fuse_check_time_ns % quantum ||
      p.timeline.qspi_probe_time_ns % quantum) {
    throw std::invalid_argument(
        "timeline instants must be instruction-aligned");
  }

  uint32_t i1 = 1000, pad1 = 0, i2 = 1000, pad2 = 0;
  Emitted e = emit_program(p, i1, pad1, i2, pad2);
  CleanTimes t = measure(e, p, mcfg);

  if (p.timeline.fuse_check_time_ns < t.fuse) {
    throw std::invalid_argument("fuse-check instant precedes the reset code");
  }
  uint64_t d1 = p.timeline.fuse_check_time_ns - t.fuse;
  i1 += uint32_t(d1 / (2 * quantum));
  pad1 += uint32_t(d1 % (2 * quantum) / quantum);
  e = emit_program(p, i1, pad1, i2, pad2);
  t = measure(e, p, mcfg);
  if (t.fuse != p.timeline.fuse_check_time_ns) {
    throw std::logic_error("fuse-check calibration did not converge");
  }

  if (p.timeline.qspi_probe_time_ns < t.qspi) {
    throw std::invalid_argument("QSPI instant precedes the fuse check");
  }
  uint64_t d2 = p.timeline.qspi_probe_time_ns - t.qspi;
  i2 += uint32_t(d2 / (2 * quantum));
  pad2 += uint32_t(d2 % (2 * quantum) / quantum);
  e = emit_program(p, i1, pad1, i2, pad2);
  t = measure(e, p, mcfg);
  if (t.fuse != p.timeline.fuse_check_time_ns ||
      t.qspi != p.timeline.qspi_probe_time_ns) {
    throw std::logic_error("timeline calibration did not converge");
  }

  BootImage img;
  img.irom_bytes = assemble_rom(e.bytes, p);
  img.timeline = p.timeline;
  img.reset_pirom_from = p.reset_pirom_from;
  img.reset_pirom_to = p.reset_pirom_to;
  img.lockdown_pirom_start = p.lockdown_pirom_start;
  img.prompt = p.prompt;
  img.labels = e.labels;
  img.loops = e.loops;
  img.boot_done_time_ns = t.done;
  return img;
}

// ------------------------------------------------------------ BootRunner --

BootRunner::BootRunner(BootImage image, MachineConfig cfg)
    : img_(std::move(image)), cfg_(cfg) {
  download_entry_ = img_.addr("download_entry");
  download_wait_ = img_.addr("download_wait");
  (void)img_.addr("fuse_check");

  Machine m(cfg_);
  m.load_irom(img_.irom_bytes);
  m.release_reset(sim::kIromBase);
  PendingFault none;
  none.consumed = true;
  const uint64_t stride_ns = 20'000;
  uint64_t next_snap = 0;
  while (m.state == MachState::RUNNING) {
    if (m.clock_ns >= next_snap) {
      snaps_.push_back(m);
      while (next_snap <= m.clock_ns) next_snap += stride_ns;
    }
    if (ff_loops(m, img_.loops, none)) continue;
    m.step(nullptr, nullptr);
    if (m.trapped || m.instr_count > 50'000'000) {
      throw std::logic_error("boot image does not boot cleanly");
    }
  }
  if (m.state != MachState::HALTED) {
    throw std::logic_error("clean boot did not reach the hand-off halt");
  }
  clean_done_time_ = m.clock_ns;
  deadline_ns_ = clean_done_time_ + 500'000;
}

const Machine &BootRunner::snapshot_before(uint64_t time_ns) const {
  size_t lo = 0;
  for (size_t i = 1; i < snaps_.size(); ++i) {
    if (snaps_[i].clock_ns <= time_ns) lo = i;
    else break;
  }
  return snaps_[lo];
}

bool BootRunner::try_fast_forward(Machine &m, const PendingFault &pf) const {
  return fast_forward_ && ff_loops(m, img_.loops, pf);
}

BootOutcome BootRunner::simulate(const rail::RailOutcome &out, uint64_t seed,
                                 Machine *captured) const {
  BootOutcome bo;
  uint64_t ws = out.window_start_ns > 0 ? uint64_t(out.window_start_ns) : 0;
  Machine m = snapshot_before(ws);
  PendingFault pf{out.window_start_ns, out.window_end_ns,
                  out.fault_probability, false};
  Rng rng(seed);
  for (;;) {
    if (m.state == MachState::HALTED) {
      bo.result = BootResult::NORMAL_BOOT;
      break;
    }
    if (m.trapped) {
      bo.result = BootResult::HANG;
      break;
    }
    if (m.regs[sim::PC] == download_wait_) {
      bo.result = BootResult::UART_PROMPT;
      break;
    }
    if (m.clock_ns > deadline_ns_) {
      bo.result = BootResult::HANG;
      break;
    }
    // Once the window has fully passed with no fault landed, the rest of
    // the run is the clean boot; skip re-simulating it.
    if (!bo.fault.applied && m.clock_ns > uint64_t(pf.window_end_ns)) {
      bo.result = BootResult::NORMAL_BOOT;
      bo.end_time_ns = clean_done_time_;
      bo.uart.clear();
      return bo;
    }
    if (try_fast_forward(m, pf)) continue;
    FaultEvent ev;
    m.step(&pf, &rng, &ev);
    if (ev.applied && !bo.fault.applied) bo.fault = ev;
  }
  bo.end_time_ns = m.clock_ns;
  bo.uart = m.uart_out;
  if (captured && bo.result == BootResult::UART_PROMPT) {
    *captured = std::move(m);
  }
  return bo;
}

BootOutcome BootRunner::run(const std::optional<rail::GlitchPulse> &pulse,
                            const rail::RailConfig &rail, uint64_t seed,
                            Machine *captured) const {
  BootOutcome clean{BootResult::NORMAL_BOOT, clean_done_time_, {}, {}};
  if (!pulse) return clean;
  rail::RailOutcome out = rail::resolve_rail(*pulse, rail, 0);
  switch (out.kind) {
    case rail::RailRegime::NONE:
      return clean;
    case rail::RailRegime::CRASH:
      return {BootResult::CRASHED, uint64_t(out.window_start_ns), {}, {}};
    case rail::RailRegime::DETECTED:
      return {BootResult::DETECT_SHUTDOWN, uint64_t(out.window_start_ns), {}, {}};
    case rail::RailRegime::FAULT_WINDOW:
      return simulate(out, seed, captured);
  }
  return clean;
}

UploadReport BootRunner::upload(Machine &m,
                                const std::vector<uint8_t> &wire) const {
  UploadReport rep;
  m.uart_in.insert(m.uart_in.end(), wire.begin(), wire.end());
  size_t mark = m.uart_out.size();

  auto run_until = [&](uint32_t stop_pc, bool stop_on_halt, uint64_t cap) {
    uint64_t limit = m.instr_count + cap;
    while (m.state == MachState::RUNNING && !m.trapped &&
           m.instr_count < limit) {
      if (stop_pc != 0 && m.regs[sim::PC] == stop_pc) break;
      m.step(nullptr, nullptr);
      if (stop_on_halt && m.state == MachState::HALTED) break;
    }
  };

  payload::DecodeResult res = payload::decode(wire);
  rep.decode_error = res.error;
  if (res.error != payload::DecodeError::OK) {
    // Bad checksum or truncation: the bootloader announces itself again
    // and keeps waiting.
    m.regs[sim::PC] = download_entry_;
    run_until(download_wait_, false, 100'000);
  } else {
    const payload::UartPayload &p = res.payload;
    bool stored = true;
    for (size_t i = 0; i < p.code.size() && stored; ++i) {
      stored = m.store_byte(p.header.entry_addr + uint32_t(i), p.code[i]);
    }
    if (stored) {
      m.regs[sim::PC] = p.header.entry_addr;
      run_until(0, true, 32'000'000);
    }
  }
  rep.uart.assign(m.uart_out.begin() + ptrdiff_t(mark), m.uart_out.end());
  rep.final_state = m.state;
  rep.trapped = m.trapped;
  rep.trap_reason = m.trap_reason;
  rep.end_time_ns = m.clock_ns;
  return rep;
}

BootOutcome run_boot(const BootImage &image, const MachineConfig &cfg,
                     const std::optional<rail::GlitchPulse> &pulse,
                     const rail::RailConfig &rail, uint64_t seed) {
  BootRunner runner(image, cfg);
  return runner.run(pulse, rail, seed);
}

}  // namespace glitchlab::boot
