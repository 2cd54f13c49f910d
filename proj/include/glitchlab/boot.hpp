// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "glitchlab/assembler.hpp"
#include "glitchlab/machine.hpp"
#include "glitchlab/payload.hpp"
#include "glitchlab/rail.hpp"

namespace glitchlab::boot {

enum class BootResult { NORMAL_BOOT, CRASHED, DETECT_SHUTDOWN, UART_PROMPT, HANG };
const char *to_string(BootResult r);

// Boot timeline constants, all measured from reset release.
struct Timeline {
  uint64_t fuse_check_time_ns = 2'610'000;
  uint64_t qspi_probe_time_ns = 4'420'000;
  uint64_t mb2_entry_time_ns = 172'000'000;
  void validate() const;  // fuse < qspi < mb2
};

// A built boot ROM plus the metadata the runner and reports need: label
// addresses, registered delay loops, and the measured hand-off instant.
struct BootImage {
  std::vector<uint8_t> irom_bytes;
  Timeline timeline{};
  uint32_t reset_pirom_from = 0x400;
  uint32_t reset_pirom_to = 0x2000;
  uint32_t lockdown_pirom_start = 0x1200;
  std::string prompt = "NV-UART-BOOT>";
  std::map<std::string, uint32_t> labels;
  std::vector<sim::LoopInfo> loops;
  uint64_t boot_done_time_ns = 0;  // clean-run HALT instant

  uint32_t addr(const std::string &label) const;  // throws on unknown label
};

struct BootImageParams {
  Timeline timeline{};
  // Replace the stock decision gate with the fault-hardened variant.
  bool hardened_fuse_check = false;
  // Each fuse is sampled this many times into an accumulator; the whole
  // sampled stretch is the glitch-susceptible band.
  uint32_t fuse_samples = 160;
  std::string prompt = "NV-UART-BOOT>";
  uint32_t irom_size = sim::kIromMaxSize;
  uint32_t reset_pirom_from = 0x400;
  uint32_t reset_pirom_to = 0x2000;
  uint32_t lockdown_pirom_start = 0x1200;
  std::vector<uint8_t> key_blob;  // 4 KiB; empty means all zeros
};

// Assembles the boot program and calibrates its delay loops so the
// fuse-check entry and the QSPI probe start at exactly the configured
// instants; throws std::invalid_argument when the timeline is infeasible.
BootImage build_boot_image(const BootImageParams &p,
                           const sim::MachineConfig &mcfg);

// Program-construction blocks shared between the boot ROM and the
// standalone fixtures, so both run the byte-identical gate code.

// Four zero words: anything that falls through a skipped return lands on
// an illegal instruction and traps instead of running a neighbor routine.
void emit_zero_barrier(sim::Asm &a);

// r0 = sum of `samples` reads of one fuse MMIO word (clobbers r1, r2).
// The accumulate ADD is the instruction a landed writeback fault turns
// into a blown-fuse reading.
void emit_fuse_sampler(sim::Asm &a, uint32_t fuse_mmio_addr,
                       uint32_t samples);

// The download gate: checks the two debug fuses and calls download_lbl
// only when one of them reads blown. Binds fuse_lbl; names the decision
// points fc_cbz_fam, fc_cbnz_ppm, fc_bl_download, fc_cmp_ppm,
// fc_bne_loopback plus the region labels fuse_check / is_fam_or_ppm /
// is_not_fam / fuse_check_exit.
void emit_fuse_check_gate(sim::Asm &a, int fuse_lbl, int isfam_lbl,
                          int isppm_lbl, int download_lbl);

// Fault-hardened gate: every fuse is sampled twice into distinct
// registers, the copies must agree, each zero/nonzero decision is taken
// twice with opposite branch polarity, and the download path re-verifies
// the claiming pair. Any disagreement lands on an instruction-trap
// barrier. Defeats every single fault the pulse model can inject.
void emit_fuse_check_gate_hardened(sim::Asm &a, int fuse_lbl, int isfam_lbl,
                                   int isppm_lbl, int download_lbl);

struct BootOutcome {
  BootResult result = BootResult::HANG;
  uint64_t end_time_ns = 0;        // classification instant
  std::vector<uint8_t> uart;       // bytes emitted up to that instant
  sim::FaultEvent fault{};         // the landed fault, if any
};

struct UploadReport {
  payload::DecodeError decode_error = payload::DecodeError::OK;
  std::vector<uint8_t> uart;  // bytes produced after the upload started
  sim::MachState final_state = sim::MachState::RUNNING;
  bool trapped = false;
  sim::TrapReason trap_reason = sim::TrapReason::NONE;
  uint64_t end_time_ns = 0;
};

// Executes boots against one image. Construction performs a clean
// reference run and caches machine snapshots along the timeline; run() is
// const and safe to share across threads. Fault-free stretches inside
// registered delay loops are advanced analytically (identical
// architectural effect, no RNG use), which keeps one attempt in the tens
// of microseconds instead of milliseconds.
class BootRunner {
 public:
  BootRunner(BootImage image, sim::MachineConfig cfg);

  const BootImage &image() const { return img_; }
  const sim::MachineConfig &machine_config() const { return cfg_; }
  uint64_t boot_done_time_ns() const { return clean_done_time_; }

  // pulse == nullopt boots clean. On UART_PROMPT and captured != nullptr
  // the machine is left parked at the download-wait spin for upload().
  BootOutcome run(const std::optional<rail::GlitchPulse> &pulse,
                  const rail::RailConfig &rail, uint64_t seed,
                  sim::Machine *captured = nullptr) const;

  // Feeds one encoded payload to a machine parked at download-wait: on a
  // valid checksum the code is placed at its entry address and executed
  // until HALT/trap; on a bad payload the bootloader re-emits the prompt.
  UploadReport upload(sim::Machine &m, const std::vector<uint8_t> &wire) const;

  // Test hook: disables analytic loop fast-forward (pure stepping).
  void set_fast_forward(bool on) { fast_forward_ = on; }

 private:
  BootOutcome simulate(const rail::RailOutcome &out, uint64_t seed,
                       sim::Machine *captured) const;
  const sim::Machine &snapshot_before(uint64_t time_ns) const;
  bool try_fast_forward(sim::Machine &m, const sim::PendingFault &pf) const;

  BootImage img_;
  sim::MachineConfig cfg_;
  uint32_t download_entry_ = 0;
  uint32_t download_wait_ = 0;
  std::vector<sim::Machine> snaps_;  // ascending clock_ns
  uint64_t clean_done_time_ = 0;
  uint64_t deadline_ns_ = 0;
  bool fast_forward_ = true;
};

// Single-shot convenience; builds a throwaway runner.
BootOutcome run_boot(const BootImage &image, const sim::MachineConfig &cfg,
                     const std::optional<rail::GlitchPulse> &pulse,
                     const rail::RailConfig &rail, uint64_t seed);

}  // namespace glitchlab::boot
