// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "glitchlab/crypto.hpp"
#include "glitchlab/isa.hpp"
#include "glitchlab/rng.hpp"

namespace glitchlab::sim {

enum class Mode { SECURE_TZ, NON_SECURE };
enum class MachState { RESET_HELD, RUNNING, CRASHED, DETECT_SHUTDOWN, HALTED };

const char *to_string(Mode m);
const char *to_string(MachState s);

// Memory map. The boot ROM sits at kIromBase; later-stage code runs from
// kMb2Base; RAM holds the stack and uploaded payloads.
constexpr uint32_t kIromBase = 0x10000;
constexpr uint32_t kIromMaxSize = 0x20000;  // 128 KiB
constexpr uint32_t kRamBase = 0x40000000;
constexpr uint32_t kMb2Base = 0x52000000;
constexpr uint32_t kTrapVector = 0xffff0000;  // synthetic hang-loop address

// MMIO registers (word addresses).
constexpr uint32_t kMmioBase = 0x60000000;
constexpr uint32_t kMmioUartThr = 0x60000000;
constexpr uint32_t kMmioUartRx = 0x60000004;
constexpr uint32_t kMmioGpio = 0x60000010;
constexpr uint32_t kMmioSecureBoot = 0x60000020;
constexpr uint32_t kMmioPiromStart = 0x60000024;
constexpr uint32_t kMmioAccessPirom = 0x60000028;
constexpr uint32_t kMmioModeDrop = 0x6000002c;
constexpr uint32_t kMmioFuseFam = 0x60000030;
constexpr uint32_t kMmioFusePpm = 0x60000034;
constexpr uint32_t kMmioFuseProd = 0x60000038;
constexpr uint32_t kMmioFuseFek2Sel = 0x6000003c;
constexpr uint32_t kMmioFek1 = 0x60000050;  // 16 bytes
constexpr uint32_t kMmioFek2 = 0x60000060;  // 16 bytes
constexpr uint32_t kMmioCryptoCmd = 0x60000080;
constexpr uint32_t kMmioCryptoStatus = 0x60000084;
constexpr uint32_t kMmioEnd = 0x60000090;

constexpr uint32_t kCryptoCmdLoadFeks = 1;
constexpr uint32_t kCryptoCmdDecryptBlob = 2;

// Boot-chain protection registers. pirom_start/access_pirom writes are
// honored only while secure_boot = 1; secure_boot itself and the mode drop
// are one-way latches. Refused writes are recorded, not trapped.
struct ProtectionRegs {
  uint32_t secure_boot = 1;
  uint32_t pirom_start = 0x400;  // byte offset into the boot ROM
  uint32_t access_pirom = 0;
};

// Production personality: all debug-mode fuses read zero.
struct FuseBank {
  uint32_t failure_analysis_mode = 0;
  uint32_t preproduction_mode = 0;
  uint32_t production_mode = 1;
  uint32_t fek2_select = 1;  // 1 = TESTKEY bank
};

enum class TrapReason {
  NONE, UNMAPPED, MISALIGNED, ROM_WRITE, PROTECTED_LOAD, ILLEGAL, BAD_MMIO,
};
const char *to_string(TrapReason r);

enum class FaultEffect { NONE, SKIP, BRANCH_INVERT, CORRUPT_RESULT };
const char *to_string(FaultEffect e);

// The resolved effect of a pulse on one executed instruction.
struct FaultEvent {
  bool applied = false;
  uint64_t time_ns = 0;
  uint32_t pc = 0;
  FaultEffect effect = FaultEffect::NONE;
  uint8_t reg = 0;       // CORRUPT_RESULT: destination register
  uint32_t detail = 0;   // CORRUPT_RESULT: bit index; BRANCH_INVERT: taken after
};

// Armed fault window for one run. At most one fault lands per pulse: the
// first successful draw consumes the window.
struct PendingFault {
  int64_t window_start_ns = 0;
  int64_t window_end_ns = 0;
  double probability = 0.0;
  bool consumed = false;
};

struct GpioEvent {
  uint64_t time_ns;
  uint32_t value;
};

struct IgnoredWrite {
  uint64_t time_ns;
  uint32_t addr;
  uint32_t value;
};

struct MachineConfig {
  uint32_t tick_ns = 20;
  uint32_t ticks_per_instr = 1;
  uint32_t ram_size = 16 * 1024;
  uint32_t mb2_size = 16 * 1024;
  uint32_t reset_pirom_start = 0x400;
  FuseBank fuses{};
  crypto::FekSource feks{};
};

// Cycle-stepped core plus devices. Copyable; copies are used as timeline
// snapshots, so everything mutable lives in value members (the ROM bytes
// and their decode cache are shared immutable state).
class Machine {
 public:
  explicit Machine(const MachineConfig &cfg);

  void load_irom(std::vector<uint8_t> bytes);
  void load_mb2(const std::vector<uint8_t> &code, uint32_t offset = 0);

  // Reset release: registers cleared, sp at RAM top, protection regs and
  // fuses at reset values, clock zeroed. The machine starts RUNNING.
  void release_reset(uint32_t entry_pc, Mode mode = Mode::SECURE_TZ);

  // Executes one instruction. A pending fault window may convert it into a
  // faulted execution; rng is only consumed while the window overlaps.
  void step(PendingFault *pending, Rng *rng, FaultEvent *ev = nullptr);
  // Oracle replay path: apply one forced effect to the current instruction.
  void step_forced(FaultEffect effect, Rng *rng, FaultEvent *ev = nullptr);

  uint64_t instr_duration_ns() const {
    return uint64_t(cfg_.tick_ns) * cfg_.ticks_per_instr;
  }

  // Data-load path shared with LDR; applies the protected-region check.
  bool load_word(uint32_t addr, uint32_t &out);
  bool load_byte(uint32_t addr, uint8_t &out);
  bool store_word(uint32_t addr, uint32_t val);
  bool store_byte(uint32_t addr, uint8_t val);

  const MachineConfig &config() const { return cfg_; }
  const std::vector<uint8_t> &irom() const { return *irom_; }
  uint32_t irom_size() const { return irom_ ? uint32_t(irom_->size()) : 0; }

  // architectural state
  std::array<uint32_t, 16> regs{};
  bool flag_z = false;
  bool flag_n = false;
  Mode mode = Mode::SECURE_TZ;
  MachState state = MachState::RESET_HELD;
  uint64_t clock_ns = 0;
  uint64_t instr_count = 0;
  ProtectionRegs prot{};
  FuseBank fuses{};
  crypto::CryptoEngine engine{};
  uint32_t crypto_status = 0;

  // devices
  std::vector<uint8_t> uart_out;
  std::vector<uint8_t> uart_in;
  size_t uart_in_head = 0;
  uint32_t gpio = 0;
  std::vector<GpioEvent> gpio_events;
  std::vector<IgnoredWrite> ignored_writes;

  // trap bookkeeping
  bool trapped = false;
  TrapReason trap_reason = TrapReason::NONE;
  uint32_t trap_pc = 0;
  uint64_t trap_time_ns = 0;

  std::vector<uint8_t> ram;
  std::vector<uint8_t> mb2;

 private:
  const Instr *fetch();
  void execute(const Instr &ins, FaultEffect forced, Rng *rng, FaultEvent *ev);
  void trap(TrapReason reason);
  uint32_t mmio_read(uint32_t addr, bool &ok);
  bool mmio_write(uint32_t addr, uint32_t val);
  void crypto_command(uint32_t cmd);

  MachineConfig cfg_;
  std::shared_ptr<const std::vector<uint8_t>> irom_;
  std::shared_ptr<const std::vector<Instr>> irom_cache_;
  std::shared_ptr<const std::vector<Instr>> mb2_cache_;
  bool mb2_cache_valid_ = false;
  Instr scratch_instr_;  // decode buffer for RAM-resident code
};

}  // namespace glitchlab::sim
