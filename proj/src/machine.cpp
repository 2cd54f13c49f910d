// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#include "glitchlab/machine.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

namespace glitchlab::sim {

const char *to_string(Mode m) {
  return m == Mode::SECURE_TZ ? "SECURE_TZ" : "NON_SECURE";
}

const char *to_string(MachState s) {
  switch (s) {
    case MachState::RESET_HELD: return "RESET_HELD";
    case MachState::RUNNING: return "RUNNING";
    case MachState::CRASHED: return "CRASHED";
    case MachState::DETECT_SHUTDOWN: return "DETECT_SHUTDOWN";
    case MachState::HALTED: return "HALTED";
  }
  return "?";
}

const char *to_string(TrapReason r) {
  switch (r) {
    case TrapReason::NONE: return "none";
    case TrapReason::UNMAPPED: return "unmapped";
    case TrapReason::MISALIGNED: return "misaligned";
    case TrapReason::ROM_WRITE: return "rom-write";
    case TrapReason::PROTECTED_LOAD: return "protected-load";
    case TrapReason::ILLEGAL: return "illegal";
    case TrapReason::BAD_MMIO: return "bad-mmio";
  }
  return "?";
}

const char *to_string(FaultEffect e) {
  switch (e) {
    case FaultEffect::NONE: return "NONE";
    case FaultEffect::SKIP: return "SKIP";
    case FaultEffect::BRANCH_INVERT: return "BRANCH_INVERT";
    case FaultEffect::CORRUPT_RESULT: return "CORRUPT_RESULT";
  }
  return "?";
}

namespace {

uint32_t word_at(const std::vector<uint8_t> &v, size_t off) {
  uint32_t w;
  std::memcpy(&w, v.data() + off, 4);
  return w;  // host is little-endian; encoding is little-endian
}

std::vector<Instr> build_cache(const std::vector<uint8_t> &bytes) {
  std::vector<Instr> cache(bytes.size() / kInstrBytes);
  for (size_t i = 0; i < cache.size(); ++i) {
    cache[i] = decode(bytes.data() + i * kInstrBytes);
  }
  return cache;
}

}  // namespace

Machine::Machine(const MachineConfig &cfg) : cfg_(cfg) {
  fuses = cfg.fuses;
  ram.assign(cfg.ram_size, 0);
  mb2.assign(cfg.mb2_size, 0);
}

void Machine::load_irom(std::vector<uint8_t> bytes) {
  if (bytes.empty() || bytes.size() > kIromMaxSize || bytes.size() % kInstrBytes) {
    throw std::invalid_argument("boot ROM image must be a non-empty multiple of 8 bytes within 128 KiB");
  }
  auto owned = std::make_shared<const std::vector<uint8_t>>(std::move(bytes));
  irom_cache_ = std::make_shared<const std::vector<Instr>>(build_cache(*owned));
  irom_ = std::move(owned);
}

void Machine::load_mb2(const std::vector<uint8_t> &code, uint32_t offset) {
  if (offset + code.size() > mb2.size()) {
    throw std::invalid_argument("second-stage image exceeds its region");
  }
  std::memcpy(mb2.data() + offset, code.data(), code.size());
  mb2_cache_ = std::make_shared<const std::vector<Instr>>(build_cache(mb2));
  mb2_cache_valid_ = true;
}

void Machine::release_reset(uint32_t entry_pc, Mode start_mode) {
  regs.fill(0);
  regs[SP] = kRamBase + cfg_.ram_size;
  regs[PC] = entry_pc;
  flag_z = flag_n = false;
  mode = start_mode;
  prot = ProtectionRegs{};
  prot.pirom_start = cfg_.reset_pirom_start;
  fuses = cfg_.fuses;
  engine = crypto::CryptoEngine{};
  crypto_status = 0;
  clock_ns = 0;
  instr_count = 0;
  uart_out.clear();
  uart_in.clear();
  uart_in_head = 0;
  gpio = 0;
  gpio_events.clear();
  ignored_writes.clear();
  trapped = false;
  trap_reason = TrapReason::NONE;
  state = MachState::RUNNING;
}

void Machine::trap(TrapReason reason) {
  if (!trapped) {
    trapped = true;
    trap_reason = reason;
    trap_pc = regs[PC];
    trap_time_ns = clock_ns;
  }
  regs[PC] = kTrapVector;
}

// ---------------------------------------------------------------- memory --

bool Machine::load_word(uint32_t addr, uint32_t &out) {
  if (addr % 4) { trap(TrapReason::MISALIGNED); return false; }
  if (addr >= kIromBase && addr < kIromBase + irom_size()) {
    uint32_t off = addr - kIromBase;
    // Data reads of the protected tail are refused outside the secure world
    // unless the bridge register is open. Instruction fetch is unaffected.
    if (off >= prot.pirom_start && mode == Mode::NON_SECURE && !prot.access_pirom) {
      trap(TrapReason::PROTECTED_LOAD);
      return false;
    }
    out = word_at(*irom_, off);
    return true;
  }
  if (addr >= kRamBase && addr + 4 <= kRamBase + ram.size()) {
    out = word_at(ram, addr - kRamBase);
    return true;
  }
  if (addr >= kMb2Base && addr + 4 <= kMb2Base + mb2.size()) {
    out = word_at(mb2, addr - kMb2Base);
    return true;
  }
  if (addr >= kMmioBase && addr < kMmioEnd) {
    bool ok = true;
    out = mmio_read(addr, ok);
    if (!ok) { trap(TrapReason::BAD_MMIO); return false; }
    return true;
  }
  trap(TrapReason::UNMAPPED);
  return false;
}

bool Machine::load_byte(uint32_t addr, uint8_t &out) {
  if (addr >= kIromBase && addr < kIromBase + irom_size()) {
    uint32_t off = addr - kIromBase;
    if (off >= prot.pirom_start && mode == Mode::NON_SECURE && !prot.access_pirom) {
      trap(TrapReason::PROTECTED_LOAD);
      return false;
    }
    out = (*irom_)[off];
    return true;
  }
  if (addr >= kRamBase && addr < kRamBase + ram.size()) {
    out = ram[addr - kRamBase];
    return true;
  }
  if (addr >= kMb2Base && addr < kMb2Base + mb2.size()) {
    out = mb2[addr - kMb2Base];
    return true;
  }
  if (addr >= kMmioBase && addr < kMmioEnd) {
    bool ok = true;
    uint32_t w = mmio_read(addr & ~3u, ok);
    if (!ok) { trap(TrapReason::BAD_MMIO); return false; }
    out = uint8_t(w >> (8 * (addr & 3)));
    return true;
  }
  trap(TrapReason::UNMAPPED);
  return false;
}

bool Machine::store_word(uint32_t addr, uint32_t val) {
  if (addr % 4) { trap(TrapReason::MISALIGNED); return false; }
  if (addr >= kIromBase && addr < kIromBase + irom_size()) {
    trap(TrapReason::ROM_WRITE);
    return false;
  }
  if (addr >= kRamBase && addr + 4 <= kRamBase + ram.size()) {
    std::memcpy(ram.data() + (addr - kRamBase), &val, 4);
    return true;
  }
  if (addr >= kMb2Base && addr + 4 <= kMb2Base + mb2.size()) {
    std::memcpy(mb2.data() + (addr - kMb2Base), &val, 4);
    mb2_cache_valid_ = false;
    return true;
  }
  if (addr >= kMmioBase && addr < kMmioEnd) {
    if (!mmio_write(addr, val)) { trap(TrapReason::BAD_MMIO); return false; }
    return true;
  }
  trap(TrapReason::UNMAPPED);
  return false;
}

bool Machine::store_byte(uint32_t addr, uint8_t val) {
  if (addr >= kIromBase && addr < kIromBase + irom_size()) {
    trap(TrapReason::ROM_WRITE);
    return false;
  }
  if (addr >= kRamBase && addr < kRamBase + ram.size()) {
    ram[addr - kRamBase] = val;
    return true;
  }
  if (addr >= kMb2Base && addr < kMb2Base + mb2.size()) {
    mb2[addr - kMb2Base] = val;
    mb2_cache_valid_ = false;
    return true;
  }
  if (addr == kMmioUartThr) {
    uart_out.push_back(val);
    return true;
  }
  trap(addr >= kMmioBase && addr < kMmioEnd ? TrapReason::BAD_MMIO
                                            : TrapReason::UNMAPPED);
  return false;
}

// ----------------------------------------------------------------- MMIO --

uint32_t Machine::mmio_read(uint32_t addr, bool &ok) {
  const crypto::FekSource &feks = cfg_.feks;
  auto key_word = [](const crypto::Key128 &k, uint32_t idx) {
    uint32_t w;
    std::memcpy(&w, k.data() + 4 * idx, 4);
    return w;
  };
  switch (addr) {
    case kMmioUartThr: return 0;
    case kMmioUartRx:
      if (uart_in_head < uart_in.size()) return uart_in[uart_in_head++];
      return 0;
    case kMmioGpio: return gpio;
    case kMmioSecureBoot: return prot.secure_boot;
    case kMmioPiromStart: return prot.pirom_start;
    case kMmioAccessPirom: return prot.access_pirom;
    case kMmioModeDrop: return mode == Mode::NON_SECURE ? 1 : 0;
    case kMmioFuseFam: return fuses.failure_analysis_mode;
    case kMmioFusePpm: return fuses.preproduction_mode;
    case kMmioFuseProd: return fuses.production_mode;
    case kMmioFuseFek2Sel: return fuses.fek2_select;
    case kMmioCryptoCmd: return 0;
    case kMmioCryptoStatus: return crypto_status;
    default: break;
  }
  if (addr >= kMmioFek1 && addr < kMmioFek1 + 16) {
    if (engine.fek_readout_protect()) return 0;
    return key_word(feks.fek1, (addr - kMmioFek1) / 4);
  }
  if (addr >= kMmioFek2 && addr < kMmioFek2 + 16) {
    if (engine.fek_readout_protect()) return 0;
    return key_word(feks.effective_fek2(), (addr - kMmioFek2) / 4);
  }
  ok = false;
  return 0;
}

bool Machine::mmio_write(uint32_t addr, uint32_t val) {
  switch (addr) {
    case kMmioUartThr:
      uart_out.push_back(uint8_t(val & 0xff));
      return true;
    case kMmioGpio:
      gpio = val;
      gpio_events.push_back({clock_ns, val});
      return true;
    case kMmioSecureBoot:
      // One-way: may be cleared while set; attempts to re-set are recorded.
      if (prot.secure_boot == 1) {
        prot.secure_boot = val & 1;
      } else if ((val & 1) != 0) {
        ignored_writes.push_back({clock_ns, addr, val});
      }
      return true;
    case kMmioPiromStart:
      if (prot.secure_boot == 1) prot.pirom_start = val;
      else ignored_writes.push_back({clock_ns, addr, val});
      return true;
    case kMmioAccessPirom:
      if (prot.secure_boot == 1) prot.access_pirom = val & 1;
      else ignored_writes.push_back({clock_ns, addr, val});
      return true;
    case kMmioModeDrop:
      // One-way drop out of the secure world; writes in NON_SECURE are inert.
      if (mode == Mode::SECURE_TZ && (val & 1)) mode = Mode::NON_SECURE;
      else if (mode == Mode::NON_SECURE) ignored_writes.push_back({clock_ns, addr, val});
      return true;
    case kMmioCryptoCmd:
      crypto_command(val);
      return true;
    case kMmioFuseFam:
    case kMmioFusePpm:
    case kMmioFuseProd:
    case kMmioFuseFek2Sel:
      ignored_writes.push_back({clock_ns, addr, val});  // fuses are immutable
      return true;
    case kMmioCryptoStatus:
      ignored_writes.push_back({clock_ns, addr, val});
      return true;
    default:
      break;
  }
  if (addr >= kMmioFek1 && addr < kMmioFek2 + 16) {
    ignored_writes.push_back({clock_ns, addr, val});
    return true;
  }
  return false;
}

void Machine::crypto_command(uint32_t cmd) {
  using crypto::EngineStatus;
  EngineStatus st;
  switch (cmd) {
    case kCryptoCmdLoadFeks:
      st = engine.load_feks(cfg_.feks);
      break;
    case kCryptoCmdDecryptBlob: {
      if (irom_size() < crypto::kKeyBlobSize) {
        st = EngineStatus::BAD_BLOB_LENGTH;
        break;
      }
      crypto::Bytes blob(irom_->end() - crypto::kKeyBlobSize, irom_->end());
      st = engine.decrypt_key_blob(blob);
      break;
    }
    default:
      crypto_status = 0xff;  // unknown command
      return;
  }
  crypto_status = uint32_t(st);
}

// ------------------------------------------------------------- execution --

const Instr *Machine::fetch() {
  uint32_t pc = regs[PC];
  if (pc % kInstrBytes) { trap(TrapReason::MISALIGNED); return nullptr; }
  if (pc >= kIromBase && pc < kIromBase + irom_size()) {
    return &(*irom_cache_)[(pc - kIromBase) / kInstrBytes];
  }
  if (pc >= kMb2Base && pc + kInstrBytes <= kMb2Base + mb2.size()) {
    if (mb2_cache_valid_) return &(*mb2_cache_)[(pc - kMb2Base) / kInstrBytes];
    scratch_instr_ = decode(mb2.data() + (pc - kMb2Base));
    return &scratch_instr_;
  }
  if (pc >= kRamBase && pc + kInstrBytes <= kRamBase + ram.size()) {
    scratch_instr_ = decode(ram.data() + (pc - kRamBase));
    return &scratch_instr_;
  }
  if (pc == kTrapVector) {
    // Synthetic spin at the trap vector: time advances, nothing executes.
    static const Instr spin{Op::B, 0, 0, 0, false, true, 0, kTrapVector, true};
    return &spin;
  }
  trap(TrapReason::UNMAPPED);
  return nullptr;
}

void Machine::step(PendingFault *pending, Rng *rng, FaultEvent *ev) {
  if (state != MachState::RUNNING) return;
  FaultEffect forced = FaultEffect::NONE;
  const Instr *ins = fetch();
  uint64_t dur = instr_duration_ns();
  if (ins && pending && !pending->consumed &&
      int64_t(clock_ns) <= pending->window_end_ns &&
      int64_t(clock_ns + dur) > pending->window_start_ns) {
    // Window overlaps this instruction: one draw; a hit consumes the pulse.
    if (rng->uniform() < pending->probability) {
      pending->consumed = true;
      switch (classify(*ins)) {
        case InstrClass::COND_BRANCH: forced = FaultEffect::BRANCH_INVERT; break;
        case InstrClass::ALU: forced = FaultEffect::CORRUPT_RESULT; break;
        case InstrClass::OTHER: forced = FaultEffect::SKIP; break;
      }
    }
  }
  if (ins) execute(*ins, forced, rng, ev);
  clock_ns += dur;
  ++instr_count;
}

void Machine::step_forced(FaultEffect effect, Rng *rng, FaultEvent *ev) {
  if (state != MachState::RUNNING) return;
  const Instr *ins = fetch();
  if (ins) execute(*ins, effect, rng, ev);
  clock_ns += instr_duration_ns();
  ++instr_count;
}

void Machine::execute(const Instr &ins, FaultEffect forced, Rng *rng,
                      FaultEvent *ev) {
  uint32_t pc = regs[PC];
  uint32_t next = pc + kInstrBytes;
  auto note = [&](FaultEffect e, uint8_t reg, uint32_t detail) {
    if (ev) *ev = FaultEvent{true, clock_ns, pc, e, reg, detail};
  };

  if (!ins.valid) { trap(TrapReason::ILLEGAL); return; }

  if (forced == FaultEffect::SKIP) {
    regs[PC] = next;
    note(FaultEffect::SKIP, 0, 0);
    return;
  }

  // A corrupted ALU result flips one uniformly chosen bit of the value
  // being written back.
  auto write_result = [&](uint8_t rd, uint32_t value) {
    if (forced == FaultEffect::CORRUPT_RESULT) {
      uint32_t bit = rng ? uint32_t(rng->below(32)) : 0;
      value ^= 1u << bit;
      note(FaultEffect::CORRUPT_RESULT, rd, bit);
    }
    regs[rd] = value;
  };

  auto branch_to = [&](uint32_t target) {
    if (target % kInstrBytes) { trap(TrapReason::MISALIGNED); return; }
    regs[PC] = target;
  };

  auto cond_branch = [&](bool taken) {
    if (forced == FaultEffect::BRANCH_INVERT) {
      taken = !taken;
      note(FaultEffect::BRANCH_INVERT, 0, taken ? 1 : 0);
    }
    if (taken) branch_to(ins.imm);
    else regs[PC] = next;
  };

  switch (ins.op) {
    case Op::NOP:
      regs[PC] = next;
      break;
    case Op::HALT:
      state = MachState::HALTED;
      break;
    case Op::MOV: {
      uint32_t val = ins.has_imm ? ins.imm : regs[ins.rm];
      if (ins.rd == PC) {
        branch_to(val);  // return idiom; classified as control flow
      } else {
        write_result(ins.rd, val);
        regs[PC] = next;
      }
      break;
    }
    case Op::ADD: {
      if (ins.rd == PC) { trap(TrapReason::ILLEGAL); return; }
      uint32_t val = regs[ins.rn] + (ins.has_imm ? ins.imm : regs[ins.rm]);
      write_result(ins.rd, val);
      regs[PC] = next;
      break;
    }
    case Op::CMP: {
      uint32_t a = regs[ins.rn];
      uint32_t b = ins.has_imm ? ins.imm : regs[ins.rm];
      flag_z = (a == b);
      flag_n = int32_t(a - b) < 0;
      regs[PC] = next;
      break;
    }
    case Op::B:
      branch_to(ins.imm);
      break;
    case Op::BL:
      regs[LR] = next;
      branch_to(ins.imm);
      break;
    case Op::BEQ: cond_branch(flag_z); break;
    case Op::BNE: cond_branch(!flag_z); break;
    case Op::CBZ: cond_branch(regs[ins.rn] == 0); break;
    case Op::CBNZ: cond_branch(regs[ins.rn] != 0); break;
    case Op::LDR: {
      if (ins.rd == PC) { trap(TrapReason::ILLEGAL); return; }
      uint32_t base = ins.rn == PC ? 0 : regs[ins.rn];
      uint32_t addr = base + ins.imm;
      uint32_t val = 0;
      if (ins.byte) {
        uint8_t b = 0;
        if (!load_byte(addr, b)) return;
        val = b;
      } else {
        if (!load_word(addr, val)) return;
      }
      write_result(ins.rd, val);
      regs[PC] = next;
      break;
    }
    case Op::STR: {
      uint32_t base = ins.rn == PC ? 0 : regs[ins.rn];
      uint32_t addr = base + ins.imm;
      bool ok = ins.byte ? store_byte(addr, uint8_t(regs[ins.rd]))
                         : store_word(addr, regs[ins.rd]);
      if (!ok) return;
      regs[PC] = next;
      break;
    }
    case Op::PUSH: {
      uint32_t count = uint32_t(std::popcount(ins.reglist));
      uint32_t sp = regs[SP] - 4 * count;
      uint32_t addr = sp;
      for (int r = 0; r < 16; ++r) {
        if (!(ins.reglist & (1u << r))) continue;
        if (!store_word(addr, regs[r])) return;
        addr += 4;
      }
      regs[SP] = sp;
      regs[PC] = next;
      break;
    }
    case Op::POP: {
      uint32_t addr = regs[SP];
      uint32_t new_pc = 0;
      bool pops_pc = false;
      for (int r = 0; r < 16; ++r) {
        if (!(ins.reglist & (1u << r))) continue;
        uint32_t val = 0;
        if (!load_word(addr, val)) return;
        addr += 4;
        if (r == PC) { pops_pc = true; new_pc = val; }
        else regs[r] = val;
      }
      regs[SP] = addr;
      if (pops_pc) branch_to(new_pc);
      else regs[PC] = next;
      break;
    }
    case Op::OUT_UART:
      uart_out.push_back(uint8_t(regs[ins.rn] & 0xff));
      regs[PC] = next;
      break;
    case Op::OUT_GPIO:
      gpio = regs[ins.rn];
      gpio_events.push_back({clock_ns, gpio});
      regs[PC] = next;
      break;
  }
}

}  // namespace glitchlab::sim
