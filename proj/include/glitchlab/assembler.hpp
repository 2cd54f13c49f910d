// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "glitchlab/isa.hpp"

namespace glitchlab::sim {

// Delay loop shape emitted by Asm::delay_iters:
//   mov   counter, #iters
//   head: add  counter, counter, #-1
//         cbnz counter, head
// The runner can fast-forward these analytically once no fault can land.
struct LoopInfo {
  uint32_t head_addr = 0;    // the ADD
  uint32_t branch_addr = 0;  // the CBNZ
  uint8_t counter = 0;
  uint32_t exit_addr = 0;    // first instruction after the loop
};

// Two-pass absolute assembler with numeric labels and name export.
class Asm {
 public:
  explicit Asm(uint32_t base) : base_(base) {}

  int label() {
    targets_.push_back(kUnbound);
    return int(targets_.size()) - 1;
  }
  void bind(int l);
  int bind_new() { int l = label(); bind(l); return l; }
  void name(int l, const std::string &n) { names_[n] = l; }

  uint32_t here() const { return base_ + uint32_t(code_.size()); }
  uint32_t base() const { return base_; }
  uint32_t addr_of(int l) const;

  void nop();
  void halt();
  void mov(Reg rd, uint32_t imm);
  void mov(Reg rd, Reg rm);
  void add(Reg rd, Reg rn, int32_t imm);
  void add(Reg rd, Reg rn, Reg rm);
  void cmp(Reg rn, uint32_t imm);
  void cmp(Reg rn, Reg rm);
  void b(int l);
  void bl(int l);
  void beq(int l);
  void bne(int l);
  void cbz(Reg rn, int l);
  void cbnz(Reg rn, int l);
  void ldr(Reg rd, Reg rn, int32_t off = 0);
  void ldrb(Reg rd, Reg rn, int32_t off = 0);
  void ldr_abs(Reg rd, uint32_t addr);
  void ldrb_abs(Reg rd, uint32_t addr);
  void str(Reg rd, Reg rn, int32_t off = 0);
  void strb(Reg rd, Reg rn, int32_t off = 0);
  void str_abs(Reg rd, uint32_t addr);
  void strb_abs(Reg rd, uint32_t addr);
  void push(uint16_t mask);
  void pop(uint16_t mask);
  void out_uart(Reg rn);
  void out_gpio(Reg rn);
  void ret() { mov(PC, LR); }

  // counter > 0; 1 + 2*counter instructions from mov to loop exit
  LoopInfo delay_iters(Reg counter, uint32_t iters);

  // raw data (e.g. strings); the caller keeps it out of execution paths
  void bytes(const std::vector<uint8_t> &bs);
  void align();  // pad with zero bytes to the next instruction boundary

  // Resolves fixups. Callable once; label addresses stay queryable after.
  std::vector<uint8_t> assemble();

  const std::map<std::string, int> &names() const { return names_; }
  const std::vector<LoopInfo> &loops() const { return loops_; }

 private:
  void emit(const Instr &ins);
  void emit_branch(Op op, int l, Reg rn = R0);

  static constexpr uint32_t kUnbound = 0xffffffff;
  uint32_t base_;
  std::vector<uint8_t> code_;
  std::vector<uint32_t> targets_;                 // label -> addr
  std::vector<std::pair<size_t, int>> fixups_;    // imm byte offset -> label
  std::map<std::string, int> names_;
  std::vector<LoopInfo> loops_;
  bool assembled_ = false;
};

}  // namespace glitchlab::sim
