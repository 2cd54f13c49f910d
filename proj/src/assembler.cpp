// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#include "glitchlab/assembler.hpp"

#include <stdexcept>

namespace glitchlab::sim {

void Asm::bind(int l) {
  if (targets_.at(l) != kUnbound) throw std::logic_error("label bound twice");
  targets_[l] = here();
}

uint32_t Asm::addr_of(int l) const {
  uint32_t a = targets_.at(l);
  if (a == kUnbound) throw std::logic_error("label never bound");
  return a;
}

void Asm::emit(const Instr &ins) {
  if (assembled_) throw std::logic_error("emit after assemble");
  uint64_t w = encode(ins);
  for (int i = 0; i < 8; i++) code_.push_back(uint8_t(w >> (8 * i)));
}

void Asm::emit_branch(Op op, int l, Reg rn) {
  Instr ins;
  ins.op = op;
  ins.rn = rn;
  ins.has_imm = true;
  fixups_.emplace_back(code_.size() + 4, l);
  emit(ins);
}

void Asm::nop() { emit({.op = Op::NOP}); }
void Asm::halt() { emit({.op = Op::HALT}); }

void Asm::mov(Reg rd, uint32_t imm) {
  emit({.op = Op::MOV, .rd = rd, .has_imm = true, .imm = imm});
}
void Asm::mov(Reg rd, Reg rm) { emit({.op = Op::MOV, .rd = rd, .rm = rm}); }

void Asm::add(Reg rd, Reg rn, int32_t imm) {
  emit({.op = Op::ADD, .rd = rd, .rn = rn, .has_imm = true, .imm = uint32_t(imm)});
}
void Asm::add(Reg rd, Reg rn, Reg rm) {
  emit({.op = Op::ADD, .rd = rd, .rn = rn, .rm = rm});
}

void Asm::cmp(Reg rn, uint32_t imm) {
  emit({.op = Op::CMP, .rn = rn, .has_imm = true, .imm = imm});
}
void Asm::cmp(Reg rn, Reg rm) { emit({.op = Op::CMP, .rn = rn, .rm = rm}); }

void Asm::b(int l) { emit_branch(Op::B, l); }
void Asm::bl(int l) { emit_branch(Op::BL, l); }
void Asm::beq(int l) { emit_branch(Op::BEQ, l); }
void Asm::bne(int l) { emit_branch(Op::BNE, l); }
void Asm::cbz(Reg rn, int l) { emit_branch(Op::CBZ, l, rn); }
void Asm::cbnz(Reg rn, int l) { emit_branch(Op::CBNZ, l, rn); }

void Asm::ldr(Reg rd, Reg rn, int32_t off) {
  emit({.op = Op::LDR, .rd = rd, .rn = rn, .imm = uint32_t(off)});
}
void Asm::ldrb(Reg rd, Reg rn, int32_t off) {
  emit({.op = Op::LDR, .rd = rd, .rn = rn, .byte = true, .imm = uint32_t(off)});
}
void Asm::ldr_abs(Reg rd, uint32_t addr) {
  emit({.op = Op::LDR, .rd = rd, .rn = PC, .imm = addr});
}
void Asm::ldrb_abs(Reg rd, uint32_t addr) {
  emit({.op = Op::LDR, .rd = rd, .rn = PC, .byte = true, .imm = addr});
}
void Asm::str(Reg rd, Reg rn, int32_t off) {
  emit({.op = Op::STR, .rd = rd, .rn = rn, .imm = uint32_t(off)});
}
void Asm::strb(Reg rd, Reg rn, int32_t off) {
  emit({.op = Op::STR, .rd = rd, .rn = rn, .byte = true, .imm = uint32_t(off)});
}
void Asm::str_abs(Reg rd, uint32_t addr) {
  emit({.op = Op::STR, .rd = rd, .rn = PC, .imm = addr});
}
void Asm::strb_abs(Reg rd, uint32_t addr) {
  emit({.op = Op::STR, .rd = rd, .rn = PC, .byte = true, .imm = addr});
}

void Asm::push(uint16_t mask) { emit({.op = Op::PUSH, .reglist = mask}); }
void Asm::pop(uint16_t mask) { emit({.op = Op::POP, .reglist = mask}); }
void Asm::out_uart(Reg rn) { emit({.op = Op::OUT_UART, .rn = rn}); }
void Asm::out_gpio(Reg rn) { emit({.op = Op::OUT_GPIO, .rn = rn}); }

LoopInfo Asm::delay_iters(Reg counter, uint32_t iters) {
  if (iters == 0) throw std::invalid_argument("delay_iters: zero count");
  LoopInfo info;
  info.counter = counter;
  mov(counter, iters);
  int head = bind_new();
  info.head_addr = addr_of(head);
  add(counter, counter, -1);
  info.branch_addr = here();
  cbnz(counter, head);
  info.exit_addr = here();
  loops_.push_back(info);
  return info;
}

void Asm::bytes(const std::vector<uint8_t> &bs) {
  code_.insert(code_.end(), bs.begin(), bs.end());
}

void Asm::align() {
  while (code_.size() % kInstrBytes != 0) code_.push_back(0);
}

std::vector<uint8_t> Asm::assemble() {
  if (assembled_) throw std::logic_error("assemble called twice");
  assembled_ = true;
  for (auto &[off, l] : fixups_) {
    uint32_t addr = addr_of(l);
    code_[off + 0] = uint8_t(addr);
    code_[off + 1] = uint8_t(addr >> 8);
    code_[off + 2] = uint8_t(addr >> 16);
    code_[off + 3] = uint8_t(addr >> 24);
  }
  return code_;
}

}  // namespace glitchlab::sim
