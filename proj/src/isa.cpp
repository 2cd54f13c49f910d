// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#include "glitchlab/isa.hpp"

#include <cstdio>

namespace glitchlab::sim {

InstrClass classify(const Instr &ins) {
  switch (ins.op) {
    case Op::BEQ:
    case Op::BNE:
    case Op::CBZ:
    case Op::CBNZ:
      return InstrClass::COND_BRANCH;
    case Op::ADD:
      return InstrClass::ALU;
    case Op::MOV:
      // MOV into pc is the return idiom; treat it as control flow so a
      // corrupted result can never synthesize a jump.
      return ins.rd == PC ? InstrClass::OTHER : InstrClass::ALU;
    default:
      return InstrClass::OTHER;
  }
}

uint64_t encode(const Instr &ins) {
  uint32_t w = uint32_t(ins.op);
  if (ins.op == Op::PUSH || ins.op == Op::POP) {
    w |= uint32_t(ins.reglist) << 16;
  } else {
    w |= (uint32_t(ins.rd) & 0xf) << 8;
    w |= (uint32_t(ins.rn) & 0xf) << 12;
    w |= (uint32_t(ins.rm) & 0xf) << 16;
    if (ins.byte) w |= 1u << 20;
    if (ins.has_imm) w |= 1u << 21;
  }
  return uint64_t(w) | (uint64_t(ins.imm) << 32);
}

Instr decode(const uint8_t *p) {
  uint32_t w = uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
               uint32_t(p[3]) << 24;
  uint32_t imm = uint32_t(p[4]) | uint32_t(p[5]) << 8 | uint32_t(p[6]) << 16 |
                 uint32_t(p[7]) << 24;
  Instr ins;
  uint8_t opc = w & 0xff;
  if (opc < uint8_t(Op::NOP) || opc > uint8_t(Op::OUT_GPIO)) return ins;
  ins.op = Op(opc);
  ins.imm = imm;
  if (ins.op == Op::PUSH || ins.op == Op::POP) {
    ins.reglist = uint16_t(w >> 16);
  } else {
    ins.rd = (w >> 8) & 0xf;
    ins.rn = (w >> 12) & 0xf;
    ins.rm = (w >> 16) & 0xf;
    ins.byte = (w >> 20) & 1;
    ins.has_imm = (w >> 21) & 1;
  }
  ins.valid = true;
  return ins;
}

static const char *reg_name(uint8_t r) {
  static const char *names[16] = {"r0", "r1", "r2",  "r3",  "r4", "r5",
                                  "r6", "r7", "r8",  "r9",  "r10", "r11",
                                  "r12", "sp", "lr", "pc"};
  return names[r & 0xf];
}

std::string disassemble(const Instr &ins, uint32_t addr) {
  char buf[96];
  if (!ins.valid) return "<invalid>";
  switch (ins.op) {
    case Op::NOP: return "nop";
    case Op::HALT: return "halt";
    case Op::MOV:
      if (ins.has_imm)
        snprintf(buf, sizeof buf, "mov %s, #0x%x", reg_name(ins.rd), ins.imm);
      else
        snprintf(buf, sizeof buf, "mov %s, %s", reg_name(ins.rd), reg_name(ins.rm));
      break;
    case Op::ADD:
      if (ins.has_imm)
        snprintf(buf, sizeof buf, "add %s, %s, #%d", reg_name(ins.rd),
                 reg_name(ins.rn), int32_t(ins.imm));
      else
        snprintf(buf, sizeof buf, "add %s, %s, %s", reg_name(ins.rd),
                 reg_name(ins.rn), reg_name(ins.rm));
      break;
    case Op::CMP:
      if (ins.has_imm)
        snprintf(buf, sizeof buf, "cmp %s, #0x%x", reg_name(ins.rn), ins.imm);
      else
        snprintf(buf, sizeof buf, "cmp %s, %s", reg_name(ins.rn), reg_name(ins.rm));
      break;
    case Op::B: snprintf(buf, sizeof buf, "b 0x%x", ins.imm); break;
    case Op::BL: snprintf(buf, sizeof buf, "bl 0x%x", ins.imm); break;
    case Op::BEQ: snprintf(buf, sizeof buf, "beq 0x%x", ins.imm); break;
    case Op::BNE: snprintf(buf, sizeof buf, "bne 0x%x", ins.imm); break;
    case Op::CBZ:
      snprintf(buf, sizeof buf, "cbz %s, 0x%x", reg_name(ins.rn), ins.imm);
      break;
    case Op::CBNZ:
      snprintf(buf, sizeof buf, "cbnz %s, 0x%x", reg_name(ins.rn), ins.imm);
      break;
    case Op::LDR:
      if (ins.rn == PC)
        snprintf(buf, sizeof buf, "ldr%s %s, [0x%x]", ins.byte ? "b" : "",
                 reg_name(ins.rd), ins.imm);
      else
        snprintf(buf, sizeof buf, "ldr%s %s, [%s, #%d]", ins.byte ? "b" : "",
                 reg_name(ins.rd), reg_name(ins.rn), int32_t(ins.imm));
      break;
    case Op::STR:
      if (ins.rn == PC)
        snprintf(buf, sizeof buf, "str%s %s, [0x%x]", ins.byte ? "b" : "",
                 reg_name(ins.rd), ins.imm);
      else
        snprintf(buf, sizeof buf, "str%s %s, [%s, #%d]", ins.byte ? "b" : "",
                 reg_name(ins.rd), reg_name(ins.rn), int32_t(ins.imm));
      break;
    case Op::PUSH: snprintf(buf, sizeof buf, "push {mask=0x%x}", ins.reglist); break;
    case Op::POP: snprintf(buf, sizeof buf, "pop {mask=0x%x}", ins.reglist); break;
    case Op::OUT_UART: snprintf(buf, sizeof buf, "out.uart %s", reg_name(ins.rn)); break;
    case Op::OUT_GPIO: snprintf(buf, sizeof buf, "out.gpio %s", reg_name(ins.rn)); break;
    default: return "<invalid>";
  }
  (void)addr;
  return buf;
}

}  // namespace glitchlab::sim
