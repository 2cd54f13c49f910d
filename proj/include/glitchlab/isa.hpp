// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

namespace glitchlab::sim {

// Register file: r0..r12 general, sp=r13, lr=r14, pc=r15.
enum Reg : uint8_t {
  R0 = 0, R1, R2, R3, R4, R5, R6, R7, R8, R9, R10, R11, R12,
  SP = 13, LR = 14, PC = 15,
  FP = R11,
};

// Every instruction occupies 8 bytes: a 32-bit operation word followed by
// a 32-bit immediate (zero when unused). Fixed size keeps pc arithmetic
// and fault replay trivial.
//
// op word layout:
//   [7:0]   opcode
//   [11:8]  rd
//   [15:12] rn
//   [19:16] rm        (PUSH/POP: [31:16] is the register mask instead)
//   [20]    byte access (LDR/STR)
//   [21]    immediate operand selected
enum class Op : uint8_t {
  NOP = 0x01,
  HALT = 0x02,
  MOV = 0x03,   // rd <- imm32 | rm        (rd == pc with register source: jump)
  ADD = 0x04,   // rd <- rn + (imm32|rm)   (imm is two's complement)
  CMP = 0x05,   // flags from rn - (imm32|rm)
  B = 0x06,     // pc <- imm32
  BL = 0x07,    // lr <- next, pc <- imm32
  BEQ = 0x08,   // if Z
  BNE = 0x09,   // if !Z
  CBZ = 0x0a,   // if rn == 0
  CBNZ = 0x0b,  // if rn != 0
  LDR = 0x0c,   // rd <- mem[rn + imm]; rn == pc means absolute imm address
  STR = 0x0d,   // mem[rn + imm] <- rd
  PUSH = 0x0e,  // descending, ascending register order in memory
  POP = 0x0f,   // pc in the mask returns
  OUT_UART = 0x10,  // low byte of rn to the UART output stream
  OUT_GPIO = 0x11,  // rn to the GPIO latch
};

constexpr uint32_t kInstrBytes = 8;

struct Instr {
  Op op = Op::NOP;
  uint8_t rd = 0;
  uint8_t rn = 0;
  uint8_t rm = 0;
  bool byte = false;
  bool has_imm = false;
  uint16_t reglist = 0;
  uint32_t imm = 0;
  bool valid = false;
};

// Instruction classes drive which fault effect a pulse can induce.
enum class InstrClass {
  COND_BRANCH,  // BEQ/BNE/CBZ/CBNZ: BRANCH_INVERT
  ALU,          // ADD, MOV with a data register destination: CORRUPT_RESULT
  OTHER,        // everything else, including MOV pc: SKIP
};

InstrClass classify(const Instr &ins);

uint64_t encode(const Instr &ins);                  // 8 bytes, little-endian
Instr decode(const uint8_t *p);                     // p points at 8 bytes
std::string disassemble(const Instr &ins, uint32_t addr);

}  // namespace glitchlab::sim
