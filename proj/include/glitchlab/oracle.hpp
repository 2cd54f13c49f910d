// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "glitchlab/fixtures.hpp"
#include "glitchlab/machine.hpp"

namespace glitchlab::oracle {

// A standalone program the oracle can run repeatedly from reset.
struct Program {
  std::vector<uint8_t> irom;  // at the ROM base
  std::map<std::string, uint32_t> labels;
  sim::MachineConfig mcfg{};
  uint32_t entry = sim::kIromBase;
  std::string hang_label;  // optional parking loop on the clean path
  uint64_t step_cap = 100'000;

  uint32_t addr(const std::string &label) const;
};

Program from_fixture(const fixtures::Fixture &f);

struct TraceEntry {
  uint32_t pc = 0;
  sim::Op op = sim::Op::NOP;
  bool cond_branch = false;
};

// The fault-free dynamic instruction sequence, ending at HALT, at the
// parking loop's first instruction, or at the step cap.
std::vector<TraceEntry> clean_trace(const Program &p);

// One single-fault placement: force `effect` on the trace_index-th
// dynamically executed instruction (everything before runs fault-free,
// so the position is well defined).
struct FaultElement {
  uint64_t trace_index = 0;
  uint32_t pc = 0;
  sim::FaultEffect effect = sim::FaultEffect::NONE;

  friend bool operator==(const FaultElement &a, const FaultElement &b) {
    return a.trace_index == b.trace_index && a.pc == b.pc &&
           a.effect == b.effect;
  }
};

// Replays the program with the one forced fault; true iff execution
// reaches target_label before halting, trapping, parking, or the cap.
bool replay_reaches(const Program &p, uint64_t trace_index,
                    sim::FaultEffect effect, const std::string &target_label);

// Exhaustive single-fault enumeration: SKIP at every dynamic position,
// BRANCH_INVERT at every dynamic conditional branch. Returns exactly the
// placements that reach target_label; deterministic, no randomness.
std::vector<FaultElement> fault_path_oracle(const Program &p,
                                            const std::string &target_label);

// True if the result set contains a placement at the given label with the
// given effect (any dynamic occurrence).
bool contains_site(const std::vector<FaultElement> &set, const Program &p,
                   const std::string &label, sim::FaultEffect effect);

}  // namespace glitchlab::oracle
