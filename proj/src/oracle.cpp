// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#include "glitchlab/oracle.hpp"

#include <stdexcept>

#include "glitchlab/isa.hpp"

namespace glitchlab::oracle {

using sim::FaultEffect;
using sim::Machine;
using sim::MachState;

uint32_t Program::addr(const std::string &label) const {
  auto it = labels.find(label);
  if (it == labels.end()) {
    throw std::invalid_argument("unknown program label: " + label);
  }
  return it->second;
}

Program from_fixture(const fixtures::Fixture &f) {
  Program p;
  p.irom = f.irom;
  p.labels = f.labels;
  p.mcfg = f.mcfg;
  p.entry = f.entry;
  p.hang_label = f.hang_label;
  p.step_cap = f.step_cap;
  return p;
}

namespace {

Machine fresh_machine(const Program &p) {
  Machine m(p.mcfg);
  m.load_irom(p.irom);
  m.release_reset(p.entry);
  return m;
}

}  // namespace

std::vector<TraceEntry> clean_trace(const Program &p) {
  Machine m = fresh_machine(p);
  uint32_t hang = p.hang_label.empty() ? 0 : p.addr(p.hang_label);
  std::vector<TraceEntry> trace;
  while (m.state == MachState::RUNNING && !m.trapped &&
         m.instr_count < p.step_cap) {
    uint32_t pc = m.regs[sim::PC];
    if (pc < sim::kIromBase || pc + sim::kInstrBytes > sim::kIromBase + p.irom.size()) {
      break;  // clean path left the ROM: nothing more to enumerate
    }
    sim::Instr ins = sim::decode(&p.irom[pc - sim::kIromBase]);
    trace.push_back({pc, ins.op,
                     sim::classify(ins) == sim::InstrClass::COND_BRANCH});
    bool parked = (hang != 0 && pc == hang);
    m.step(nullptr, nullptr);
    if (parked) break;  // one entry for the parking instruction, then stop
  }
  return trace;
}

bool replay_reaches(const Program &p, uint64_t trace_index,
                    sim::FaultEffect effect,
                    const std::string &target_label) {
  Machine m = fresh_machine(p);
  uint32_t target = p.addr(target_label);
  uint32_t hang = p.hang_label.empty() ? 0 : p.addr(p.hang_label);
  uint64_t idx = 0;
  while (m.state == MachState::RUNNING && !m.trapped &&
         m.instr_count < p.step_cap) {
    uint32_t pc = m.regs[sim::PC];
    if (pc == target) return true;
    if (hang != 0 && pc == hang && idx > trace_index) return false;
    if (idx == trace_index) {
      m.step_forced(effect, nullptr);
    } else {
      m.step(nullptr, nullptr);
    }
    ++idx;
  }
  return m.regs[sim::PC] == target;
}

std::vector<FaultElement> fault_path_oracle(const Program &p,
                                            const std::string &target_label) {
  std::vector<TraceEntry> trace = clean_trace(p);
  std::vector<FaultElement> hits;
  for (uint64_t i = 0; i < trace.size(); ++i) {
    if (replay_reaches(p, i, FaultEffect::SKIP, target_label)) {
      hits.push_back({i, trace[i].pc, FaultEffect::SKIP});
    }
    if (trace[i].cond_branch &&
        replay_reaches(p, i, FaultEffect::BRANCH_INVERT, target_label)) {
      hits.push_back({i, trace[i].pc, FaultEffect::BRANCH_INVERT});
    }
  }
  return hits;
}

bool contains_site(const std::vector<FaultElement> &set, const Program &p,
                   const std::string &label, sim::FaultEffect effect) {
  uint32_t addr = p.addr(label);
  for (const FaultElement &e : set) {
    if (e.pc == addr && e.effect == effect) return true;
  }
  return false;
}

}  // namespace glitchlab::oracle
