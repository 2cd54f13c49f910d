// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "glitchlab/machine.hpp"
#include "glitchlab/rail.hpp"

namespace glitchlab::fixtures {

// Standalone test programs, each a minimal ROM run on a bare machine:
//  ADD_LOOP            repeated addition emitted on UART; any deviation in
//                      the byte stream is visible corruption.
//  SIGCHECK            a signature gate whose failure path hangs; a landed
//                      fault can divert it into the authenticated call.
//  FUSECHECK_POC       the boot ROM's download gate between two GPIO
//                      markers, with few fuse samples for fast sweeps.
//  FUSECHECK_HARDENED  the same decision computed through duplicated fuse
//                      reads and opposite-polarity double checks; no single
//                      skip/invert/corrupt placement opens the gate.
enum class FixtureName { ADD_LOOP, SIGCHECK, FUSECHECK_POC, FUSECHECK_HARDENED };

const char *to_string(FixtureName n);
FixtureName fixture_from_name(const std::string &name);  // throws on unknown

struct Fixture {
  std::string name;
  std::vector<uint8_t> irom;  // assembled at the ROM base
  std::map<std::string, uint32_t> labels;
  uint32_t entry = 0;
  std::string target_label;  // success-for-the-attacker label, if any
  std::string hang_label;    // explicit parking loop, if any
  std::vector<uint8_t> expected_uart;  // fault-free byte stream
  sim::MachState expected_final_state = sim::MachState::HALTED;
  uint64_t step_cap = 20'000;
  sim::MachineConfig mcfg{};  // production-personality defaults

  uint32_t addr(const std::string &label) const;
};

// fuse_samples only affects the two fuse-check fixtures.
Fixture build_fixture(FixtureName n, uint32_t fuse_samples = 8);

struct FixtureResult {
  sim::MachState final_state = sim::MachState::RUNNING;
  bool reached_target = false;  // pc hit target_label at least once
  bool hung = false;            // parked on hang_label, trapped, or capped
  bool corruption = false;      // observable deviation from fault-free run
  bool trapped = false;
  sim::TrapReason trap_reason = sim::TrapReason::NONE;
  std::vector<uint8_t> uart;
  std::vector<sim::GpioEvent> gpio_events;
  sim::FaultEvent fault{};
  uint64_t end_time_ns = 0;
  uint64_t instrs = 0;
};

// Runs the fixture from reset with the pulse timed against reset release.
FixtureResult run_fixture(const Fixture &f,
                          const std::optional<rail::GlitchPulse> &pulse,
                          const rail::RailConfig &rail, uint64_t seed);

FixtureResult run_fixture(FixtureName n,
                          const std::optional<rail::GlitchPulse> &pulse,
                          const rail::RailConfig &rail, uint64_t seed);

// Same, but the pulse offset counts from the fixture's first GPIO edge
// (the marker in front of the critical section) instead of reset release.
// Requires a fixture that emits at least one GPIO event on the clean path.
FixtureResult run_fixture_gpio_triggered(
    const Fixture &f, const std::optional<rail::GlitchPulse> &pulse,
    const rail::RailConfig &rail, uint64_t seed);

}  // namespace glitchlab::fixtures
