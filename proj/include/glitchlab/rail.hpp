// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace glitchlab::rail {

// A crowbar pulse relative to the trigger (reset release).
// Both values are nanoseconds and must be multiples of the rig tick.
struct GlitchPulse {
  int64_t offset_ns = 0;
  int64_t length_ns = 0;
};

// Piecewise-linear map from effective stress (ns) to fault probability.
// Points must be strictly increasing in stress and non-decreasing in
// probability. Below the first point the curve clamps to the first
// probability, above the last to the last one; the fault threshold cut
// to zero is applied by RailConfig, not here.
struct SusceptibilityCurve {
  struct Point {
    int64_t stress_ns;
    double probability;
  };
  std::vector<Point> points;

  void validate() const;
  double eval(int64_t stress_ns) const;
};

struct RailConfig {
  int64_t decoupling_attenuation_ns = 0;
  int64_t fault_min_ns = 10000;   // below this nothing observable happens
  int64_t crash_min_ns = 13000;   // at or above this the core stops
  SusceptibilityCurve susceptibility{{{10000, 0.0}, {11300, 0.9}}};
  bool detector_enabled = false;

  void validate() const;
  // 0 for stress below fault_min_ns, the curve value otherwise.
  double fault_probability(int64_t stress_ns) const;
};

enum class RailRegime { NONE, FAULT_WINDOW, CRASH, DETECTED };

const char *to_string(RailRegime r);

// Resolved effect of one pulse against one rail configuration.
// stress_window is only meaningful for FAULT_WINDOW; for CRASH/DETECTED
// the shutdown takes effect at window_start_ns.
struct RailOutcome {
  RailRegime kind = RailRegime::NONE;
  int64_t window_start_ns = 0;  // trigger_time + offset
  int64_t window_end_ns = 0;    // window_start + length
  double fault_probability = 0.0;
};

// Stress that survives the board's decoupling. Never negative.
int64_t effective_stress_ns(const GlitchPulse &pulse, const RailConfig &rail);

// Pure: same inputs, same outcome. The detector, when enabled, wins over
// both FAULT_WINDOW and CRASH; a fully absorbed pulse is NONE even with
// the detector on.
RailOutcome resolve_rail(const GlitchPulse &pulse, const RailConfig &rail,
                         int64_t trigger_time_ns);

}  // namespace glitchlab::rail
