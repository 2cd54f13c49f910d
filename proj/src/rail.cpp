// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#include "glitchlab/rail.hpp"

#include <algorithm>

namespace glitchlab::rail {

void SusceptibilityCurve::validate() const {
  if (points.empty()) throw std::invalid_argument("susceptibility: no points");
  for (size_t i = 0; i < points.size(); i++) {
    const auto &p = points[i];
    if (p.probability < 0.0 || p.probability > 1.0)
      throw std::invalid_argument("susceptibility: probability outside [0,1]");
    if (i > 0) {
      if (points[i - 1].stress_ns >= p.stress_ns)
        throw std::invalid_argument("susceptibility: stress not increasing");
      if (points[i - 1].probability > p.probability)
        throw std::invalid_argument("susceptibility: probability decreasing");
    }
  }
}

double SusceptibilityCurve::eval(int64_t stress_ns) const {
  if (points.empty()) return 0.0;
  if (stress_ns <= points.front().stress_ns) return points.front().probability;
  if (stress_ns >= points.back().stress_ns) return points.back().probability;
  for (size_t i = 1; i < points.size(); i++) {
    if (stress_ns <= points[i].stress_ns) {
      const auto &a = points[i - 1];
      const auto &b = points[i];
      double t = double(stress_ns - a.stress_ns) / double(b.stress_ns - a.stress_ns);
      return a.probability + t * (b.probability - a.probability);
    }
  }
  return points.back().probability;
}

void RailConfig::validate() const {
  if (decoupling_attenuation_ns < 0)
    throw std::invalid_argument("rail: negative attenuation");
  if (fault_min_ns < 0 || crash_min_ns <= fault_min_ns)
    throw std::invalid_argument("rail: need 0 <= fault_min < crash_min");
  susceptibility.validate();
}

double RailConfig::fault_probability(int64_t stress_ns) const {
  if (stress_ns < fault_min_ns) return 0.0;
  return susceptibility.eval(stress_ns);
}

const char *to_string(RailRegime r) {
  switch (r) {
    case RailRegime::NONE: return "NONE";
    case RailRegime::FAULT_WINDOW: return "FAULT_WINDOW";
    case RailRegime::CRASH: return "CRASH";
    case RailRegime::DETECTED: return "DETECTED";
  }
  return "?";
}

int64_t effective_stress_ns(const GlitchPulse &pulse, const RailConfig &rail) {
  return std::max<int64_t>(0, pulse.length_ns - rail.decoupling_attenuation_ns);
}

RailOutcome resolve_rail(const GlitchPulse &pulse, const RailConfig &rail,
                         int64_t trigger_time_ns) {
  RailOutcome out;
  out.window_start_ns = trigger_time_ns + pulse.offset_ns;
  out.window_end_ns = out.window_start_ns + pulse.length_ns;
  int64_t stress = effective_stress_ns(pulse, rail);
  if (stress <= 0) {
    out.kind = RailRegime::NONE;
    return out;
  }
  if (rail.detector_enabled) {
    out.kind = RailRegime::DETECTED;
    return out;
  }
  if (stress >= rail.crash_min_ns) {
    out.kind = RailRegime::CRASH;
    return out;
  }
  if (stress >= rail.fault_min_ns) {
    out.kind = RailRegime::FAULT_WINDOW;
    out.fault_probability = rail.fault_probability(stress);
    return out;
  }
  out.kind = RailRegime::NONE;
  return out;
}

}  // namespace glitchlab::rail
