// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "glitchlab/rail.hpp"
#include "glitchlab/rig.hpp"

namespace glitchlab::search {

// ------------------------------------------------------------------ grid --

// Inclusive offset range with a fixed step, crossed with an explicit
// length list. Flat indexing is offset-major: index = o * |lengths| + l.
struct ParamGrid {
  int64_t offset_lo_ns = 0;
  int64_t offset_hi_ns = 0;
  int64_t offset_step_ns = 20;
  std::vector<int64_t> lengths_ns;

  void validate(uint32_t tick_ns) const;
  uint64_t num_offsets() const;
  uint64_t size() const;  // num_offsets() * lengths_ns.size()
  rail::GlitchPulse at(uint64_t flat_index) const;
  bool contains(const rail::GlitchPulse &p) const;
};

// ------------------------------------------------------------- estimator --

// Full-pass arithmetic for a window of offsets tried back to back: each
// attempt costs the offset itself on average (window/2), so
// total = (window/step) * (window/2) * lengths_count.
struct Estimate {
  uint64_t num_offsets = 0;
  uint64_t avg_attempt_ns = 0;
  uint64_t total_duration_ns = 0;

  double total_seconds() const { return double(total_duration_ns) * 1e-9; }
  double total_minutes() const { return total_seconds() / 60.0; }
  double total_days() const { return total_seconds() / 86400.0; }
};

Estimate estimate_full_pass(uint64_t window_ns, uint64_t step_ns,
                            uint64_t lengths_count);  // throws on step 0

// -------------------------------------------------------------- strategy --

enum class StrategyKind { EXHAUSTIVE, RANDOM, NARROWING };
const char *to_string(StrategyKind k);
StrategyKind strategy_from_name(const std::string &name);

struct NarrowingParams {
  uint32_t successes_required = 10;
  int64_t tolerance_ns = 25'000;  // per side: a 50 us total window
};

struct Strategy {
  StrategyKind kind = StrategyKind::RANDOM;
  NarrowingParams narrowing{};
};

struct GridExhausted : std::runtime_error {
  GridExhausted() : std::runtime_error("exhaustive grid fully visited") {}
};

// Draw stream over the grid. EXHAUSTIVE iterates flat indices in order and
// throws GridExhausted at the end. RANDOM walks a seeded permutation
// (without replacement) and reshuffles after a full pass. NARROWING is
// RANDOM until enough successes are recorded, then shrinks the offsets to
// [min_success - tol, max_success + tol] (clamped to the original grid)
// and the lengths to the distinct successful ones.
class PulseSampler {
 public:
  PulseSampler(const ParamGrid &grid, const Strategy &strategy,
               uint64_t seed);

  rail::GlitchPulse next();
  void note_success(const rail::GlitchPulse &p);

  bool narrowed() const { return narrowed_; }
  const ParamGrid &active_grid() const { return grid_; }
  const ParamGrid &original_grid() const { return original_; }

  // Checkpoint support: serializable state, excluding the grids' identity
  // (the caller re-creates the sampler from the same campaign config).
  std::string state_json() const;
  void restore_json(const std::string &s);

 private:
  void rebuild_permutation();
  void maybe_narrow();

  ParamGrid original_;
  ParamGrid grid_;
  Strategy strat_;
  uint64_t seed_ = 0;
  uint64_t epoch_ = 0;
  uint64_t pos_ = 0;
  std::vector<uint64_t> perm_;
  std::vector<int64_t> succ_offsets_;
  std::vector<int64_t> succ_lengths_;
  bool narrowed_ = false;
};

// -------------------------------------------------------------- campaign --

enum class AttemptClass { SUCCESS, NORMAL, CRASH, DETECTED, HANG };
const char *to_string(AttemptClass c);

// One target run, classified. `label` is the outcome string logged to
// JSONL (boot-result vocabulary for boot campaigns). `end_time_ns` is the
// simulated instant, relative to reset release, when the outcome was
// known; the campaign adds it into the attempt cost.
struct AttemptOutcome {
  AttemptClass cls = AttemptClass::HANG;
  std::string label;
  uint64_t end_time_ns = 0;
};

// Pure function of (delivered pulse, attempt seed); must be thread-safe.
using AttemptRunner =
    std::function<AttemptOutcome(const rail::GlitchPulse &, uint64_t)>;

struct CostModel {
  uint32_t reset_hold_ticks = 50;       // 1 us at the default tick
  uint64_t response_margin_ns = 50'000; // prompt-or-not decision window
  uint64_t crash_extra_ns = 0;          // extra recovery after a crash
};

struct CampaignBudget {
  uint64_t max_attempts = 0;     // 0 = unbounded
  uint64_t max_sim_time_ns = 0;  // 0 = unbounded
  bool stop_on_success = true;
};

struct CampaignParams {
  ParamGrid grid;
  Strategy strategy;
  rig::RigConfig rig{};
  CostModel cost{};
  CampaignBudget budget{};
  uint64_t seed = 1;
  int workers = 1;
  bool retain_log = true;  // keep all attempt records in the result
};

struct AttemptRecord {
  uint64_t index = 0;
  int64_t offset_ns = 0;   // as drawn from the grid
  int64_t length_ns = 0;
  std::string outcome;
  uint64_t sim_time_ns = 0;  // full attempt cost
  // not part of the JSONL record:
  AttemptClass cls = AttemptClass::HANG;
  int64_t delivered_offset_ns = 0;  // after trigger jitter
  uint64_t seed = 0;
  int worker = 0;
};

// The five JSONL keys, in stable order.
std::string attempt_jsonl_line(const AttemptRecord &r);

struct CampaignStats {
  uint64_t attempts = 0;
  uint64_t successes = 0;
  uint64_t crashes = 0;
  uint64_t normals = 0;
  uint64_t detects = 0;
  uint64_t hangs = 0;
  double success_rate = 0.0;  // successes / attempts
  uint64_t total_sim_time_ns = 0;
  int64_t time_to_first_success_ns = -1;  // cumulative sim time; -1 = none
  double attempts_per_simulated_second = 0.0;
  // narrowing phases (draw-indexed)
  bool narrowed = false;
  uint64_t pre_narrow_attempts = 0;
  uint64_t pre_narrow_successes = 0;
  uint64_t post_narrow_attempts = 0;
  uint64_t post_narrow_successes = 0;
  bool grid_exhausted = false;
};

struct CampaignHooks {
  std::function<void(const AttemptRecord &)> on_attempt;  // in index order
  std::function<void(const std::string &)> on_checkpoint; // JSON snapshot
  uint64_t checkpoint_every = 0;  // attempts (rounded up to round size)
};

struct CampaignResult {
  CampaignStats stats;
  std::vector<AttemptRecord> attempts;  // empty when !retain_log
  std::optional<AttemptRecord> first_success;
  ParamGrid final_grid;
  std::string checkpoint;  // final state, resumable
};

// Runs the campaign loop: draw pulse, drive the rig wire protocol, run
// the target, classify, log. Deterministic for a fixed (params, runner):
// attempts are drawn in rounds so worker count never changes the draw
// stream, and per-attempt seeds derive from (seed, global index).
// `resume_checkpoint` (from a previous result or hook) continues a run.
CampaignResult run_campaign(const CampaignParams &params,
                            const AttemptRunner &runner,
                            const CampaignHooks *hooks = nullptr,
                            const std::string &resume_checkpoint = "");

}  // namespace glitchlab::search
