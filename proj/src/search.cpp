// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#include "glitchlab/search.hpp"

#include <algorithm>
#include <cstdio>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

#include "glitchlab/rng.hpp"
#include "json.hpp"

namespace glitchlab::search {

using nlohmann::json;

// ------------------------------------------------------------------ grid --

void ParamGrid::validate(uint32_t tick_ns) const {
  if (offset_step_ns <= 0) throw std::invalid_argument("offset step must be positive");
  if (offset_lo_ns < 0) throw std::invalid_argument("offset range must be non-negative");
  if (offset_hi_ns < offset_lo_ns) throw std::invalid_argument("offset range is empty");
  if (lengths_ns.empty()) throw std::invalid_argument("length list is empty");
  const int64_t tick = int64_t(tick_ns);
  if (tick <= 0) throw std::invalid_argument("tick must be positive");
  auto aligned = [&](int64_t v) { return v % tick == 0; };
  if (!aligned(offset_lo_ns) || !aligned(offset_step_ns) ||
      !aligned(offset_hi_ns - offset_lo_ns)) {
    throw std::invalid_argument("offset grid not aligned to the rig tick");
  }
  for (int64_t l : lengths_ns) {
    if (l <= 0 || !aligned(l)) {
      throw std::invalid_argument("pulse length not aligned to the rig tick");
    }
  }
}

uint64_t ParamGrid::num_offsets() const {
  if (offset_hi_ns < offset_lo_ns || offset_step_ns <= 0) return 0;
  return uint64_t((offset_hi_ns - offset_lo_ns) / offset_step_ns) + 1;
}

uint64_t ParamGrid::size() const { return num_offsets() * lengths_ns.size(); }

rail::GlitchPulse ParamGrid::at(uint64_t flat_index) const {
  const uint64_t nl = lengths_ns.size();
  if (nl == 0 || flat_index >= size()) throw std::out_of_range("grid index out of range");
  const uint64_t oi = flat_index / nl;
  const uint64_t li = flat_index % nl;
  return rail::GlitchPulse{offset_lo_ns + int64_t(oi) * offset_step_ns,
                           lengths_ns[li]};
}

bool ParamGrid::contains(const rail::GlitchPulse &p) const {
  if (p.offset_ns < offset_lo_ns || p.offset_ns > offset_hi_ns) return false;
  if ((p.offset_ns - offset_lo_ns) % offset_step_ns != 0) return false;
  return std::find(lengths_ns.begin(), lengths_ns.end(), p.length_ns) !=
         lengths_ns.end();
}

// ------------------------------------------------------------- estimator --

Estimate estimate_full_pass(uint64_t window_ns, uint64_t step_ns,
                            uint64_t lengths_count) {
  if (step_ns == 0) throw std::invalid_argument("step must be positive");
  Estimate e;
  e.num_offsets = window_ns / step_ns;
  e.avg_attempt_ns = window_ns / 2;
  e.total_duration_ns = e.num_offsets * e.avg_attempt_ns * lengths_count;
  return e;
}

// -------------------------------------------------------------- strategy --

const char *to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::EXHAUSTIVE: return "EXHAUSTIVE";
    case StrategyKind::RANDOM: return "RANDOM";
    case StrategyKind::NARROWING: return "NARROWING";
  }
  return "?";
}

StrategyKind strategy_from_name(const std::string &name) {
  if (name == "EXHAUSTIVE") return StrategyKind::EXHAUSTIVE;
  if (name == "RANDOM") return StrategyKind::RANDOM;
  if (name == "NARROWING") return StrategyKind::NARROWING;
  throw std::invalid_argument("unknown strategy: " + name);
}

PulseSampler::PulseSampler(const ParamGrid &grid, const Strategy &strategy,
                           uint64_t seed)
    : original_(grid), grid_(grid), strat_(strategy), seed_(seed) {
  rebuild_permutation();
}

void PulseSampler::rebuild_permutation() {
  if (strat_.kind == StrategyKind::EXHAUSTIVE) return;  // flat order, no perm
  const uint64_t n = grid_.size();
  perm_.resize(n);
  for (uint64_t i = 0; i < n; ++i) perm_[i] = i;
  Rng rng(derive_seed(derive_seed(seed_, 0xA11CE), epoch_));
  for (uint64_t i = n; i > 1; --i) {
    const uint64_t j = rng.below(i);
    std::swap(perm_[i - 1], perm_[j]);
  }
}

rail::GlitchPulse PulseSampler::next() {
  if (strat_.kind == StrategyKind::EXHAUSTIVE) {
    if (pos_ >= grid_.size()) throw GridExhausted();
    return grid_.at(pos_++);
  }
  if (pos_ >= perm_.size()) {  // full pass done: reshuffle, keep going
    ++epoch_;
    pos_ = 0;
    rebuild_permutation();
  }
  return grid_.at(perm_[pos_++]);
}

void PulseSampler::note_success(const rail::GlitchPulse &p) {
  succ_offsets_.push_back(p.offset_ns);
  succ_lengths_.push_back(p.length_ns);
  maybe_narrow();
}

void PulseSampler::maybe_narrow() {
  if (strat_.kind != StrategyKind::NARROWING || narrowed_) return;
  if (succ_offsets_.size() < strat_.narrowing.successes_required) return;

  const auto [mn, mx] =
      std::minmax_element(succ_offsets_.begin(), succ_offsets_.end());
  const int64_t step = original_.offset_step_ns;
  int64_t lo = *mn - strat_.narrowing.tolerance_ns;
  int64_t hi = *mx + strat_.narrowing.tolerance_ns;
  // Clamp to the original grid and keep its point lattice.
  lo = std::max(lo, original_.offset_lo_ns);
  hi = std::min(hi, original_.offset_hi_ns);
  int64_t rel = lo - original_.offset_lo_ns;
  lo = original_.offset_lo_ns + ((rel + step - 1) / step) * step;
  rel = hi - original_.offset_lo_ns;
  hi = original_.offset_lo_ns + (rel / step) * step;

  std::set<int64_t> lens(succ_lengths_.begin(), succ_lengths_.end());

  ParamGrid g;
  g.offset_lo_ns = lo;
  g.offset_hi_ns = hi;
  g.offset_step_ns = step;
  g.lengths_ns.assign(lens.begin(), lens.end());
  grid_ = g;
  narrowed_ = true;
  ++epoch_;
  pos_ = 0;
  rebuild_permutation();
}

std::string PulseSampler::state_json() const {
  json j;
  j["epoch"] = epoch_;
  j["pos"] = pos_;
  j["narrowed"] = narrowed_;
  j["succ_offsets"] = succ_offsets_;
  j["succ_lengths"] = succ_lengths_;
  j["grid"] = {{"offset_lo_ns", grid_.offset_lo_ns},
               {"offset_hi_ns", grid_.offset_hi_ns},
               {"offset_step_ns", grid_.offset_step_ns},
               {"lengths_ns", grid_.lengths_ns}};
  return j.dump();
}

void PulseSampler::restore_json(const std::string &s) {
  const json j = json::parse(s);
  epoch_ = j.at("epoch").get<uint64_t>();
  pos_ = j.at("pos").get<uint64_t>();
  narrowed_ = j.at("narrowed").get<bool>();
  succ_offsets_ = j.at("succ_offsets").get<std::vector<int64_t>>();
  succ_lengths_ = j.at("succ_lengths").get<std::vector<int64_t>>();
  const json &g = j.at("grid");
  grid_.offset_lo_ns = g.at("offset_lo_ns").get<int64_t>();
  grid_.offset_hi_ns = g.at("offset_hi_ns").get<int64_t>();
  grid_.offset_step_ns = g.at("offset_step_ns").get<int64_t>();
  grid_.lengths_ns = g.at("lengths_ns").get<std::vector<int64_t>>();
  rebuild_permutation();
}

// -------------------------------------------------------------- campaign --

const char *to_string(AttemptClass c) {
  switch (c) {
    case AttemptClass::SUCCESS: return "SUCCESS";
    case AttemptClass::NORMAL: return "NORMAL";
    case AttemptClass::CRASH: return "CRASH";
    case AttemptClass::DETECTED: return "DETECTED";
    case AttemptClass::HANG: return "HANG";
  }
  return "?";
}

std::string attempt_jsonl_line(const AttemptRecord &r) {
  std::ostringstream os;
  os << "{\"index\":" << r.index << ",\"offset_ns\":" << r.offset_ns
     << ",\"length_ns\":" << r.length_ns << ",\"outcome\":\"" << r.outcome
     << "\",\"sim_time\":" << r.sim_time_ns << "}";
  return os.str();
}

namespace {

constexpr uint64_t kRoundSize = 64;

struct CampaignState {
  uint64_t next_index = 0;
  int64_t narrow_from_index = -1;  // first draw index under the narrowed grid
  CampaignStats stats;
};

json stats_to_json(const CampaignStats &s) {
  json j;
  j["attempts"] = s.attempts;
  j["successes"] = s.successes;
  j["crashes"] = s.crashes;
  j["normals"] = s.normals;
  j["detects"] = s.detects;
  j["hangs"] = s.hangs;
  j["total_sim_time_ns"] = s.total_sim_time_ns;
  j["time_to_first_success_ns"] = s.time_to_first_success_ns;
  j["narrowed"] = s.narrowed;
  j["pre_narrow_attempts"] = s.pre_narrow_attempts;
  j["pre_narrow_successes"] = s.pre_narrow_successes;
  j["post_narrow_attempts"] = s.post_narrow_attempts;
  j["post_narrow_successes"] = s.post_narrow_successes;
  j["grid_exhausted"] = s.grid_exhausted;
  return j;
}

void stats_from_json(const json &j, CampaignStats &s) {
  s.attempts = j.at("attempts").get<uint64_t>();
  s.successes = j.at("successes").get<uint64_t>();
  s.crashes = j.at("crashes").get<uint64_t>();
  s.normals = j.at("normals").get<uint64_t>();
  s.detects = j.at("detects").get<uint64_t>();
  s.hangs = j.at("hangs").get<uint64_t>();
  s.total_sim_time_ns = j.at("total_sim_time_ns").get<uint64_t>();
  s.time_to_first_success_ns = j.at("time_to_first_success_ns").get<int64_t>();
  s.narrowed = j.at("narrowed").get<bool>();
  s.pre_narrow_attempts = j.at("pre_narrow_attempts").get<uint64_t>();
  s.pre_narrow_successes = j.at("pre_narrow_successes").get<uint64_t>();
  s.post_narrow_attempts = j.at("post_narrow_attempts").get<uint64_t>();
  s.post_narrow_successes = j.at("post_narrow_successes").get<uint64_t>();
  s.grid_exhausted = j.at("grid_exhausted").get<bool>();
}

std::string make_checkpoint(const CampaignState &st, const PulseSampler &sampler) {
  json j;
  j["version"] = 1;
  j["next_index"] = st.next_index;
  j["narrow_from_index"] = st.narrow_from_index;
  j["stats"] = stats_to_json(st.stats);
  j["sampler"] = json::parse(sampler.state_json());
  return j.dump();
}

void finalize(CampaignStats &s) {
  s.success_rate = s.attempts ? double(s.successes) / double(s.attempts) : 0.0;
  s.attempts_per_simulated_second =
      s.total_sim_time_ns
          ? double(s.attempts) / (double(s.total_sim_time_ns) * 1e-9)
          : 0.0;
}

}  // namespace

CampaignResult run_campaign(const CampaignParams &params,
                            const AttemptRunner &runner,
                            const CampaignHooks *hooks,
                            const std::string &resume_checkpoint) {
  rig::RigConfig rig_cfg = params.rig;
  rig_cfg.validate();
  if (rig_cfg.transcript_limit == SIZE_MAX) rig_cfg.transcript_limit = 256;
  params.grid.validate(rig_cfg.tick_ns);
  const int64_t tick = int64_t(rig_cfg.tick_ns);
  if (params.grid.offset_hi_ns / tick > int64_t(rig_cfg.max_offset_ticks)) {
    throw std::invalid_argument("grid offsets exceed the pulse generator range");
  }
  for (int64_t l : params.grid.lengths_ns) {
    if (l / tick > int64_t(rig_cfg.max_length_ticks)) {
      throw std::invalid_argument("grid lengths exceed the pulse generator range");
    }
  }
  const int workers = std::max(1, params.workers);

  PulseSampler sampler(params.grid, params.strategy, params.seed);
  CampaignState st;
  if (!resume_checkpoint.empty()) {
    const json j = json::parse(resume_checkpoint);
    st.next_index = j.at("next_index").get<uint64_t>();
    st.narrow_from_index = j.at("narrow_from_index").get<int64_t>();
    stats_from_json(j.at("stats"), st.stats);
    sampler.restore_json(j.at("sampler").dump());
  }

  // One pulse generator per worker; worker w serves global indices with
  // index % workers == w, so the per-rig jitter streams do not depend on
  // when rounds are cut. On resume, replay each rig's jitter draws.
  std::vector<std::unique_ptr<rig::EmulatedRig>> rigs;
  rigs.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    rigs.push_back(std::make_unique<rig::EmulatedRig>(
        rig_cfg, derive_seed(params.seed, 0x51D0 + uint64_t(w))));
    if (st.next_index > 0) {
      const uint64_t done = st.next_index;
      const uint64_t fired =
          done / uint64_t(workers) +
          (done % uint64_t(workers) > uint64_t(w) ? 1 : 0);
      rigs.back()->skip_jitter_draws(fired);
    }
  }

  CampaignResult res;
  res.stats = st.stats;

  const uint64_t hold_ns = uint64_t(params.cost.reset_hold_ticks) * rig_cfg.tick_ns;

  struct Slot {
    rail::GlitchPulse drawn{};
    int64_t delivered_offset = 0;
    uint64_t seed = 0;
    int worker = 0;
    AttemptOutcome out;
  };

  bool done = false;
  uint64_t since_checkpoint = 0;
  while (!done) {
    // ----- draw one round -------------------------------------------------
    uint64_t want = kRoundSize;
    if (params.budget.max_attempts > 0) {
      const uint64_t left = params.budget.max_attempts - st.stats.attempts;
      if (left == 0) break;
      want = std::min(want, left);
    }
    std::vector<Slot> slots;
    slots.reserve(want);
    bool exhausted = false;
    for (uint64_t k = 0; k < want; ++k) {
      Slot s;
      try {
        s.drawn = sampler.next();
      } catch (const GridExhausted &) {
        exhausted = true;
        break;
      }
      const uint64_t gi = st.next_index + k;
      s.seed = derive_seed(params.seed, gi);
      s.worker = int(gi % uint64_t(workers));
      slots.push_back(s);
    }
    if (sampler.narrowed() && st.narrow_from_index < 0) {
      // narrowing happened during the previous commit; draws from here on
      // come from the narrowed grid
      st.narrow_from_index = int64_t(st.next_index);
    }
    if (slots.empty()) {
      if (exhausted) st.stats.grid_exhausted = true;
      break;
    }

    // ----- fire the rig and run the target, per worker --------------------
    auto run_worker = [&](int w) {
      rig::EmulatedRig &rg = *rigs[size_t(w)];
      for (size_t i = 0; i < slots.size(); ++i) {
        Slot &s = slots[i];
        if (s.worker != w) continue;
        rg.set_pulse(uint32_t(s.drawn.offset_ns / tick),
                     uint32_t(s.drawn.length_ns / tick));
        rg.arm();
        rg.reset_and_trigger(params.cost.reset_hold_ticks);
        s.delivered_offset = s.drawn.offset_ns - int64_t(rg.last_jitter_ns());
        const rail::GlitchPulse delivered{s.delivered_offset, s.drawn.length_ns};
        s.out = runner(delivered, s.seed);
        rg.advance_ns(s.out.end_time_ns + params.cost.response_margin_ns);
      }
    };
    if (workers == 1) {
      run_worker(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(size_t(workers) - 1);
      for (int w = 1; w < workers; ++w) pool.emplace_back(run_worker, w);
      run_worker(0);
      for (auto &t : pool) t.join();
    }

    // ----- commit in index order ------------------------------------------
    for (size_t i = 0; i < slots.size() && !done; ++i) {
      Slot &s = slots[i];
      const uint64_t gi = st.next_index + i;

      AttemptRecord rec;
      rec.index = gi;
      rec.offset_ns = s.drawn.offset_ns;
      rec.length_ns = s.drawn.length_ns;
      rec.outcome = s.out.label;
      rec.cls = s.out.cls;
      rec.delivered_offset_ns = s.delivered_offset;
      rec.seed = s.seed;
      rec.worker = s.worker;

      uint64_t cost = hold_ns + params.cost.response_margin_ns;
      const uint64_t pulse_done =
          uint64_t(std::max<int64_t>(0, s.drawn.offset_ns + s.drawn.length_ns));
      cost += std::max(s.out.end_time_ns, pulse_done);
      if (s.out.cls == AttemptClass::CRASH) cost += params.cost.crash_extra_ns;
      rec.sim_time_ns = cost;

      st.stats.attempts += 1;
      st.stats.total_sim_time_ns += cost;
      const bool post = st.narrow_from_index >= 0 &&
                        gi >= uint64_t(st.narrow_from_index);
      if (post) st.stats.post_narrow_attempts += 1;
      else st.stats.pre_narrow_attempts += 1;

      switch (s.out.cls) {
        case AttemptClass::SUCCESS: st.stats.successes += 1; break;
        case AttemptClass::NORMAL: st.stats.normals += 1; break;
        case AttemptClass::CRASH: st.stats.crashes += 1; break;
        case AttemptClass::DETECTED: st.stats.detects += 1; break;
        case AttemptClass::HANG: st.stats.hangs += 1; break;
      }
      if (s.out.cls == AttemptClass::SUCCESS) {
        if (post) st.stats.post_narrow_successes += 1;
        else st.stats.pre_narrow_successes += 1;
        if (st.stats.time_to_first_success_ns < 0) {
          st.stats.time_to_first_success_ns = int64_t(st.stats.total_sim_time_ns);
        }
        sampler.note_success(s.drawn);
        if (!res.first_success) res.first_success = rec;
      }

      if (hooks && hooks->on_attempt) hooks->on_attempt(rec);
      if (params.retain_log) res.attempts.push_back(rec);
      ++since_checkpoint;

      if (params.budget.stop_on_success && s.out.cls == AttemptClass::SUCCESS) {
        done = true;
      }
      if (params.budget.max_sim_time_ns > 0 &&
          st.stats.total_sim_time_ns >= params.budget.max_sim_time_ns) {
        done = true;
      }
    }
    st.next_index += slots.size();
    if (sampler.narrowed()) st.stats.narrowed = true;
    if (exhausted) {
      st.stats.grid_exhausted = true;
      done = true;
    }
    if (params.budget.max_attempts > 0 &&
        st.stats.attempts >= params.budget.max_attempts) {
      done = true;
    }

    if (hooks && hooks->on_checkpoint && hooks->checkpoint_every > 0 &&
        since_checkpoint >= hooks->checkpoint_every && !done) {
      hooks->on_checkpoint(make_checkpoint(st, sampler));
      since_checkpoint = 0;
    }
  }

  finalize(st.stats);
  res.stats = st.stats;
  res.final_grid = sampler.active_grid();
  res.checkpoint = make_checkpoint(st, sampler);
  if (hooks && hooks->on_checkpoint) hooks->on_checkpoint(res.checkpoint);
  return res;
}

}  // namespace glitchlab::search
