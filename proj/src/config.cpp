// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#include "glitchlab/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace glitchlab::config {

using nlohmann::json;

CampaignConfig default_config() {
  CampaignConfig c;
  c.grid.offset_lo_ns = 0;
  c.grid.offset_hi_ns = 4'420'000;  // first-stage window, reset to QSPI probe
  c.grid.offset_step_ns = 20;
  c.grid.lengths_ns = {11'300, 11'320, 11'340};
  c.strategy.kind = search::StrategyKind::NARROWING;
  c.budget.max_attempts = 100'000;
  c.budget.stop_on_success = true;
  return c;
}

namespace {

template <typename T>
void opt(const json &j, const char *key, T &out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_rail(const json &j, rail::RailConfig &r) {
  opt(j, "decoupling_attenuation_ns", r.decoupling_attenuation_ns);
  opt(j, "fault_min_ns", r.fault_min_ns);
  opt(j, "crash_min_ns", r.crash_min_ns);
  opt(j, "detector_enabled", r.detector_enabled);
  if (j.contains("susceptibility")) {
    r.susceptibility.points.clear();
    for (const json &p : j.at("susceptibility")) {
      if (!p.is_array() || p.size() != 2) {
        throw std::invalid_argument("susceptibility points must be [stress_ns, probability] pairs");
      }
      r.susceptibility.points.push_back(
          {p.at(0).get<int64_t>(), p.at(1).get<double>()});
    }
  }
}

json dump_rail(const rail::RailConfig &r) {
  json pts = json::array();
  for (const auto &p : r.susceptibility.points) {
    pts.push_back(json::array({p.stress_ns, p.probability}));
  }
  return json{{"decoupling_attenuation_ns", r.decoupling_attenuation_ns},
              {"fault_min_ns", r.fault_min_ns},
              {"crash_min_ns", r.crash_min_ns},
              {"detector_enabled", r.detector_enabled},
              {"susceptibility", pts}};
}

void parse_rig(const json &j, rig::RigConfig &r) {
  opt(j, "tick_ns", r.tick_ns);
  opt(j, "max_offset_ticks", r.max_offset_ticks);
  opt(j, "max_length_ticks", r.max_length_ticks);
  opt(j, "jitter_enabled", r.jitter_enabled);
  opt(j, "jitter_max_ns", r.jitter_max_ns);
}

json dump_rig(const rig::RigConfig &r) {
  return json{{"tick_ns", r.tick_ns},
              {"max_offset_ticks", r.max_offset_ticks},
              {"max_length_ticks", r.max_length_ticks},
              {"jitter_enabled", r.jitter_enabled},
              {"jitter_max_ns", r.jitter_max_ns}};
}

void parse_image(const json &j, ImageSource &im) {
  opt(j, "bundle_dir", im.bundle_dir);
  if (j.contains("generate")) {
    const json &g = j.at("generate");
    opt(g, "seed", im.generate.seed);
    opt(g, "fuse_samples", im.generate.boot.fuse_samples);
    opt(g, "hardened_fuse_check", im.generate.boot.hardened_fuse_check);
    opt(g, "mb1_plain_bytes", im.generate.mb1_plain_bytes);
    opt(g, "odm_enabled", im.generate.odm_enabled);
    if (g.contains("fek2_select")) {
      const std::string sel = g.at("fek2_select").get<std::string>();
      if (sel == "TESTKEY") im.generate.fek2_select = crypto::Fek2Select::TESTKEY;
      else if (sel == "NVKEY") im.generate.fek2_select = crypto::Fek2Select::NVKEY;
      else throw std::invalid_argument("fek2_select must be TESTKEY or NVKEY");
    }
  }
}

json dump_image(const ImageSource &im) {
  json g{{"seed", im.generate.seed},
         {"fuse_samples", im.generate.boot.fuse_samples},
         {"hardened_fuse_check", im.generate.boot.hardened_fuse_check},
         {"mb1_plain_bytes", im.generate.mb1_plain_bytes},
         {"odm_enabled", im.generate.odm_enabled},
         {"fek2_select",
          im.generate.fek2_select == crypto::Fek2Select::TESTKEY ? "TESTKEY"
                                                                 : "NVKEY"}};
  return json{{"bundle_dir", im.bundle_dir}, {"generate", g}};
}

void parse_grid(const json &j, search::ParamGrid &g) {
  opt(j, "offset_lo_ns", g.offset_lo_ns);
  opt(j, "offset_hi_ns", g.offset_hi_ns);
  opt(j, "offset_step_ns", g.offset_step_ns);
  opt(j, "lengths_ns", g.lengths_ns);
}

json dump_grid(const search::ParamGrid &g) {
  return json{{"offset_lo_ns", g.offset_lo_ns},
              {"offset_hi_ns", g.offset_hi_ns},
              {"offset_step_ns", g.offset_step_ns},
              {"lengths_ns", g.lengths_ns}};
}

void parse_strategy(const json &j, search::Strategy &s) {
  if (j.contains("kind")) {
    s.kind = search::strategy_from_name(j.at("kind").get<std::string>());
  }
  opt(j, "successes_required", s.narrowing.successes_required);
  opt(j, "tolerance_ns", s.narrowing.tolerance_ns);
}

json dump_strategy(const search::Strategy &s) {
  return json{{"kind", search::to_string(s.kind)},
              {"successes_required", s.narrowing.successes_required},
              {"tolerance_ns", s.narrowing.tolerance_ns}};
}

void parse_cost(const json &j, search::CostModel &c) {
  opt(j, "reset_hold_ticks", c.reset_hold_ticks);
  opt(j, "response_margin_ns", c.response_margin_ns);
  opt(j, "crash_extra_ns", c.crash_extra_ns);
}

json dump_cost(const search::CostModel &c) {
  return json{{"reset_hold_ticks", c.reset_hold_ticks},
              {"response_margin_ns", c.response_margin_ns},
              {"crash_extra_ns", c.crash_extra_ns}};
}

void parse_budget(const json &j, search::CampaignBudget &b) {
  opt(j, "max_attempts", b.max_attempts);
  opt(j, "max_sim_time_ns", b.max_sim_time_ns);
  opt(j, "stop_on_success", b.stop_on_success);
}

json dump_budget(const search::CampaignBudget &b) {
  return json{{"max_attempts", b.max_attempts},
              {"max_sim_time_ns", b.max_sim_time_ns},
              {"stop_on_success", b.stop_on_success}};
}

}  // namespace

CampaignConfig parse_config(const std::string &json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error &e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config root must be an object");

  CampaignConfig c = default_config();
  try {
    opt(j, "seed", c.seed);
    opt(j, "workers", c.workers);
    if (j.contains("rail")) parse_rail(j.at("rail"), c.rail);
    if (j.contains("rig")) parse_rig(j.at("rig"), c.rig);
    if (j.contains("image")) parse_image(j.at("image"), c.image);
    if (j.contains("grid")) parse_grid(j.at("grid"), c.grid);
    if (j.contains("strategy")) parse_strategy(j.at("strategy"), c.strategy);
    if (j.contains("cost")) parse_cost(j.at("cost"), c.cost);
    if (j.contains("budget")) parse_budget(j.at("budget"), c.budget);
  } catch (const json::exception &e) {
    throw std::invalid_argument(std::string("config field error: ") + e.what());
  }
  return c;
}

CampaignConfig load_config(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

std::string dump_config(const CampaignConfig &c) {
  json j{{"seed", c.seed},
         {"workers", c.workers},
         {"rail", dump_rail(c.rail)},
         {"rig", dump_rig(c.rig)},
         {"image", dump_image(c.image)},
         {"grid", dump_grid(c.grid)},
         {"strategy", dump_strategy(c.strategy)},
         {"cost", dump_cost(c.cost)},
         {"budget", dump_budget(c.budget)}};
  return j.dump(2) + "\n";
}

void validate(const CampaignConfig &c) {
  c.rail.validate();
  c.rig.validate();
  c.grid.validate(c.rig.tick_ns);
  const int64_t tick = int64_t(c.rig.tick_ns);
  if (c.grid.offset_hi_ns / tick > int64_t(c.rig.max_offset_ticks)) {
    throw std::invalid_argument("grid offsets exceed the pulse generator range");
  }
  for (int64_t l : c.grid.lengths_ns) {
    if (l / tick > int64_t(c.rig.max_length_ticks)) {
      throw std::invalid_argument("grid lengths exceed the pulse generator range");
    }
  }
  if (c.workers < 1 || c.workers > 64) {
    throw std::invalid_argument("workers must be between 1 and 64");
  }
  if (c.strategy.kind == search::StrategyKind::NARROWING) {
    if (c.strategy.narrowing.successes_required == 0) {
      throw std::invalid_argument("narrowing needs at least one success");
    }
    if (c.strategy.narrowing.tolerance_ns < 0) {
      throw std::invalid_argument("narrowing tolerance must be non-negative");
    }
  }
  if (!c.image.bundle_dir.empty()) {
    namespace fs = std::filesystem;
    for (const char *name :
         {"irom.bin", "manifest.json", "mb1.enc", "mb1_plain.bin", "secrets.json"}) {
      const fs::path p = fs::path(c.image.bundle_dir) / name;
      if (!fs::exists(p)) {
        throw std::invalid_argument("bundle file missing: " + p.string());
      }
    }
  } else {
    if (c.image.generate.mb1_plain_bytes == 0 ||
        c.image.generate.mb1_plain_bytes % 16 != 0) {
      throw std::invalid_argument("mb1_plain_bytes must be a positive multiple of 16");
    }
  }
}

}  // namespace glitchlab::config
