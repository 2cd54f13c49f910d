// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "glitchlab/gen.hpp"
#include "glitchlab/rail.hpp"
#include "glitchlab/rig.hpp"
#include "glitchlab/search.hpp"

namespace glitchlab::config {

// Where the device under attack comes from: a bundle directory written by
// the generator, or inline generation parameters.
struct ImageSource {
  std::string bundle_dir;       // non-empty: load from disk
  gen::DeviceParams generate{}; // used when bundle_dir is empty
};

struct CampaignConfig {
  rail::RailConfig rail{};
  rig::RigConfig rig{};
  ImageSource image{};
  search::ParamGrid grid{};
  search::Strategy strategy{};
  search::CostModel cost{};
  search::CampaignBudget budget{};
  uint64_t seed = 1;
  int workers = 1;
};

// Stock attack setup: full-window grid over the first-stage boot, the
// production pulse lengths, narrowing strategy, jitter off.
CampaignConfig default_config();

CampaignConfig parse_config(const std::string &json_text);
CampaignConfig load_config(const std::string &path);
std::string dump_config(const CampaignConfig &c);  // round-trippable

// Structural checks: grid alignment and pulse-generator range, strategy
// parameters, bundle files present when a bundle is referenced.
// Throws std::invalid_argument with a readable message.
void validate(const CampaignConfig &c);

}  // namespace glitchlab::config
