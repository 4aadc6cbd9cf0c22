#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "safedrive/episode.hpp"
#include "safedrive/losses.hpp"

namespace safedrive::cli {

// Configuration document: JSON file merged with --set key=value overrides,
// every episode knob addressable by a dotted key (e.g. safety.v_max=5).
// Unknown keys are rejected.
struct RunSettings {
  sim::EpisodeConfig episode;
  loss::LossWeights loss_weights;
};

// Parses "a.b.c=value" and merges it into doc; the value is read as JSON when
// possible, otherwise as a string. Throws std::invalid_argument on bad shape.
void apply_override(nlohmann::ordered_json& doc, const std::string& assignment);

// Loads the optional config file and applies overrides in order.
nlohmann::ordered_json merged_config(const std::string& config_path,
                                     const std::vector<std::string>& overrides);

// Builds settings from a merged config document; unknown keys throw.
RunSettings settings_from_config(const nlohmann::ordered_json& doc);

}  // namespace safedrive::cli
