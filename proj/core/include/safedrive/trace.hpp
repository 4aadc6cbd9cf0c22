#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "safedrive/controller.hpp"
#include "safedrive/metrics.hpp"
#include "safedrive/world.hpp"

namespace safedrive::sim {

using ojson = nlohmann::ordered_json;

// One JSONL line per controller tick; infraction events raised between this
// tick and the next are appended to its "infractions" list.
ojson tick_record(const World& world, const GroundTruth& gt,
                  const std::vector<grid::DetectedObject>& perceived,
                  const ctrl::TickDiagnostics& diag, const ctrl::VehicleCommand& cmd);

void append_infraction(ojson& tick, const InfractionEvent& event);

// Terminal line carrying the episode metrics and identity.
ojson final_record(const Metrics& metrics, const std::string& status,
                   const std::string& scenario_name, std::uint64_t seed,
                   const std::string& variant, double safety_factor);

void write_jsonl(const std::filesystem::path& path, const std::vector<ojson>& lines);

// Throws std::runtime_error naming the failing line index on corrupt input.
std::vector<ojson> read_jsonl(const std::filesystem::path& path);

// The trailing record of a trace; throws if the trace has no "final" line.
ojson final_of(const std::vector<ojson>& lines);

}  // namespace safedrive::sim
