#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bwe/energy_bandwidth.hpp"
#include "bwe/grid_model.hpp"
#include "bwe/power_bandwidth.hpp"
#include "bwe/statistics.hpp"

namespace bwe {

inline constexpr const char* kEngineVersion = "1.0.0";

/// Fixed six-decimal formatting; negative zero prints as zero.
std::string format_mw(double value);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

std::string power_csv(const std::vector<PowerBandwidthResult>& results);
std::string energy_csv(const std::vector<PowerBandwidthResult>& results, const std::optional<EnergyBandwidthResult>& energy);

/// One row per timestep: power bandwidth, energy interval at both boundaries
/// and the infeasibility diagnostic.
std::string report_csv(const std::vector<PowerBandwidthResult>& results, const std::optional<EnergyBandwidthResult>& energy);

/// Reads the season and congestion columns of a report written by report_csv.
std::vector<PowerBandwidthResult> read_report_csv(const std::filesystem::path& path);

struct RunRequest {
	std::filesystem::path zone_path;
	std::filesystem::path forecast_path;
	std::filesystem::path out_dir;
	std::optional<std::size_t> horizon;
	EngineConfig engine;
};

struct RunOutcome {
	ZoneModel zone;
	PowerBandwidthRun power;
	std::optional<EnergyBandwidthResult> energy;
	std::string energy_error;
	AvailabilityReport availability;
	nlohmann::json manifest;

	bool any_infeasible() const { return power.infeasible_count() > 0 || (energy && !energy->feasible); }
};

/// Loads inputs, computes power and energy bandwidths and writes
/// power_bandwidths.csv, energy_bandwidths.csv, report.csv, availability.json
/// and manifest.json into the output directory.
RunOutcome run_compute(const RunRequest& request);

} // namespace bwe
