#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "bwe/power_bandwidth.hpp"

namespace bwe {

struct SeasonAvailability {
	std::size_t timesteps = 0;
	std::size_t strong = 0;
	std::size_t reduced = 0;
	std::size_t infeasible = 0;
	std::size_t fully_available = 0;
	double fraction_strong_congestion = 0.0;
	double fraction_congestion = 0.0;
	double fraction_fully_available = 0.0;

	std::size_t congestion() const { return strong + reduced + infeasible; }
};

struct AvailabilityReport {
	std::map<std::string, SeasonAvailability> seasons; // "summer", "winter"
	SeasonAvailability overall;
	std::map<std::string, std::size_t> binding_histogram;
};

/// Congestion counts per season. Infeasible timesteps count as congestion
/// but not as strong congestion.
AvailabilityReport summarize(const std::vector<PowerBandwidthResult>& results);

nlohmann::json report_to_json(const AvailabilityReport& report);
std::string report_to_text(const AvailabilityReport& report);
std::string binding_histogram_csv(const AvailabilityReport& report);

} // namespace bwe
