#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bwe/dc_network.hpp"
#include "bwe/grid_model.hpp"

namespace bwe {

/// A zone cut out of a whole-grid DC model. Outbound PTDFs and reference
/// flows are derived from the full network.
struct ZoneSpecification {
	struct InternalLine {
		std::string branch;
		RatingSet summer;
		RatingSet winter;
	};
	struct Outage {
		std::string id;
		std::string branch;
	};

	explicit ZoneSpecification(FullNetwork full) : network(std::move(full)) {}

	FullNetwork network;
	std::string name = "zone";
	std::vector<std::string> zone_buses;
	std::vector<InternalLine> internal_lines;
	std::vector<std::string> outbound_branches;
	std::vector<Outage> contingencies;
	std::string battery_bus;
	double battery_pmin_mw = 0.0;
	double battery_pmax_mw = 0.0;
	double battery_capacity_mwh = 1.0;
	double battery_soc_min_mwh = 0.0;
	double timestep_hours = 1.0;
	double curative_duration_hours = 5.0 / 60.0;
};

ZoneModel build_zone(const ZoneSpecification& spec);

/// Forecast row for whole-grid injections (indexed like the full network's
/// buses; the slack absorbs the balance).
ForecastRow build_forecast_row(const ZoneSpecification& spec, const ZoneModel& zone, const std::vector<double>& injections_mw,
	const std::vector<double>& curtailable_max_mw, Season season, std::string timestamp);

/// The 4-substation 90 kV zone: radial chain alpha-beta-gamma-delta with the
/// battery (12 MW, 24 MWh) at gamma, embedded in a small external grid.
ZoneSpecification zone90kv_specification();

/// Full-network injection vector from (bus id, MW) pairs.
std::vector<double> injections_by_id(const ZoneSpecification& spec, const std::vector<std::pair<std::string, double>>& values);

} // namespace bwe
