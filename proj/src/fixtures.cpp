#include "bwe/fixtures.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace bwe {

namespace {

// Sign that orients a branch from the zone side to the outside.
double outward_sign(const ZoneSpecification& spec, std::size_t branch) {
	const auto& b = spec.network.branches()[branch];
	auto in_zone = [&](std::size_t bus) {
		const std::string& id = spec.network.buses()[bus];
		return std::find(spec.zone_buses.begin(), spec.zone_buses.end(), id) != spec.zone_buses.end();
	};
	if (in_zone(b.from) && !in_zone(b.to))
		return 1.0;
	if (in_zone(b.to) && !in_zone(b.from))
		return -1.0;
	throw InputError(fmt::format("branch '{}' does not cross the zone boundary", b.id));
}

std::size_t zone_end(const ZoneSpecification& spec, std::size_t branch) {
	const auto& b = spec.network.branches()[branch];
	return outward_sign(spec, branch) > 0 ? b.from : b.to;
}

std::vector<std::size_t> outage_of(const ZoneSpecification& spec, std::optional<std::size_t> contingency) {
	if (!contingency)
		return {};
	return {spec.network.branch_index(spec.contingencies[*contingency].branch)};
}

} // namespace

ZoneModel build_zone(const ZoneSpecification& spec) {
	ZoneModel zone;
	zone.name = spec.name;
	zone.base_mva = 100.0;
	zone.timestep_hours = spec.timestep_hours;
	zone.curative_duration_hours = spec.curative_duration_hours;
	for (const auto& id : spec.zone_buses)
		zone.buses.push_back(Bus{id});
	for (const auto& il : spec.internal_lines) {
		const auto& b = spec.network.branches()[spec.network.branch_index(il.branch)];
		Line line;
		line.id = il.branch;
		line.from_bus = zone.bus_index(spec.network.buses()[b.from]);
		line.to_bus = zone.bus_index(spec.network.buses()[b.to]);
		line.reactance_pu = b.reactance_pu;
		line.summer = il.summer;
		line.winter = il.winter;
		zone.lines.push_back(line);
	}
	for (const auto& outage : spec.contingencies) {
		Contingency c;
		c.id = outage.id;
		c.outaged_element = outage.branch;
		c.outaged_line = zone.find_line(outage.branch);
		c.modifies_zone_topology = c.outaged_line.has_value();
		zone.contingencies.push_back(c);
	}
	const std::size_t nb = zone.buses.size();
	std::vector<std::size_t> zone_to_full(nb);
	for (std::size_t i = 0; i < nb; ++i)
		zone_to_full[i] = spec.network.bus_index(spec.zone_buses[i]);
	for (const auto& id : spec.outbound_branches) {
		std::size_t branch = spec.network.branch_index(id);
		double sign = outward_sign(spec, branch);
		OutboundLine oline;
		oline.id = id;
		oline.boundary_bus = zone.bus_index(spec.network.buses()[zone_end(spec, branch)]);
		auto column = [&](std::optional<std::size_t> c) {
			std::vector<double> factors(nb);
			for (std::size_t k = 0; k < nb; ++k) {
				double v = sign * spec.network.ptdf_column(zone_to_full[k], outage_of(spec, c))[branch];
				factors[k] = std::abs(v) < 1e-12 ? 0.0 : v;
			}
			return factors;
		};
		oline.ptdf_normal = column(std::nullopt);
		for (std::size_t c = 0; c < spec.contingencies.size(); ++c)
			oline.ptdf_contingency.push_back(column(c));
		zone.outbound_lines.push_back(std::move(oline));
	}
	zone.battery.bus = zone.bus_index(spec.battery_bus);
	zone.battery.pmin_mw = spec.battery_pmin_mw;
	zone.battery.pmax_mw = spec.battery_pmax_mw;
	zone.battery.capacity_mwh = spec.battery_capacity_mwh;
	zone.battery.soc_min_mwh = spec.battery_soc_min_mwh;
	validate_zone(zone);
	return zone;
}

ForecastRow build_forecast_row(const ZoneSpecification& spec, const ZoneModel& zone, const std::vector<double>& injections_mw,
	const std::vector<double>& curtailable_max_mw, Season season, std::string timestamp) {
	ForecastRow row;
	row.timestamp = std::move(timestamp);
	row.season = season;
	for (const auto& bus : zone.buses)
		row.injection_mw.push_back(injections_mw.at(spec.network.bus_index(bus.id)));
	row.curtailable_max_mw = curtailable_max_mw;
	auto reference = [&](std::optional<std::size_t> c) {
		auto flows = spec.network.flows(injections_mw, outage_of(spec, c));
		std::vector<double> out;
		for (const auto& id : spec.outbound_branches) {
			std::size_t branch = spec.network.branch_index(id);
			out.push_back(outward_sign(spec, branch) * flows[branch]);
		}
		return out;
	};
	row.reference_flow_normal = reference(std::nullopt);
	for (std::size_t c = 0; c < spec.contingencies.size(); ++c)
		row.reference_flow_contingency.push_back(reference(c));
	return row;
}

std::vector<double> injections_by_id(const ZoneSpecification& spec, const std::vector<std::pair<std::string, double>>& values) {
	std::vector<double> out(spec.network.buses().size(), 0.0);
	for (const auto& [id, mw] : values)
		out[spec.network.bus_index(id)] += mw;
	return out;
}

ZoneSpecification zone90kv_specification() {
	std::vector<std::string> buses{"alpha", "beta", "gamma", "delta", "W", "H", "G"};
	auto idx = [&](const std::string& id) {
		return static_cast<std::size_t>(std::find(buses.begin(), buses.end(), id) - buses.begin());
	};
	std::vector<FullNetwork::Branch> branches{
		{"alpha-beta", idx("alpha"), idx("beta"), 0.05},
		{"beta-gamma", idx("beta"), idx("gamma"), 0.05},
		{"gamma-delta", idx("gamma"), idx("delta"), 0.1},
		{"alpha-west", idx("alpha"), idx("W"), 0.1},
		{"delta-east", idx("delta"), idx("H"), 0.05},
		{"west-grid", idx("W"), idx("G"), 0.1},
		{"east-grid-1", idx("H"), idx("G"), 0.15},
		{"east-grid-2", idx("H"), idx("G"), 0.15},
		{"east-grid-3", idx("H"), idx("G"), 0.15},
	};
	ZoneSpecification spec(FullNetwork(buses, branches, idx("G")));
	spec.name = "zone90kv";
	spec.zone_buses = {"alpha", "beta", "gamma", "delta"};
	RatingSet ab_summer{70, 81, 101, std::nullopt};
	RatingSet ab_winter{81, 99, 101, std::nullopt};
	RatingSet gd_summer{77, 82, 111, std::nullopt};
	RatingSet gd_winter{87, 100, 111, std::nullopt};
	spec.internal_lines = {
		{"alpha-beta", ab_summer, ab_winter},
		{"beta-gamma", ab_summer, ab_winter},
		{"gamma-delta", gd_summer, gd_winter},
	};
	spec.outbound_branches = {"alpha-west", "delta-east"};
	spec.contingencies = {{"n-gamma-delta", "gamma-delta"}, {"n-east-grid-1", "east-grid-1"}};
	spec.battery_bus = "gamma";
	spec.battery_pmin_mw = -12.0;
	spec.battery_pmax_mw = 12.0;
	spec.battery_capacity_mwh = 24.0;
	spec.battery_soc_min_mwh = 0.0;
	return spec;
}

} // namespace bwe
