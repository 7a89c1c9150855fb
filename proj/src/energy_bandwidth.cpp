#include "bwe/energy_bandwidth.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace bwe {

namespace {

constexpr double kSlack = 1e-9;

std::size_t horizon_length(const std::vector<PowerBandwidthResult>& power, std::optional<std::size_t> horizon) {
	std::size_t count = horizon.value_or(power.size());
	if (count > power.size())
		throw EnergyError(fmt::format("energy bandwidths: horizon {} exceeds the {} power results", count, power.size()));
	return count;
}

} // namespace

std::vector<EffectiveBand> effective_bands(const std::vector<PowerBandwidthResult>& power, const ZoneModel& zone,
	std::optional<std::size_t> horizon) {
	const std::size_t count = horizon_length(power, horizon);
	const double ratio = zone.curative_duration_hours / zone.timestep_hours;
	std::vector<EffectiveBand> bands(count);
	for (std::size_t t = 0; t < count; ++t) {
		const PowerBandwidthResult& r = power[t];
		if (!r.feasible())
			throw EnergyError(fmt::format("energy bandwidths: timestep {} ({}) has no feasible power bandwidth", t, r.timestamp));
		const double charge = std::max(0.0, r.curative_charge_worst);
		const double discharge = std::min(0.0, r.curative_discharge_worst);
		bands[t].lower = r.b_lower + ratio * charge;
		bands[t].upper = r.b_upper + ratio * discharge;
		bands[t].soc_ceiling = zone.battery.capacity_mwh - zone.curative_duration_hours * charge;
		bands[t].soc_floor = zone.battery.soc_min_mwh - zone.curative_duration_hours * discharge;
	}
	return bands;
}

EnergyBandwidthResult compute_energy_bandwidths(const std::vector<PowerBandwidthResult>& power, const ZoneModel& zone,
	std::optional<std::size_t> horizon) {
	const std::size_t count = horizon_length(power, horizon);
	const double dt = zone.timestep_hours;
	const double sc_min = zone.battery.soc_min_mwh;
	const double sc_max = zone.battery.capacity_mwh;

	EnergyBandwidthResult out;
	out.bands = effective_bands(power, zone, count);
	out.soc_lower.assign(count + 1, sc_min);
	out.soc_upper.assign(count + 1, sc_max);
	double upper = sc_max;
	double lower = sc_min;
	auto flag = [&](std::size_t boundary, std::string message) {
		if (out.feasible) {
			out.feasible = false;
			out.infeasible_boundary = boundary;
			out.message = std::move(message);
		}
	};
	for (std::size_t t = count; t-- > 0;) {
		const EffectiveBand& band = out.bands[t];
		if (band.lower > band.upper + kSlack)
			flag(t, fmt::format("timestep {} ({}): curative reserve leaves no admissible power ({:.6f} > {:.6f} MW)", t,
						power[t].timestamp, band.lower, band.upper));
		upper = std::min(band.soc_ceiling, upper - dt * band.lower);
		lower = std::max(band.soc_floor, lower - dt * band.upper);
		if (lower > upper + kSlack)
			flag(t, fmt::format("boundary {} ({}): required state of charge [{:.6f}, {:.6f}] MWh is empty", t,
						power[t].timestamp, lower, upper));
		out.soc_upper[t] = std::clamp(upper, sc_min, sc_max);
		out.soc_lower[t] = std::clamp(lower, sc_min, sc_max);
		if (!out.feasible) {
			// Keep the recursion going from a consistent point so later rows stay readable.
			upper = out.soc_upper[t];
			lower = std::min(out.soc_lower[t], upper);
		}
	}
	return out;
}

Trajectory verify_trajectory_existence(const std::vector<PowerBandwidthResult>& power, const EnergyBandwidthResult& energy,
	const ZoneModel& zone, double initial_soc_mwh) {
	Trajectory traj;
	const std::size_t count = energy.bands.size();
	const double dt = zone.timestep_hours;
	if (power.size() < count || energy.soc_lower.size() != count + 1) {
		traj.message = "power and energy results cover different horizons";
		return traj;
	}
	if (!energy.feasible) {
		traj.violation_boundary = energy.infeasible_boundary;
		traj.message = energy.message;
		return traj;
	}
	double soc = initial_soc_mwh;
	traj.soc_mwh.push_back(soc);
	if (soc < energy.soc_lower[0] - kSlack || soc > energy.soc_upper[0] + kSlack) {
		traj.violation_boundary = 0;
		traj.message = fmt::format("initial state of charge {:.6f} MWh lies outside [{:.6f}, {:.6f}]", soc, energy.soc_lower[0],
			energy.soc_upper[0]);
		return traj;
	}
	for (std::size_t t = 0; t < count; ++t) {
		const double next_lo = energy.soc_lower[t + 1];
		const double next_hi = energy.soc_upper[t + 1];
		double lo = std::max(energy.bands[t].lower, (next_lo - soc) / dt);
		double hi = std::min(energy.bands[t].upper, (next_hi - soc) / dt);
		if (lo > hi + kSlack) {
			traj.violation_boundary = t + 1;
			traj.message = fmt::format("no admissible power at timestep {} from {:.6f} MWh", t, soc);
			return traj;
		}
		double target = 0.5 * (next_lo + next_hi);
		double b = std::clamp((target - soc) / dt, lo, std::max(lo, hi));
		soc += dt * b;
		traj.power_mw.push_back(b);
		traj.soc_mwh.push_back(soc);
	}
	traj.exists = true;
	return traj;
}

} // namespace bwe
