#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bwe/grid_model.hpp"
#include "bwe/power_bandwidth.hpp"

namespace bwe {

class EnergyError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// Power band left once the worst curative energy of the timestep is reserved,
/// and the SoC range at the start of the timestep that keeps that reserve.
struct EffectiveBand {
	double lower = 0.0;
	double upper = 0.0;
	double soc_floor = 0.0;
	double soc_ceiling = 0.0;
};

std::vector<EffectiveBand> effective_bands(const std::vector<PowerBandwidthResult>& power, const ZoneModel& zone,
	std::optional<std::size_t> horizon = std::nullopt);

struct EnergyBandwidthResult {
	// Boundaries 0..T, clamped into [SC^min, SC^max].
	std::vector<double> soc_lower;
	std::vector<double> soc_upper;
	std::vector<EffectiveBand> bands;
	bool feasible = true;
	std::optional<std::size_t> infeasible_boundary;
	std::string message;
};

/// Backward recursion from SC^max / SC^min at the horizon end. Throws
/// EnergyError when a timestep is missing or infeasible.
EnergyBandwidthResult compute_energy_bandwidths(const std::vector<PowerBandwidthResult>& power, const ZoneModel& zone,
	std::optional<std::size_t> horizon = std::nullopt);

struct Trajectory {
	bool exists = false;
	std::vector<double> power_mw; // per timestep, charge positive
	std::vector<double> soc_mwh; // per boundary
	std::optional<std::size_t> violation_boundary;
	std::string message;
};

/// Greedy witness: each step takes the mandatory action and then moves
/// toward the middle of the next energy interval.
Trajectory verify_trajectory_existence(const std::vector<PowerBandwidthResult>& power, const EnergyBandwidthResult& energy,
	const ZoneModel& zone, double initial_soc_mwh);

} // namespace bwe
