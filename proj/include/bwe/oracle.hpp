#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bwe/energy_bandwidth.hpp"
#include "bwe/fixtures.hpp"
#include "bwe/grid_model.hpp"
#include "bwe/lp_core.hpp"
#include "bwe/power_bandwidth.hpp"

namespace bwe {

class OracleGuardError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

// ---- LP vertex enumeration ----------------------------------------------

struct VertexOracleResult {
	LpStatus status = LpStatus::Infeasible;
	double objective = 0.0;
	std::vector<double> values;
	std::size_t bases_examined = 0;
};

/// Solves by enumerating every basis of the standard-form equivalent.
/// Dual feasibility of some basis separates bounded from unbounded problems.
VertexOracleResult enumerate_vertices(const LinearProgram& lp, std::size_t max_bases = 20'000'000);

/// Random LP with integer data; upper bounds only appear on small problems.
LinearProgram random_lp(std::uint64_t seed, std::size_t max_variables = 50, std::size_t max_rows = 4);

// ---- Power bandwidth grid search ------------------------------------------

struct GridSearchConfig {
	double power_resolution = 0.01;
	double curtailment_resolution = 0.05;
	double tolerance = 1e-7; // MW, on every rating
	std::size_t max_curtailment_points = 200'000;
};

struct OracleBandwidth {
	bool feasible = false;
	double b_lower = 0.0;
	double b_upper = 0.0;
	double curtailment_total = 0.0;
};

/// Whether preventive (B, C) admits curative actions that clear every rating.
bool oracle_controls_feasible(const ZoneModel& zone, const ForecastRow& row, Season season, double battery_mw,
	const std::vector<double>& curtailment, double tolerance = 1e-7);

/// Scans B over [B^min, B^max]; among the grid points needing the least
/// preventive curtailment returns the extreme ones.
OracleBandwidth brute_force_power_bandwidth(const ZoneModel& zone, const ForecastRow& row, Season season,
	const GridSearchConfig& config = {});

// ---- Forward SoC propagation --------------------------------------------

struct SocInterval {
	bool empty = true;
	double lower = 0.0;
	double upper = 0.0;
};

/// For every boundary, the starting states of charge from which a forward
/// trajectory within the effective bands stays inside [SC^min, SC^max].
std::vector<SocInterval> forward_soc_feasible_set(const std::vector<EffectiveBand>& bands, const ZoneModel& zone);

// ---- Random instances -----------------------------------------------------

struct RandomInstance {
	ZoneSpecification spec;
	ZoneModel zone;
	ForecastRow row;
};

/// Zone of 2 to 4 buses, up to 2 contingencies and one curtailable bus.
RandomInstance random_instance(std::uint64_t seed);

/// Power results with random bands and curative records for energy tests.
std::vector<PowerBandwidthResult> random_power_series(std::uint64_t seed, const ZoneModel& zone, std::size_t length);

} // namespace bwe
