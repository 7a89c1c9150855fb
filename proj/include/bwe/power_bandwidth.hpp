#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bwe/grid_model.hpp"
#include "bwe/lp_core.hpp"

namespace bwe {

enum class Direction { Lower, Upper };
enum class ObjectiveMode { Weighted, Lexicographic };
enum class CongestionClass { FullyAvailable, Reduced, Strong, Infeasible };

/// Security state of one block of flow variables and the rating it obeys.
enum class SecurityState { Normal, Immediate, FastCurative, FullCurative };
enum class RatingKind { Permanent, LongTerm, Immediate };

std::string to_string(Direction direction);
std::string to_string(ObjectiveMode mode);
std::string to_string(CongestionClass cls);
std::string to_string(RatingKind kind);
ObjectiveMode parse_objective_mode(const std::string& text);
CongestionClass parse_congestion_class(const std::string& text);

RatingKind rating_for(SecurityState state);
double rating_value(const RatingSet& ratings, RatingKind kind);

struct Weights {
	double c1 = 1e4; // preventive curtailment, per MW
	double c2 = 1e-3; // |curative battery|, per MW
	double c3 = 1e-4; // curative curtailment, per MW
};

struct BuildOptions {
	Direction direction = Direction::Lower;
	Weights weights;
	// Replace the objective by the total rating violation with every rating relaxed.
	bool elastic = false;
	std::optional<double> fixed_battery;
	std::optional<std::vector<double>> fixed_curtailment; // per bus
	bool forbid_curtailment = false;
	// First lexicographic stage: minimize total preventive curtailment only.
	bool curtailment_objective_only = false;
	// Second lexicographic stage: cap on total preventive curtailment, no c1 term.
	std::optional<double> curtailment_cap;
};

struct StateBlock {
	SecurityState state = SecurityState::Normal;
	std::optional<std::size_t> contingency;
	std::vector<std::optional<std::size_t>> flow; // per line; empty for outaged lines
	std::vector<std::size_t> angle; // per bus, base MVA times radians
};

struct RatingRow {
	std::size_t line = 0;
	std::size_t block = 0;
	RatingKind rating = RatingKind::Permanent;
	double limit = 0.0;
	std::size_t flow_variable = 0;
	std::optional<std::size_t> elastic_variable;
};

struct VariableMap {
	std::size_t battery = 0;
	std::vector<std::optional<std::size_t>> curtailment; // per bus with curtailable generation
	std::vector<std::size_t> curative_battery_pos; // per contingency
	std::vector<std::size_t> curative_battery_neg;
	std::vector<std::vector<std::optional<std::size_t>>> curative_curtailment; // [contingency][bus]
	std::vector<StateBlock> blocks;
	std::vector<RatingRow> ratings;
};

struct BandwidthProblem {
	Direction direction = Direction::Lower;
	std::size_t timestep = 0;
	LinearProgram lp;
	VariableMap map;
};

/// Label `line:state:rating`, e.g. `alpha-beta:n-gamma-delta:immediate`.
std::string rating_label(const ZoneModel& zone, const VariableMap& map, const RatingRow& row);

BandwidthProblem build_lp(const ZoneModel& zone, const ForecastRow& row, Season season, const BuildOptions& options,
	std::size_t timestep = 0);

struct EngineConfig {
	Weights weights;
	ObjectiveMode mode = ObjectiveMode::Weighted;
	std::size_t workers = 1;
	std::optional<Season> season_override;
	double class_tolerance = 1e-6;
	// Lexicographic slack on the optimal total curtailment, MW.
	double curtailment_tolerance = 1e-9;
	const LpSolver* solver = nullptr; // null selects the bundled dense simplex
};

struct PowerBandwidthResult {
	std::size_t timestep = 0;
	std::string timestamp;
	Season season = Season::Summer;
	LpStatus lower_status = LpStatus::NumericallyUnstable;
	LpStatus upper_status = LpStatus::NumericallyUnstable;
	double b_lower = 0.0;
	double b_upper = 0.0;
	// max over contingencies of curative battery at the lower solve
	double curative_charge_worst = 0.0;
	// min over contingencies of curative battery at the upper solve
	double curative_discharge_worst = 0.0;
	double curtailment_lower = 0.0;
	double curtailment_upper = 0.0;
	std::vector<double> curtailment_lower_by_bus;
	std::vector<double> curtailment_upper_by_bus;
	std::vector<double> curative_battery_lower; // per contingency
	std::vector<double> curative_battery_upper;
	CongestionClass congestion = CongestionClass::Infeasible;
	std::string binding_constraint;
	std::string diagnostic;

	bool feasible() const { return congestion != CongestionClass::Infeasible; }
	double preventive_curtailment() const { return std::max(curtailment_lower, curtailment_upper); }
};

const LpSolver& default_solver();

PowerBandwidthResult solve_timestep(const ZoneModel& zone, const ForecastRow& row, const EngineConfig& config,
	std::size_t timestep = 0);

struct TimestepFailure {
	std::size_t timestep = 0;
	std::string timestamp;
	std::string message;
};

struct PowerBandwidthRun {
	std::vector<PowerBandwidthResult> results;
	std::vector<TimestepFailure> failures;

	std::size_t infeasible_count() const;
};

/// Solves every timestep in [0, horizon) on `config.workers` threads.
/// Results are ordered by timestep; failures do not abort the horizon.
PowerBandwidthRun compute_power_bandwidths(const ZoneModel& zone, const Forecast& forecast, const EngineConfig& config,
	std::optional<std::size_t> horizon = std::nullopt);

/// Largest rating violation under the best controls, for infeasible timesteps.
std::string diagnose_infeasibility(const ZoneModel& zone, const ForecastRow& row, Season season, const EngineConfig& config);

struct FixedBatteryCheck {
	LpStatus status = LpStatus::NumericallyUnstable;
	double max_violation = 0.0;
	bool feasible() const { return status == LpStatus::Optimal && max_violation < 1e-6; }
};

/// Whether curative actions exist for every contingency with the preventive
/// battery and curtailment fixed.
FixedBatteryCheck check_fixed_battery(const ZoneModel& zone, const ForecastRow& row, Season season, double battery_mw,
	const std::vector<double>& curtailment, const EngineConfig& config);

/// Preventive curtailment for a battery setpoint inside the bandwidth,
/// interpolated between the lower and upper solves.
std::vector<double> interpolate_curtailment(const PowerBandwidthResult& result, double battery_mw);

} // namespace bwe
