#include "bwe/power_bandwidth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "bwe/dc_network.hpp"

namespace bwe {

std::string to_string(Direction direction) {
	return direction == Direction::Lower ? "lower" : "upper";
}

std::string to_string(ObjectiveMode mode) {
	return mode == ObjectiveMode::Weighted ? "weighted" : "lexicographic";
}

std::string to_string(CongestionClass cls) {
	switch (cls) {
	case CongestionClass::FullyAvailable:
		return "fully_available";
	case CongestionClass::Reduced:
		return "reduced";
	case CongestionClass::Strong:
		return "strong";
	case CongestionClass::Infeasible:
		return "infeasible";
	}
	return "unknown";
}

std::string to_string(RatingKind kind) {
	switch (kind) {
	case RatingKind::Permanent:
		return "permanent";
	case RatingKind::LongTerm:
		return "long_term";
	case RatingKind::Immediate:
		return "immediate";
	}
	return "unknown";
}

ObjectiveMode parse_objective_mode(const std::string& text) {
	if (text == "weighted")
		return ObjectiveMode::Weighted;
	if (text == "lexicographic")
		return ObjectiveMode::Lexicographic;
	throw InputError(fmt::format("unknown objective mode '{}' (expected weighted or lexicographic)", text));
}

CongestionClass parse_congestion_class(const std::string& text) {
	for (auto cls : {CongestionClass::FullyAvailable, CongestionClass::Reduced, CongestionClass::Strong, CongestionClass::Infeasible})
		if (to_string(cls) == text)
			return cls;
	throw InputError(fmt::format("unknown congestion class '{}'", text));
}

RatingKind rating_for(SecurityState state) {
	switch (state) {
	case SecurityState::Immediate:
		return RatingKind::Immediate;
	case SecurityState::FastCurative:
		return RatingKind::LongTerm;
	default:
		return RatingKind::Permanent;
	}
}

double rating_value(const RatingSet& ratings, RatingKind kind) {
	switch (kind) {
	case RatingKind::LongTerm:
		return ratings.long_term;
	case RatingKind::Immediate:
		return ratings.immediate;
	default:
		return ratings.permanent;
	}
}

std::string rating_label(const ZoneModel& zone, const VariableMap& map, const RatingRow& row) {
	const StateBlock& block = map.blocks.at(row.block);
	std::string state = block.contingency ? zone.contingencies[*block.contingency].id : "normal";
	return fmt::format("{}:{}:{}", zone.lines[row.line].id, state, to_string(row.rating));
}

namespace {

const char* state_tag(SecurityState state) {
	switch (state) {
	case SecurityState::Normal:
		return "N";
	case SecurityState::Immediate:
		return "C";
	case SecurityState::FastCurative:
		return "C1";
	case SecurityState::FullCurative:
		return "C2";
	}
	return "?";
}

} // namespace

BandwidthProblem build_lp(const ZoneModel& zone, const ForecastRow& row, Season season, const BuildOptions& options,
	std::size_t timestep) {
	const std::size_t nb = zone.buses.size();
	const std::size_t nc = zone.contingencies.size();
	if (row.injection_mw.size() != nb || row.curtailable_max_mw.size() != nb)
		throw InputError(fmt::format("timestep {}: forecast row does not match the zone buses", timestep));
	if (row.reference_flow_normal.size() != zone.outbound_lines.size())
		throw InputError(fmt::format("timestep {}: missing normal-state reference flows", timestep));
	if (row.reference_flow_contingency.size() != nc)
		throw InputError(fmt::format("timestep {}: missing contingency reference flow", timestep));
	for (std::size_t c = 0; c < nc; ++c)
		if (row.reference_flow_contingency[c].size() != zone.outbound_lines.size())
			throw InputError(
				fmt::format("timestep {}: missing contingency reference flow for '{}'", timestep, zone.contingencies[c].id));

	BandwidthProblem problem;
	problem.direction = options.direction;
	problem.timestep = timestep;
	LinearProgram& lp = problem.lp;
	VariableMap& map = problem.map;
	const Weights& w = options.weights;
	const bool weighted = !options.elastic && !options.curtailment_objective_only;
	const double sign = options.direction == Direction::Lower ? 1.0 : -1.0;
	const std::size_t bat = zone.battery.bus;

	// Preventive controls.
	double b_lo = zone.battery.pmin_mw;
	double b_hi = zone.battery.pmax_mw;
	if (options.fixed_battery)
		b_lo = b_hi = *options.fixed_battery;
	map.battery = lp.add_variable("B", b_lo, b_hi, weighted ? sign : 0.0);

	map.curtailment.assign(nb, std::nullopt);
	for (std::size_t i = 0; i < nb; ++i) {
		double cmax = row.curtailable_max_mw[i];
		if (!(cmax > 0.0))
			continue;
		double lo = 0.0;
		double hi = options.forbid_curtailment ? 0.0 : cmax;
		if (options.fixed_curtailment)
			lo = hi = options.fixed_curtailment->at(i);
		double cost = 0.0;
		if (options.curtailment_objective_only)
			cost = 1.0;
		else if (weighted && !options.curtailment_cap)
			cost = w.c1;
		map.curtailment[i] = lp.add_variable(fmt::format("C[{}]", zone.buses[i].id), lo, hi, cost);
	}

	// Curative controls, |B^cur| split into a nonnegative pair.
	map.curative_curtailment.assign(nc, std::vector<std::optional<std::size_t>>(nb));
	for (std::size_t c = 0; c < nc; ++c) {
		const std::string& cid = zone.contingencies[c].id;
		map.curative_battery_pos.push_back(lp.add_variable(fmt::format("Bcur+[{}]", cid), 0.0, kInfinity, weighted ? w.c2 : 0.0));
		map.curative_battery_neg.push_back(lp.add_variable(fmt::format("Bcur-[{}]", cid), 0.0, kInfinity, weighted ? w.c2 : 0.0));
		for (std::size_t i = 0; i < nb; ++i)
			if (map.curtailment[i])
				map.curative_curtailment[c][i] =
					lp.add_variable(fmt::format("Ccur[{},{}]", zone.buses[i].id, cid), 0.0, kInfinity, weighted ? w.c3 : 0.0);
	}

	// Control withdrawal at each bus as a linear expression of the controls.
	auto withdrawal = [&](std::size_t bus, SecurityState state, std::optional<std::size_t> c) {
		std::vector<Term> terms;
		if (bus == bat) {
			terms.push_back({map.battery, 1.0});
			if (state == SecurityState::FastCurative || state == SecurityState::FullCurative) {
				terms.push_back({map.curative_battery_pos[*c], 1.0});
				terms.push_back({map.curative_battery_neg[*c], -1.0});
			}
		}
		if (map.curtailment[bus]) {
			terms.push_back({*map.curtailment[bus], 1.0});
			if (state == SecurityState::FullCurative)
				terms.push_back({*map.curative_curtailment[*c][bus], 1.0});
		}
		return terms;
	};

	auto add_block = [&](SecurityState state, std::optional<std::size_t> c) {
		TopologyState topology = c ? contingency_topology(zone, *c) : base_topology(zone);
		const std::vector<double>& reference = c ? row.reference_flow_contingency[*c] : row.reference_flow_normal;
		std::string tag = c ? fmt::format("{}[{}]", state_tag(state), zone.contingencies[*c].id) : state_tag(state);
		StateBlock block;
		block.state = state;
		block.contingency = c;
		block.flow.assign(zone.lines.size(), std::nullopt);
		const std::size_t block_index = map.blocks.size();
		const RatingKind kind = rating_for(state);

		for (std::size_t b = 0; b < nb; ++b) {
			bool reference_bus = topology.island_reference[topology.island_of_bus[b]] == b;
			double lo = reference_bus ? 0.0 : -kInfinity;
			double hi = reference_bus ? 0.0 : kInfinity;
			block.angle.push_back(lp.add_variable(fmt::format("theta{}[{}]", tag, zone.buses[b].id), lo, hi));
		}
		for (std::size_t l = 0; l < zone.lines.size(); ++l) {
			if (!topology.active_lines[l])
				continue;
			double limit = rating_value(select_ratings(zone.lines[l], season), kind);
			std::size_t f = options.elastic
				? lp.add_variable(fmt::format("F{}[{}]", tag, zone.lines[l].id), -kInfinity, kInfinity)
				: lp.add_variable(fmt::format("F{}[{}]", tag, zone.lines[l].id), -limit, limit);
			block.flow[l] = f;
			RatingRow rating{l, block_index, kind, limit, f, std::nullopt};
			if (options.elastic) {
				std::size_t e = lp.add_variable(fmt::format("E{}[{}]", tag, zone.lines[l].id), 0.0, kInfinity, 1.0);
				lp.add_constraint(fmt::format("rating+{}[{}]", tag, zone.lines[l].id), {{f, 1.0}, {e, -1.0}}, Relation::LessEqual,
					limit);
				lp.add_constraint(fmt::format("rating-{}[{}]", tag, zone.lines[l].id), {{f, 1.0}, {e, 1.0}},
					Relation::GreaterEqual, -limit);
				rating.elastic_variable = e;
			}
			map.ratings.push_back(rating);
			// F = (theta_from - theta_to) / x
			const Line& line = zone.lines[l];
			double y = 1.0 / line.reactance_pu;
			lp.add_constraint(fmt::format("angle{}[{}]", tag, line.id),
				{{f, 1.0}, {block.angle[line.from_bus], -y}, {block.angle[line.to_bus], y}}, Relation::Equal, 0.0);
		}

		// Nodal balance with outbound flows substituted by their PTDF update:
		// F~_o = F~0_o - sum_k ptdf(k,o) * withdrawal_k.
		for (std::size_t i = 0; i < nb; ++i) {
			if (topology.island_reference[topology.island_of_bus[i]] == i)
				continue;
			std::vector<Term> terms;
			for (std::size_t l = 0; l < zone.lines.size(); ++l) {
				if (!block.flow[l])
					continue;
				if (zone.lines[l].from_bus == i)
					terms.push_back({*block.flow[l], 1.0});
				else if (zone.lines[l].to_bus == i)
					terms.push_back({*block.flow[l], -1.0});
			}
			double rhs = row.injection_mw[i];
			for (std::size_t o = 0; o < zone.outbound_lines.size(); ++o) {
				const OutboundLine& oline = zone.outbound_lines[o];
				if (oline.boundary_bus != i)
					continue;
				rhs -= reference[o];
				const std::vector<double>& ptdf = c ? oline.ptdf_contingency[*c] : oline.ptdf_normal;
				for (std::size_t k = 0; k < nb; ++k) {
					if (ptdf[k] == 0.0)
						continue;
					for (const Term& t : withdrawal(k, state, c))
						terms.push_back({t.variable, -ptdf[k] * t.coefficient});
				}
			}
			for (const Term& t : withdrawal(i, state, c))
				terms.push_back(t);
			// Merge repeated variables so the row stays compact.
			std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.variable < b.variable; });
			std::vector<Term> merged;
			for (const Term& t : terms) {
				if (!merged.empty() && merged.back().variable == t.variable)
					merged.back().coefficient += t.coefficient;
				else
					merged.push_back(t);
			}
			std::erase_if(merged, [](const Term& t) { return std::abs(t.coefficient) < 1e-15; });
			lp.add_constraint(fmt::format("balance{}[{}]", tag, zone.buses[i].id), std::move(merged), Relation::Equal, rhs);
		}
		map.blocks.push_back(std::move(block));
	};

	add_block(SecurityState::Normal, std::nullopt);
	for (std::size_t c = 0; c < nc; ++c) {
		add_block(SecurityState::Immediate, c);
		add_block(SecurityState::FastCurative, c);
		add_block(SecurityState::FullCurative, c);
	}

	// Control bounds that couple preventive and curative actions.
	for (std::size_t c = 0; c < nc; ++c) {
		const std::string& cid = zone.contingencies[c].id;
		std::vector<Term> total{{map.battery, 1.0}, {map.curative_battery_pos[c], 1.0}, {map.curative_battery_neg[c], -1.0}};
		lp.add_constraint(fmt::format("battery_max[{}]", cid), total, Relation::LessEqual, zone.battery.pmax_mw);
		lp.add_constraint(fmt::format("battery_min[{}]", cid), total, Relation::GreaterEqual, zone.battery.pmin_mw);
		for (std::size_t i = 0; i < nb; ++i)
			if (map.curtailment[i])
				lp.add_constraint(fmt::format("curtail_max[{},{}]", zone.buses[i].id, cid),
					{{*map.curtailment[i], 1.0}, {*map.curative_curtailment[c][i], 1.0}}, Relation::LessEqual,
					row.curtailable_max_mw[i]);
	}
	if (options.curtailment_cap) {
		std::vector<Term> total;
		for (std::size_t i = 0; i < nb; ++i)
			if (map.curtailment[i])
				total.push_back({*map.curtailment[i], 1.0});
		if (!total.empty())
			lp.add_constraint("curtailment_cap", std::move(total), Relation::LessEqual, *options.curtailment_cap);
	}
	return problem;
}

const LpSolver& default_solver() {
	static const DenseSimplexSolver solver;
	return solver;
}

namespace {

struct DirectionOutcome {
	LpStatus status = LpStatus::NumericallyUnstable;
	double battery = 0.0;
	std::vector<double> curtailment;
	std::vector<double> curative_battery;
	std::string binding;
	double binding_weight = 0.0;
};

void extract(const ZoneModel& zone, const BandwidthProblem& problem, const LpSolution& sol, DirectionOutcome& out) {
	const VariableMap& map = problem.map;
	out.battery = sol.values[map.battery];
	out.curtailment.assign(zone.buses.size(), 0.0);
	for (std::size_t i = 0; i < zone.buses.size(); ++i)
		if (map.curtailment[i])
			out.curtailment[i] = sol.values[*map.curtailment[i]];
	for (std::size_t c = 0; c < zone.contingencies.size(); ++c)
		out.curative_battery.push_back(sol.values[map.curative_battery_pos[c]] - sol.values[map.curative_battery_neg[c]]);
	// Binding rating: tight flow bound with the largest multiplier.
	double best = -1.0;
	for (const RatingRow& r : map.ratings) {
		double flow = sol.values[r.flow_variable];
		if (std::abs(flow) < r.limit - 1e-6)
			continue;
		double weight = std::abs(sol.reduced_costs[r.flow_variable]);
		if (weight > best) {
			best = weight;
			out.binding = rating_label(zone, map, r);
			out.binding_weight = weight;
		}
	}
}

DirectionOutcome solve_direction(const ZoneModel& zone, const ForecastRow& row, Season season, const EngineConfig& config,
	Direction direction, std::size_t timestep, std::optional<double> curtailment_cap) {
	const LpSolver& solver = config.solver ? *config.solver : default_solver();
	BuildOptions options;
	options.direction = direction;
	options.weights = config.weights;
	options.curtailment_cap = curtailment_cap;
	BandwidthProblem problem = build_lp(zone, row, season, options, timestep);
	LpSolution sol = solver.solve(problem.lp);
	DirectionOutcome out;
	out.status = sol.status;
	if (sol.optimal())
		extract(zone, problem, sol, out);
	return out;
}

} // namespace

std::string diagnose_infeasibility(const ZoneModel& zone, const ForecastRow& row, Season season, const EngineConfig& config) {
	const LpSolver& solver = config.solver ? *config.solver : default_solver();
	BuildOptions options;
	options.elastic = true;
	BandwidthProblem problem = build_lp(zone, row, season, options);
	LpSolution sol = solver.solve(problem.lp);
	if (!sol.optimal())
		return fmt::format("elastic diagnostic failed: {}", to_string(sol.status));
	const RatingRow* worst = nullptr;
	double worst_excess = 0.0;
	for (const RatingRow& r : problem.map.ratings) {
		double excess = sol.values[*r.elastic_variable];
		if (excess > worst_excess) {
			worst_excess = excess;
			worst = &r;
		}
	}
	if (!worst)
		return "no rating violation found under relaxed ratings";
	return fmt::format("{} exceeded by {:.6f} MW with all controls at their best (total excess {:.6f} MW)",
		rating_label(zone, problem.map, *worst), worst_excess, sol.objective);
}

PowerBandwidthResult solve_timestep(const ZoneModel& zone, const ForecastRow& row, const EngineConfig& config,
	std::size_t timestep) {
	PowerBandwidthResult result;
	result.timestep = timestep;
	result.timestamp = row.timestamp;
	result.season = config.season_override.value_or(row.season);
	const Season season = result.season;

	std::optional<double> cap;
	if (config.mode == ObjectiveMode::Lexicographic) {
		const LpSolver& solver = config.solver ? *config.solver : default_solver();
		BuildOptions stage1;
		stage1.curtailment_objective_only = true;
		BandwidthProblem problem = build_lp(zone, row, season, stage1, timestep);
		LpSolution sol = solver.solve(problem.lp);
		if (!sol.optimal()) {
			result.lower_status = result.upper_status = sol.status;
			result.congestion = CongestionClass::Infeasible;
			result.diagnostic = sol.status == LpStatus::Infeasible ? diagnose_infeasibility(zone, row, season, config)
																 : "curtailment stage: " + to_string(sol.status);
			return result;
		}
		cap = sol.objective + config.curtailment_tolerance * std::max(1.0, sol.objective);
	}

	DirectionOutcome lower = solve_direction(zone, row, season, config, Direction::Lower, timestep, cap);
	DirectionOutcome upper = solve_direction(zone, row, season, config, Direction::Upper, timestep, cap);
	result.lower_status = lower.status;
	result.upper_status = upper.status;
	if (lower.status != LpStatus::Optimal || upper.status != LpStatus::Optimal) {
		result.congestion = CongestionClass::Infeasible;
		if (lower.status == LpStatus::Infeasible || upper.status == LpStatus::Infeasible)
			result.diagnostic = diagnose_infeasibility(zone, row, season, config);
		else
			result.diagnostic = fmt::format("solver status lower={} upper={}", to_string(lower.status), to_string(upper.status));
		result.binding_constraint = result.diagnostic.substr(0, result.diagnostic.find(' '));
		return result;
	}

	result.b_lower = lower.battery;
	result.b_upper = upper.battery;
	result.curtailment_lower_by_bus = lower.curtailment;
	result.curtailment_upper_by_bus = upper.curtailment;
	for (double v : lower.curtailment)
		result.curtailment_lower += v;
	for (double v : upper.curtailment)
		result.curtailment_upper += v;
	result.curative_battery_lower = lower.curative_battery;
	result.curative_battery_upper = upper.curative_battery;
	if (!lower.curative_battery.empty()) {
		result.curative_charge_worst = *std::max_element(lower.curative_battery.begin(), lower.curative_battery.end());
		result.curative_discharge_worst = *std::min_element(upper.curative_battery.begin(), upper.curative_battery.end());
	}

	const double tol = config.class_tolerance;
	const double bmin = zone.battery.pmin_mw;
	const double bmax = zone.battery.pmax_mw;
	bool lower_tight = result.b_lower > bmin + tol;
	bool upper_tight = result.b_upper < bmax - tol;
	bool curtailed = result.curtailment_lower > tol || result.curtailment_upper > tol;
	if (result.b_lower >= bmax - tol || result.b_upper <= bmin + tol)
		result.congestion = CongestionClass::Strong;
	else if (!lower_tight && !upper_tight && !curtailed)
		result.congestion = CongestionClass::FullyAvailable;
	else
		result.congestion = CongestionClass::Reduced;

	if (lower_tight || (curtailed && !upper_tight))
		result.binding_constraint = lower.binding;
	else if (upper_tight)
		result.binding_constraint = upper.binding;
	return result;
}

std::size_t PowerBandwidthRun::infeasible_count() const {
	return static_cast<std::size_t>(
		std::count_if(results.begin(), results.end(), [](const PowerBandwidthResult& r) { return !r.feasible(); }));
}

PowerBandwidthRun compute_power_bandwidths(const ZoneModel& zone, const Forecast& forecast, const EngineConfig& config,
	std::optional<std::size_t> horizon) {
	const std::size_t count = std::min(horizon.value_or(forecast.size()), forecast.size());
	PowerBandwidthRun run;
	run.results.resize(count);
	std::vector<std::optional<std::string>> errors(count);
	std::atomic<std::size_t> next{0};
	auto work = [&]() {
		while (true) {
			std::size_t t = next.fetch_add(1);
			if (t >= count)
				return;
			try {
				run.results[t] = solve_timestep(zone, forecast[t], config, t);
				const auto& r = run.results[t];
				if (r.lower_status == LpStatus::NumericallyUnstable || r.upper_status == LpStatus::NumericallyUnstable)
					errors[t] = "numerically unstable LP";
			} catch (const std::exception& e) {
				PowerBandwidthResult failed;
				failed.timestep = t;
				failed.timestamp = forecast[t].timestamp;
				failed.season = config.season_override.value_or(forecast[t].season);
				failed.diagnostic = e.what();
				run.results[t] = std::move(failed);
				errors[t] = e.what();
			}
		}
	};
	const std::size_t workers = std::max<std::size_t>(1, std::min(config.workers, std::max<std::size_t>(count, 1)));
	if (workers == 1) {
		work();
	} else {
		std::vector<std::thread> pool;
		for (std::size_t i = 0; i < workers; ++i)
			pool.emplace_back(work);
		for (auto& th : pool)
			th.join();
	}
	for (std::size_t t = 0; t < count; ++t)
		if (errors[t])
			run.failures.push_back({t, forecast[t].timestamp, *errors[t]});
	return run;
}

FixedBatteryCheck check_fixed_battery(const ZoneModel& zone, const ForecastRow& row, Season season, double battery_mw,
	const std::vector<double>& curtailment, const EngineConfig& config) {
	const LpSolver& solver = config.solver ? *config.solver : default_solver();
	BuildOptions options;
	options.weights = config.weights;
	options.fixed_battery = battery_mw;
	options.fixed_curtailment = curtailment;
	BandwidthProblem problem = build_lp(zone, row, season, options);
	LpSolution sol = solver.solve(problem.lp);
	FixedBatteryCheck check;
	check.status = sol.status;
	if (!sol.optimal())
		return check;
	for (const RatingRow& r : problem.map.ratings)
		check.max_violation = std::max(check.max_violation, std::abs(sol.values[r.flow_variable]) - r.limit);
	for (const Violation& v : check_solution(problem.lp, sol.values, 0.0))
		check.max_violation = std::max(check.max_violation, v.magnitude);
	return check;
}

std::vector<double> interpolate_curtailment(const PowerBandwidthResult& result, double battery_mw) {
	const auto& lo = result.curtailment_lower_by_bus;
	const auto& hi = result.curtailment_upper_by_bus;
	double span = result.b_upper - result.b_lower;
	double s = span > 0.0 ? std::clamp((battery_mw - result.b_lower) / span, 0.0, 1.0) : 0.0;
	std::vector<double> out(lo.size());
	for (std::size_t i = 0; i < lo.size(); ++i)
		out[i] = lo[i] == hi[i] ? lo[i] : (1.0 - s) * lo[i] + s * hi[i];
	return out;
}

} // namespace bwe
