#include "bwe/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "bwe/dc_network.hpp"

namespace bwe {

// ---------------------------------------------------------------------------
// LP vertex enumeration

namespace {

struct StandardForm {
	Eigen::MatrixXd a;
	Eigen::VectorXd b;
	Eigen::VectorXd c;
	// Structural variable and sign of each column; slack columns use npos.
	std::vector<std::size_t> column_variable;
	std::vector<double> column_sign;
	std::vector<double> offset;
	bool inconsistent = false;
};

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

StandardForm to_standard_form(const LinearProgram& lp) {
	StandardForm sf;
	const std::size_t n = lp.variable_count();
	sf.offset.assign(n, 0.0);
	std::vector<std::vector<std::pair<std::size_t, double>>> var_columns(n);
	std::vector<std::pair<std::size_t, double>> range_rows; // column, width
	for (std::size_t j = 0; j < n; ++j) {
		const LpVariable& v = lp.variables()[j];
		auto add = [&](double sign) {
			var_columns[j].push_back({sf.column_variable.size(), sign});
			sf.column_variable.push_back(j);
			sf.column_sign.push_back(sign);
		};
		if (std::isfinite(v.lower)) {
			sf.offset[j] = v.lower;
			add(1.0);
			if (std::isfinite(v.upper))
				range_rows.push_back({sf.column_variable.size() - 1, v.upper - v.lower});
		} else if (std::isfinite(v.upper)) {
			sf.offset[j] = v.upper;
			add(-1.0);
		} else {
			add(1.0);
			add(-1.0);
		}
	}
	const std::size_t structural_columns = sf.column_variable.size();
	std::size_t slack_count = range_rows.size();
	for (const auto& c : lp.constraints())
		if (c.relation != Relation::Equal)
			++slack_count;
	const std::size_t cols = structural_columns + slack_count;
	const std::size_t rows = lp.constraint_count() + range_rows.size();
	sf.a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
	sf.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows));
	sf.c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cols));
	for (std::size_t k = 0; k < structural_columns; ++k)
		sf.c(static_cast<Eigen::Index>(k)) = lp.variables()[sf.column_variable[k]].cost * sf.column_sign[k];
	std::size_t slack = structural_columns;
	for (std::size_t i = 0; i < lp.constraint_count(); ++i) {
		const LpConstraint& con = lp.constraints()[i];
		const auto r = static_cast<Eigen::Index>(i);
		double rhs = con.rhs;
		for (const Term& t : con.terms) {
			rhs -= t.coefficient * sf.offset[t.variable];
			for (const auto& [col, sign] : var_columns[t.variable])
				sf.a(r, static_cast<Eigen::Index>(col)) += t.coefficient * sign;
		}
		sf.b(r) = rhs;
		if (con.relation != Relation::Equal) {
			sf.a(r, static_cast<Eigen::Index>(slack)) = con.relation == Relation::LessEqual ? 1.0 : -1.0;
			++slack;
		}
	}
	for (std::size_t k = 0; k < range_rows.size(); ++k) {
		const auto r = static_cast<Eigen::Index>(lp.constraint_count() + k);
		sf.a(r, static_cast<Eigen::Index>(range_rows[k].first)) = 1.0;
		sf.a(r, static_cast<Eigen::Index>(slack)) = 1.0;
		sf.b(r) = range_rows[k].second;
		++slack;
	}
	sf.column_variable.resize(cols, kNone);
	sf.column_sign.resize(cols, 1.0);

	// Row-reduce [A | b] so the remaining rows are linearly independent.
	Eigen::MatrixXd m(sf.a.rows(), sf.a.cols() + 1);
	m << sf.a, sf.b;
	Eigen::Index rank = 0;
	const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
	for (Eigen::Index col = 0; col < sf.a.cols() && rank < m.rows(); ++col) {
		Eigen::Index pivot = rank;
		double best = 0.0;
		for (Eigen::Index r = rank; r < m.rows(); ++r)
			if (std::abs(m(r, col)) > best) {
				best = std::abs(m(r, col));
				pivot = r;
			}
		if (best < 1e-10 * scale)
			continue;
		m.row(rank).swap(m.row(pivot));
		m.row(rank) /= m(rank, col);
		for (Eigen::Index r = 0; r < m.rows(); ++r)
			if (r != rank && m(r, col) != 0.0)
				m.row(r) -= m(r, col) * m.row(rank);
		++rank;
	}
	for (Eigen::Index r = rank; r < m.rows(); ++r)
		if (std::abs(m(r, m.cols() - 1)) > 1e-9 * scale)
			sf.inconsistent = true;
	sf.a = m.topLeftCorner(rank, sf.a.cols());
	sf.b = m.block(0, m.cols() - 1, rank, 1);
	return sf;
}

bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
	const std::size_t k = idx.size();
	for (std::size_t i = k; i-- > 0;) {
		if (idx[i] < n - k + i) {
			++idx[i];
			for (std::size_t j = i + 1; j < k; ++j)
				idx[j] = idx[j - 1] + 1;
			return true;
		}
	}
	return false;
}

double binomial(std::size_t n, std::size_t k) {
	double r = 1.0;
	for (std::size_t i = 1; i <= k; ++i)
		r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
	return r;
}

} // namespace

VertexOracleResult enumerate_vertices(const LinearProgram& lp, std::size_t max_bases) {
	lp.validate();
	VertexOracleResult result;
	StandardForm sf = to_standard_form(lp);
	if (sf.inconsistent) {
		result.status = LpStatus::Infeasible;
		return result;
	}
	const auto r = static_cast<std::size_t>(sf.a.rows());
	const auto cols = static_cast<std::size_t>(sf.a.cols());
	if (r > cols) {
		result.status = LpStatus::Infeasible;
		return result;
	}
	if (binomial(cols, r) > static_cast<double>(max_bases))
		throw OracleGuardError(fmt::format("vertex enumeration: C({}, {}) bases exceed the guard of {}", cols, r, max_bases));

	const double tol = 1e-9 * std::max({1.0, sf.a.cwiseAbs().maxCoeff(), sf.b.cwiseAbs().maxCoeff()});
	const double ctol = 1e-9 * std::max(1.0, sf.c.cwiseAbs().maxCoeff());
	bool primal_found = false;
	bool dual_found = false;
	double best = kInfinity;
	Eigen::VectorXd best_z;

	std::vector<std::size_t> idx(r);
	std::iota(idx.begin(), idx.end(), 0);
	const auto ri = static_cast<Eigen::Index>(r);
	Eigen::MatrixXd basis(ri, ri);
	Eigen::VectorXd cb(ri);
	do {
		++result.bases_examined;
		for (std::size_t k = 0; k < r; ++k) {
			basis.col(static_cast<Eigen::Index>(k)) = sf.a.col(static_cast<Eigen::Index>(idx[k]));
			cb(static_cast<Eigen::Index>(k)) = sf.c(static_cast<Eigen::Index>(idx[k]));
		}
		Eigen::VectorXd zb;
		Eigen::VectorXd y;
		if (r > 0) {
			Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
			lu.setThreshold(1e-10);
			if (lu.rank() < ri)
				continue;
			zb = lu.solve(sf.b);
			y = lu.transpose().solve(cb);
		} else {
			y = Eigen::VectorXd::Zero(0);
		}
		if (!dual_found) {
			Eigen::VectorXd reduced = sf.c - sf.a.transpose() * y;
			dual_found = reduced.minCoeff() >= -ctol || cols == 0;
		}
		if (r == 0 || zb.minCoeff() >= -tol) {
			Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cols));
			for (std::size_t k = 0; k < r; ++k)
				z(static_cast<Eigen::Index>(idx[k])) = std::max(0.0, zb(static_cast<Eigen::Index>(k)));
			double value = sf.c.dot(z);
			if (!primal_found || value < best) {
				best = value;
				best_z = z;
			}
			primal_found = true;
		}
	} while (r > 0 && next_combination(idx, cols));

	if (!primal_found) {
		result.status = LpStatus::Infeasible;
		return result;
	}
	if (!dual_found) {
		result.status = LpStatus::Unbounded;
		return result;
	}
	result.status = LpStatus::Optimal;
	result.values = sf.offset;
	for (std::size_t k = 0; k < cols; ++k)
		if (sf.column_variable[k] != kNone)
			result.values[sf.column_variable[k]] += sf.column_sign[k] * best_z(static_cast<Eigen::Index>(k));
	result.objective = lp.objective_value(result.values);
	return result;
}

LinearProgram random_lp(std::uint64_t seed, std::size_t max_variables, std::size_t max_rows) {
	std::mt19937_64 rng(seed);
	auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
	auto chance = [&](double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; };
	const auto n = static_cast<std::size_t>(uniform_int(1, static_cast<int>(max_variables)));
	const auto m = static_cast<std::size_t>(uniform_int(1, static_cast<int>(max_rows)));
	LinearProgram lp;
	std::size_t bounded = 0;
	std::size_t free_vars = 0;
	// Half the problems carry a budget row over nonnegative variables and stay bounded.
	const bool budget = chance(0.5);
	for (std::size_t j = 0; j < n; ++j) {
		double lower = 0.0;
		double upper = kInfinity;
		if (n <= 12 && bounded < 2 && chance(0.25)) {
			lower = uniform_int(-3, 2);
			upper = lower + uniform_int(1, 6);
			++bounded;
		} else if (!budget && free_vars < 2 && chance(0.08)) {
			lower = -kInfinity;
			++free_vars;
		} else if (!budget && chance(0.05)) {
			lower = -kInfinity;
			upper = uniform_int(-2, 5);
		} else if (chance(0.1)) {
			lower = uniform_int(-3, 3);
		}
		lp.add_variable(fmt::format("x{}", j), lower, upper, uniform_int(-2, 5));
	}
	for (std::size_t i = 0; i < m; ++i) {
		std::vector<Term> terms;
		if (budget && i == 0) {
			for (std::size_t j = 0; j < n; ++j)
				terms.push_back({j, static_cast<double>(uniform_int(1, 3))});
			lp.add_constraint("budget", std::move(terms), Relation::LessEqual, uniform_int(5, 30));
			continue;
		}
		for (std::size_t j = 0; j < n; ++j)
			if (!chance(0.3))
				terms.push_back({j, static_cast<double>(uniform_int(-5, 5))});
		int pick = uniform_int(0, 5);
		Relation rel = pick <= 2 ? Relation::LessEqual : pick <= 4 ? Relation::GreaterEqual : Relation::Equal;
		lp.add_constraint(fmt::format("r{}", i), std::move(terms), rel, uniform_int(-10, 20));
	}
	return lp;
}

// ---------------------------------------------------------------------------
// Grid search over preventive controls

namespace {

// Flows of one network state as an affine function of bus withdrawals.
struct StateResponse {
	std::vector<bool> active;
	std::vector<double> base; // per line, no control
	std::vector<std::vector<double>> per_withdrawal; // [bus][line]
	std::vector<double> limit_immediate_or_permanent;
};

StateResponse state_response(const ZoneModel& zone, const ForecastRow& row, std::optional<std::size_t> contingency) {
	TopologyState topo = contingency ? contingency_topology(zone, *contingency) : base_topology(zone);
	const std::vector<double>& reference = contingency ? row.reference_flow_contingency[*contingency] : row.reference_flow_normal;
	StateResponse s;
	s.active = topo.active_lines;
	s.base = dc_flows(zone, topo, row.injection_mw, reference, 1e-3);
	const std::size_t nb = zone.buses.size();
	for (std::size_t k = 0; k < nb; ++k) {
		std::vector<double> inj(nb, 0.0);
		inj[k] = -1.0;
		std::vector<double> boundary(zone.outbound_lines.size());
		for (std::size_t o = 0; o < zone.outbound_lines.size(); ++o) {
			const auto& oline = zone.outbound_lines[o];
			boundary[o] = -(contingency ? oline.ptdf_contingency[*contingency][k] : oline.ptdf_normal[k]);
		}
		s.per_withdrawal.push_back(dc_flows(zone, topo, inj, boundary, 1e-6));
	}
	return s;
}

struct HalfSpace {
	std::vector<double> g;
	double h = 0.0;
};

bool polytope_nonempty(const std::vector<HalfSpace>& cons, std::size_t dim, double tol) {
	if (dim == 0) {
		return std::all_of(cons.begin(), cons.end(), [&](const HalfSpace& c) { return c.h >= -tol; });
	}
	const std::size_t k = cons.size();
	if (k < dim)
		return false;
	std::vector<std::size_t> idx(dim);
	std::iota(idx.begin(), idx.end(), 0);
	const auto d = static_cast<Eigen::Index>(dim);
	Eigen::MatrixXd m(d, d);
	Eigen::VectorXd rhs(d);
	do {
		for (std::size_t r = 0; r < dim; ++r) {
			for (std::size_t c = 0; c < dim; ++c)
				m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cons[idx[r]].g[c];
			rhs(static_cast<Eigen::Index>(r)) = cons[idx[r]].h;
		}
		Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
		lu.setThreshold(1e-12);
		if (lu.rank() < d)
			continue;
		Eigen::VectorXd z = lu.solve(rhs);
		bool ok = true;
		for (const HalfSpace& c : cons) {
			double v = 0.0;
			for (std::size_t j = 0; j < dim; ++j)
				v += c.g[j] * z(static_cast<Eigen::Index>(j));
			if (v > c.h + tol) {
				ok = false;
				break;
			}
		}
		if (ok)
			return true;
	} while (next_combination(idx, k));
	return false;
}

class ControlChecker {
public:
	ControlChecker(const ZoneModel& zone, const ForecastRow& row, Season season, double tol)
		: zone_(zone), row_(row), season_(season), tol_(tol) {
		normal_ = state_response(zone, row, std::nullopt);
		for (std::size_t c = 0; c < zone.contingencies.size(); ++c)
			contingency_.push_back(state_response(zone, row, c));
	}

	bool feasible(double battery, const std::vector<double>& curtailment) const {
		const std::size_t nb = zone_.buses.size();
		const std::size_t bat = zone_.battery.bus;
		std::vector<double> u(curtailment);
		u[bat] += battery;
		auto flows = [&](const StateResponse& s) {
			std::vector<double> f = s.base;
			for (std::size_t k = 0; k < nb; ++k)
				if (u[k] != 0.0)
					for (std::size_t l = 0; l < f.size(); ++l)
						f[l] += s.per_withdrawal[k][l] * u[k];
			return f;
		};
		auto rating = [&](std::size_t l, RatingKind kind) { return rating_value(select_ratings(zone_.lines[l], season_), kind); };

		auto fn = flows(normal_);
		for (std::size_t l = 0; l < zone_.lines.size(); ++l)
			if (std::abs(fn[l]) > rating(l, RatingKind::Permanent) + tol_)
				return false;

		for (const StateResponse& s : contingency_) {
			auto fc = flows(s);
			for (std::size_t l = 0; l < zone_.lines.size(); ++l)
				if (s.active[l] && std::abs(fc[l]) > rating(l, RatingKind::Immediate) + tol_)
					return false;

			// Curative stage: x = B^cur, y_k = C^cur_k.
			const double x_lo = zone_.battery.pmin_mw - battery;
			const double x_hi = zone_.battery.pmax_mw - battery;
			std::vector<std::size_t> curt;
			for (std::size_t k = 0; k < nb; ++k)
				if (row_.curtailable_max_mw[k] - curtailment[k] > 1e-12)
					curt.push_back(k);

			// Quick path without curative curtailment: a 1-D interval in x.
			double lo = x_lo;
			double hi = x_hi;
			bool possible = true;
			for (std::size_t l = 0; l < zone_.lines.size() && possible; ++l) {
				if (!s.active[l])
					continue;
				double slope = s.per_withdrawal[bat][l];
				for (RatingKind kind : {RatingKind::LongTerm, RatingKind::Permanent}) {
					double r = rating(l, kind) + tol_;
					if (std::abs(slope) < 1e-12) {
						if (std::abs(fc[l]) > r)
							possible = false;
						continue;
					}
					double a = (-r - fc[l]) / slope;
					double b = (r - fc[l]) / slope;
					lo = std::max(lo, std::min(a, b));
					hi = std::min(hi, std::max(a, b));
				}
			}
			if (possible && lo <= hi + 1e-12)
				continue;
			if (curt.empty())
				return false;

			const std::size_t dim = 1 + curt.size();
			std::vector<HalfSpace> cons;
			auto add = [&](std::vector<double> g, double h) { cons.push_back({std::move(g), h}); };
			{
				std::vector<double> g(dim, 0.0);
				g[0] = 1.0;
				add(g, x_hi);
				g[0] = -1.0;
				add(g, -x_lo);
			}
			for (std::size_t j = 0; j < curt.size(); ++j) {
				std::vector<double> g(dim, 0.0);
				g[1 + j] = 1.0;
				add(g, row_.curtailable_max_mw[curt[j]] - curtailment[curt[j]]);
				g[1 + j] = -1.0;
				add(g, 0.0);
			}
			for (std::size_t l = 0; l < zone_.lines.size(); ++l) {
				if (!s.active[l])
					continue;
				double slope = s.per_withdrawal[bat][l];
				double r_long = rating(l, RatingKind::LongTerm) + tol_;
				double r_perm = rating(l, RatingKind::Permanent) + tol_;
				std::vector<double> g(dim, 0.0);
				g[0] = slope;
				add(g, r_long - fc[l]);
				for (auto& v : g)
					v = -v;
				add(g, r_long + fc[l]);
				std::vector<double> p(dim, 0.0);
				p[0] = slope;
				for (std::size_t j = 0; j < curt.size(); ++j)
					p[1 + j] = s.per_withdrawal[curt[j]][l];
				add(p, r_perm - fc[l]);
				for (auto& v : p)
					v = -v;
				add(p, r_perm + fc[l]);
			}
			if (!polytope_nonempty(cons, dim, 1e-9))
				return false;
		}
		return true;
	}

private:
	const ZoneModel& zone_;
	const ForecastRow& row_;
	Season season_;
	double tol_;
	StateResponse normal_;
	std::vector<StateResponse> contingency_;
};

std::vector<double> grid(double lo, double hi, double step) {
	std::vector<double> out;
	for (std::size_t k = 0;; ++k) {
		double v = lo + static_cast<double>(k) * step;
		if (v >= hi - 1e-9 * std::max(1.0, std::abs(hi)))
			break;
		out.push_back(v);
	}
	out.push_back(hi);
	return out;
}

} // namespace

bool oracle_controls_feasible(const ZoneModel& zone, const ForecastRow& row, Season season, double battery_mw,
	const std::vector<double>& curtailment, double tolerance) {
	ControlChecker checker(zone, row, season, tolerance);
	return checker.feasible(battery_mw, curtailment);
}

OracleBandwidth brute_force_power_bandwidth(const ZoneModel& zone, const ForecastRow& row, Season season,
	const GridSearchConfig& config) {
	if (zone.buses.size() > 5 || zone.contingencies.size() > 3)
		throw OracleGuardError(fmt::format("grid-search oracle is limited to 5 buses and 3 contingencies (got {} and {})",
			zone.buses.size(), zone.contingencies.size()));
	if (!(config.power_resolution > 0.0) || !(config.curtailment_resolution > 0.0))
		throw OracleGuardError("grid-search resolutions must be > 0");
	ControlChecker checker(zone, row, season, config.tolerance);
	const std::size_t nb = zone.buses.size();
	const auto b_grid = grid(zone.battery.pmin_mw, zone.battery.pmax_mw, config.power_resolution);

	OracleBandwidth out;
	const std::vector<double> none(nb, 0.0);
	for (double b : b_grid)
		if (checker.feasible(b, none)) {
			out.feasible = true;
			out.b_lower = b;
			break;
		}
	if (out.feasible) {
		for (auto it = b_grid.rbegin(); it != b_grid.rend(); ++it)
			if (checker.feasible(*it, none)) {
				out.b_upper = *it;
				break;
			}
		return out;
	}

	std::vector<std::size_t> curt;
	for (std::size_t k = 0; k < nb; ++k)
		if (row.curtailable_max_mw[k] > 0.0)
			curt.push_back(k);
	if (curt.empty())
		return out;

	if (curt.size() == 1) {
		const std::size_t k = curt[0];
		const auto c_grid = grid(0.0, row.curtailable_max_mw[k], config.curtailment_resolution);
		std::vector<std::optional<double>> c_low(b_grid.size());
		for (std::size_t i = 0; i < b_grid.size(); ++i) {
			std::vector<double> c(nb, 0.0);
			for (std::size_t j = 1; j < c_grid.size(); ++j) {
				c[k] = c_grid[j];
				if (!checker.feasible(b_grid[i], c))
					continue;
				double lo = c_grid[j - 1];
				double hi = c_grid[j];
				for (int it = 0; it < 60; ++it) {
					c[k] = 0.5 * (lo + hi);
					(checker.feasible(b_grid[i], c) ? hi : lo) = c[k];
				}
				c_low[i] = hi;
				break;
			}
		}
		double best = kInfinity;
		for (const auto& v : c_low)
			if (v)
				best = std::min(best, *v);
		if (best == kInfinity)
			return out;
		for (std::size_t i = 0; i < b_grid.size(); ++i) {
			if (!c_low[i] || *c_low[i] > best + 1e-6)
				continue;
			if (!out.feasible)
				out.b_lower = b_grid[i];
			out.b_upper = b_grid[i];
			out.feasible = true;
		}
		out.curtailment_total = best;
		return out;
	}

	// Several curtailable buses: curtailment vectors on a grid, by total.
	std::vector<std::vector<double>> axes;
	double points = 1.0;
	for (std::size_t k : curt) {
		axes.push_back(grid(0.0, row.curtailable_max_mw[k], config.curtailment_resolution));
		points *= static_cast<double>(axes.back().size());
	}
	if (points > static_cast<double>(config.max_curtailment_points))
		throw OracleGuardError(fmt::format("grid-search oracle: {} curtailment grid points exceed the guard", points));
	std::vector<std::vector<double>> combos;
	std::vector<std::size_t> pos(curt.size(), 0);
	while (true) {
		std::vector<double> c(nb, 0.0);
		for (std::size_t j = 0; j < curt.size(); ++j)
			c[curt[j]] = axes[j][pos[j]];
		combos.push_back(std::move(c));
		std::size_t j = 0;
		while (j < curt.size() && ++pos[j] == axes[j].size())
			pos[j++] = 0;
		if (j == curt.size())
			break;
	}
	auto total = [](const std::vector<double>& c) { return std::accumulate(c.begin(), c.end(), 0.0); };
	std::stable_sort(combos.begin(), combos.end(), [&](const auto& a, const auto& b) { return total(a) < total(b); });
	std::optional<double> level;
	for (const auto& c : combos) {
		if (level && total(c) > *level + 1e-9)
			break;
		for (double b : b_grid) {
			if (!checker.feasible(b, c))
				continue;
			level = total(c);
			if (!out.feasible || b < out.b_lower)
				out.b_lower = b;
			if (!out.feasible || b > out.b_upper)
				out.b_upper = b;
			out.feasible = true;
		}
	}
	if (level)
		out.curtailment_total = *level;
	return out;
}

// ---------------------------------------------------------------------------
// Forward SoC propagation

namespace {

enum class Probe { Feasible, TooLow, TooHigh };

Probe probe(const std::vector<EffectiveBand>& bands, std::size_t start, double soc, double dt, double sc_min, double sc_max) {
	double lo = soc;
	double hi = soc;
	for (std::size_t t = start; t < bands.size(); ++t) {
		if (hi < bands[t].soc_floor - 1e-12)
			return Probe::TooLow;
		if (lo > bands[t].soc_ceiling + 1e-12)
			return Probe::TooHigh;
		lo = std::max(lo, bands[t].soc_floor);
		hi = std::min(hi, bands[t].soc_ceiling);
		double next_lo = lo + dt * bands[t].lower;
		double next_hi = hi + dt * bands[t].upper;
		if (next_hi < sc_min - 1e-12)
			return Probe::TooLow;
		if (next_lo > sc_max + 1e-12)
			return Probe::TooHigh;
		lo = std::max(next_lo, sc_min);
		hi = std::min(next_hi, sc_max);
	}
	return Probe::Feasible;
}

} // namespace

std::vector<SocInterval> forward_soc_feasible_set(const std::vector<EffectiveBand>& bands, const ZoneModel& zone) {
	const double dt = zone.timestep_hours;
	const double sc_min = zone.battery.soc_min_mwh;
	const double sc_max = zone.battery.capacity_mwh;
	std::vector<SocInterval> out(bands.size() + 1);
	for (std::size_t start = 0; start <= bands.size(); ++start) {
		bool broken = false;
		for (std::size_t t = start; t < bands.size(); ++t)
			broken = broken || bands[t].lower > bands[t].upper + 1e-12;
		if (broken)
			continue;
		auto test = [&](double s) { return probe(bands, start, s, dt, sc_min, sc_max); };
		std::optional<double> inside;
		Probe at_min = test(sc_min);
		Probe at_max = test(sc_max);
		if (at_min == Probe::Feasible)
			inside = sc_min;
		else if (at_max == Probe::Feasible)
			inside = sc_max;
		else if (at_min == Probe::TooLow && at_max == Probe::TooHigh) {
			double lo = sc_min;
			double hi = sc_max;
			for (int it = 0; it < 200 && !inside; ++it) {
				double mid = 0.5 * (lo + hi);
				Probe p = test(mid);
				if (p == Probe::Feasible)
					inside = mid;
				else if (p == Probe::TooLow)
					lo = mid;
				else
					hi = mid;
			}
		}
		if (!inside)
			continue;
		SocInterval& iv = out[start];
		iv.empty = false;
		if (at_max == Probe::Feasible) {
			iv.upper = sc_max;
		} else {
			double a = *inside;
			double b = sc_max;
			for (int it = 0; it < 200; ++it) {
				double mid = 0.5 * (a + b);
				(test(mid) == Probe::Feasible ? a : b) = mid;
			}
			iv.upper = a;
		}
		if (at_min == Probe::Feasible) {
			iv.lower = sc_min;
		} else {
			double a = sc_min;
			double b = *inside;
			for (int it = 0; it < 200; ++it) {
				double mid = 0.5 * (a + b);
				(test(mid) == Probe::Feasible ? b : a) = mid;
			}
			iv.lower = b;
		}
	}
	return out;
}

// ---------------------------------------------------------------------------
// Random instances

namespace {

std::optional<RandomInstance> try_random_instance(std::mt19937_64& rng) {
	auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
	auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
	auto chance = [&](double p) { return uniform(0.0, 1.0) < p; };

	const int nz = uniform_int(2, 4);
	const int nx = uniform_int(1, 2);
	std::vector<std::string> buses;
	for (int i = 0; i < nz; ++i)
		buses.push_back(fmt::format("z{}", i));
	for (int i = 0; i < nx; ++i)
		buses.push_back(fmt::format("x{}", i));
	buses.push_back("slack");
	const std::size_t slack = buses.size() - 1;

	std::vector<FullNetwork::Branch> branches;
	std::vector<std::string> internal;
	for (int i = 1; i < nz; ++i) {
		int j = uniform_int(0, i - 1);
		branches.push_back({fmt::format("z{}-z{}", j, i), static_cast<std::size_t>(j), static_cast<std::size_t>(i), uniform(0.02, 0.2)});
		internal.push_back(branches.back().id);
	}
	if (nz >= 3 && chance(0.4)) {
		int a = uniform_int(0, nz - 1);
		int b = uniform_int(0, nz - 1);
		if (a != b) {
			branches.push_back({fmt::format("z{}-z{}b", a, b), static_cast<std::size_t>(a), static_cast<std::size_t>(b), uniform(0.02, 0.2)});
			internal.push_back(branches.back().id);
		}
	}
	std::vector<std::string> outbound;
	const int no = uniform_int(1, 2);
	for (int k = 0; k < no; ++k) {
		int z = uniform_int(0, nz - 1);
		int x = nz + uniform_int(0, nx - 1);
		branches.push_back({fmt::format("out{}", k), static_cast<std::size_t>(z), static_cast<std::size_t>(x), uniform(0.05, 0.2)});
		outbound.push_back(branches.back().id);
	}
	std::vector<std::string> external;
	for (int i = 0; i < nx; ++i) {
		int circuits = uniform_int(1, 2);
		for (int c = 0; c < circuits; ++c) {
			branches.push_back({fmt::format("x{}-slack-{}", i, c), static_cast<std::size_t>(nz + i), slack, uniform(0.05, 0.3)});
			external.push_back(branches.back().id);
		}
	}
	if (nx == 2 && chance(0.5)) {
		branches.push_back({"x0-x1", static_cast<std::size_t>(nz), static_cast<std::size_t>(nz + 1), uniform(0.05, 0.3)});
		external.push_back("x0-x1");
	}

	ZoneSpecification spec(FullNetwork(buses, branches, slack));
	spec.name = "random";
	spec.zone_buses.assign(buses.begin(), buses.begin() + nz);
	spec.outbound_branches = outbound;
	spec.battery_bus = spec.zone_buses[static_cast<std::size_t>(uniform_int(0, nz - 1))];
	const double pmax = uniform(5.0, 20.0);
	spec.battery_pmax_mw = pmax;
	spec.battery_pmin_mw = -pmax * uniform(0.5, 1.0);
	spec.battery_capacity_mwh = 2.0 * pmax;

	// Candidate outages keep the grid connected and leave every zone island an outbound line.
	std::vector<std::string> candidates;
	for (const auto& id : internal)
		candidates.push_back(id);
	for (const auto& id : external)
		candidates.push_back(id);
	std::shuffle(candidates.begin(), candidates.end(), rng);
	const int want = uniform_int(0, 2);
	for (const auto& id : candidates) {
		if (static_cast<int>(spec.contingencies.size()) >= want)
			break;
		std::size_t branch = spec.network.branch_index(id);
		if (!spec.network.is_connected({branch}))
			continue;
		spec.contingencies.push_back({fmt::format("n-{}", id), id});
	}

	std::vector<double> injections(buses.size(), 0.0);
	for (int i = 0; i < nz; ++i)
		injections[static_cast<std::size_t>(i)] = uniform(-30.0, 60.0);
	for (int i = 0; i < nx; ++i)
		injections[static_cast<std::size_t>(nz + i)] = uniform(-60.0, 60.0);

	// Ratings sized around the uncontrolled flows so some instances congest.
	std::vector<double> normal = spec.network.flows(injections);
	std::vector<double> worst(branches.size(), 0.0);
	for (const auto& c : spec.contingencies) {
		auto f = spec.network.flows(injections, {spec.network.branch_index(c.branch)});
		for (std::size_t b = 0; b < f.size(); ++b)
			worst[b] = std::max(worst[b], std::abs(f[b]));
	}
	for (const auto& id : internal) {
		std::size_t b = spec.network.branch_index(id);
		RatingSet r;
		r.permanent = std::max(3.0, std::abs(normal[b]) * uniform(0.85, 1.25));
		r.immediate = std::max(r.permanent * uniform(1.05, 1.4), worst[b] * uniform(0.9, 1.2));
		r.long_term = r.permanent + (r.immediate - r.permanent) * uniform(0.1, 0.8);
		spec.internal_lines.push_back({id, r, r});
	}

	ZoneModel zone;
	try {
		zone = build_zone(spec);
	} catch (const InputError&) {
		return std::nullopt;
	}
	std::vector<double> cmax(zone.buses.size(), 0.0);
	cmax[static_cast<std::size_t>(uniform_int(0, nz - 1))] = chance(0.85) ? uniform(5.0, 30.0) : 0.0;
	ForecastRow row = build_forecast_row(spec, zone, injections, cmax, Season::Summer, "t0");
	try {
		validate_forecast_row(zone, row, 0);
	} catch (const InputError&) {
		return std::nullopt;
	}
	return RandomInstance{std::move(spec), std::move(zone), std::move(row)};
}

} // namespace

RandomInstance random_instance(std::uint64_t seed) {
	std::mt19937_64 rng(seed);
	for (int attempt = 0; attempt < 1000; ++attempt)
		if (auto inst = try_random_instance(rng))
			return std::move(*inst);
	throw OracleGuardError(fmt::format("random instance generation failed for seed {}", seed));
}

std::vector<PowerBandwidthResult> random_power_series(std::uint64_t seed, const ZoneModel& zone, std::size_t length) {
	std::mt19937_64 rng(seed);
	auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
	auto chance = [&](double p) { return uniform(0.0, 1.0) < p; };
	const double pmin = zone.battery.pmin_mw;
	const double pmax = zone.battery.pmax_mw;
	std::vector<PowerBandwidthResult> out(length);
	for (std::size_t t = 0; t < length; ++t) {
		PowerBandwidthResult& r = out[t];
		r.timestep = t;
		r.timestamp = fmt::format("t{}", t);
		r.lower_status = r.upper_status = LpStatus::Optimal;
		r.congestion = CongestionClass::Reduced;
		r.b_lower = pmin;
		r.b_upper = pmax;
		double u = uniform(0.0, 1.0);
		if (u < 0.08) {
			r.b_lower = uniform(0.0, pmax);
		} else if (u < 0.16) {
			r.b_upper = uniform(pmin, 0.0);
		} else if (u < 0.35) {
			double a = uniform(pmin, pmax);
			double b = uniform(pmin, pmax);
			r.b_lower = std::min(a, b);
			r.b_upper = std::max(a, b);
		} else if (u < 0.37) {
			r.b_lower = r.b_upper = uniform(pmin, pmax);
		} else {
			r.congestion = CongestionClass::FullyAvailable;
		}
		if (chance(0.2))
			r.curative_charge_worst = uniform(0.0, 6.0);
		if (chance(0.2))
			r.curative_discharge_worst = -uniform(0.0, 6.0);
	}
	return out;
}

} // namespace bwe
