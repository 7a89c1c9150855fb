#include "bwe/lp_core.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <ostream>
#include <stdexcept>
#include <string_view>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace bwe {

std::size_t LinearProgram::add_variable(std::string name, double lower, double upper, double cost) {
	variables_.push_back(LpVariable{std::move(name), lower, upper, cost});
	return variables_.size() - 1;
}

std::size_t LinearProgram::add_constraint(std::string name, std::vector<Term> terms, Relation relation, double rhs) {
	constraints_.push_back(LpConstraint{std::move(name), std::move(terms), relation, rhs});
	return constraints_.size() - 1;
}

void LinearProgram::set_bounds(std::size_t variable, double lower, double upper) {
	variables_.at(variable).lower = lower;
	variables_.at(variable).upper = upper;
}

double LinearProgram::objective_value(const std::vector<double>& values) const {
	double total = objective_constant_;
	for (std::size_t j = 0; j < variables_.size(); ++j)
		total += variables_[j].cost * values[j];
	return total;
}

double LinearProgram::row_activity(std::size_t constraint, const std::vector<double>& values) const {
	double total = 0.0;
	for (const Term& term : constraints_.at(constraint).terms)
		total += term.coefficient * values[term.variable];
	return total;
}

void LinearProgram::validate() const {
	for (const auto& v : variables_) {
		if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower == kInfinity || v.upper == -kInfinity)
			throw std::invalid_argument(fmt::format("variable '{}': invalid bounds", v.name));
		if (v.lower > v.upper)
			throw std::invalid_argument(fmt::format("variable '{}': lower bound exceeds upper bound", v.name));
		if (!std::isfinite(v.cost))
			throw std::invalid_argument(fmt::format("variable '{}': non-finite cost", v.name));
	}
	for (const auto& c : constraints_) {
		if (!std::isfinite(c.rhs))
			throw std::invalid_argument(fmt::format("constraint '{}': non-finite right-hand side", c.name));
		for (const Term& t : c.terms) {
			if (t.variable >= variables_.size())
				throw std::invalid_argument(fmt::format("constraint '{}': references an undeclared variable", c.name));
			if (!std::isfinite(t.coefficient))
				throw std::invalid_argument(fmt::format("constraint '{}': non-finite coefficient", c.name));
		}
	}
	if (!std::isfinite(objective_constant_))
		throw std::invalid_argument("non-finite objective constant");
}

std::string to_string(LpStatus status) {
	switch (status) {
	case LpStatus::Optimal:
		return "optimal";
	case LpStatus::Infeasible:
		return "infeasible";
	case LpStatus::Unbounded:
		return "unbounded";
	case LpStatus::NumericallyUnstable:
		return "numerically_unstable";
	}
	return "unknown";
}

namespace {

double row_scale(const LpConstraint& c) {
	double largest = 0.0;
	for (const Term& t : c.terms)
		largest = std::max(largest, std::abs(t.coefficient));
	return std::max(1.0, largest);
}

void row_bounds(const LpConstraint& c, double& lower, double& upper) {
	lower = c.relation == Relation::LessEqual ? -kInfinity : c.rhs;
	upper = c.relation == Relation::GreaterEqual ? kInfinity : c.rhs;
}

} // namespace

std::vector<Violation> check_solution(const LinearProgram& lp, const std::vector<double>& values, double tolerance) {
	std::vector<Violation> report;
	if (values.size() != lp.variable_count())
		throw std::invalid_argument("check_solution: value vector does not match the variables");
	for (std::size_t j = 0; j < lp.variable_count(); ++j) {
		const LpVariable& v = lp.variables()[j];
		if (values[j] < v.lower - tolerance)
			report.push_back({Violation::Kind::LowerBound, j, v.name, v.lower - values[j]});
		else if (values[j] > v.upper + tolerance)
			report.push_back({Violation::Kind::UpperBound, j, v.name, values[j] - v.upper});
	}
	for (std::size_t i = 0; i < lp.constraint_count(); ++i) {
		const LpConstraint& c = lp.constraints()[i];
		double activity = lp.row_activity(i, values);
		double lower = 0.0;
		double upper = 0.0;
		row_bounds(c, lower, upper);
		double breach = std::max(lower - activity, activity - upper);
		if (breach > tolerance * row_scale(c))
			report.push_back({Violation::Kind::Constraint, i, c.name, breach});
	}
	return report;
}

double dual_bound(const LinearProgram& lp, const std::vector<double>& duals, double tolerance) {
	std::vector<double> reduced(lp.variable_count());
	for (std::size_t j = 0; j < lp.variable_count(); ++j)
		reduced[j] = lp.variables()[j].cost;
	double bound = lp.objective_constant();
	for (std::size_t i = 0; i < lp.constraint_count(); ++i) {
		const LpConstraint& c = lp.constraints()[i];
		for (const Term& t : c.terms)
			reduced[t.variable] -= duals[i] * t.coefficient;
		double lower = 0.0;
		double upper = 0.0;
		row_bounds(c, lower, upper);
		double y = std::abs(duals[i]) <= tolerance ? 0.0 : duals[i];
		if (y > 0.0)
			bound += lower == -kInfinity ? -kInfinity : y * lower;
		else if (y < 0.0)
			bound += upper == kInfinity ? -kInfinity : y * upper;
	}
	for (std::size_t j = 0; j < lp.variable_count(); ++j) {
		const LpVariable& v = lp.variables()[j];
		double d = std::abs(reduced[j]) <= tolerance ? 0.0 : reduced[j];
		if (d > 0.0)
			bound += v.lower == -kInfinity ? -kInfinity : d * v.lower;
		else if (d < 0.0)
			bound += v.upper == kInfinity ? -kInfinity : d * v.upper;
	}
	return bound;
}

namespace {

enum class Position { Basic, AtLower, AtUpper, FreeZero };

// Dense tableau in computational form [A | -I | artificials] x = 0 where
// the logical column of row i carries that row's bounds.
class Tableau {
public:
	Tableau(const LinearProgram& lp, const SimplexOptions& options, bool bland)
		: opt_(options), bland_(bland || options.force_bland) {
		n_ = lp.variable_count();
		m_ = lp.constraint_count();
		scale_.assign(m_, 1.0);
		if (opt_.scale_rows)
			for (std::size_t i = 0; i < m_; ++i)
				scale_[i] = std::exp2(std::round(std::log2(row_scale(lp.constraints()[i]))));

		// Artificial columns are appended after we know which rows start infeasible.
		std::vector<double> lower(n_ + m_);
		std::vector<double> upper(n_ + m_);
		std::vector<double> x(n_ + m_, 0.0);
		std::vector<Position> pos(n_ + m_);
		for (std::size_t j = 0; j < n_; ++j) {
			const LpVariable& v = lp.variables()[j];
			lower[j] = v.lower;
			upper[j] = v.upper;
			if (std::isfinite(v.lower)) {
				x[j] = v.lower;
				pos[j] = Position::AtLower;
			} else if (std::isfinite(v.upper)) {
				x[j] = v.upper;
				pos[j] = Position::AtUpper;
			} else {
				x[j] = 0.0;
				pos[j] = Position::FreeZero;
			}
		}
		std::vector<double> dense(m_ * n_, 0.0);
		for (std::size_t i = 0; i < m_; ++i) {
			const LpConstraint& c = lp.constraints()[i];
			for (const Term& t : c.terms)
				dense[i * n_ + t.variable] += t.coefficient / scale_[i];
			double lo = 0.0;
			double hi = 0.0;
			row_bounds(c, lo, hi);
			lower[n_ + i] = lo / scale_[i];
			upper[n_ + i] = hi / scale_[i];
		}

		std::vector<double> activity(m_, 0.0);
		std::vector<int> artificial_sign(m_, 0);
		for (std::size_t i = 0; i < m_; ++i) {
			double v = 0.0;
			for (std::size_t j = 0; j < n_; ++j)
				v += dense[i * n_ + j] * x[j];
			activity[i] = v;
			if (v < lower[n_ + i] - opt_.feasibility_tolerance * 1e-3)
				artificial_sign[i] = 1;
			else if (v > upper[n_ + i] + opt_.feasibility_tolerance * 1e-3)
				artificial_sign[i] = -1;
		}
		k_ = static_cast<std::size_t>(std::count_if(artificial_sign.begin(), artificial_sign.end(), [](int s) { return s != 0; }));
		cols_ = n_ + m_ + k_;
		lower.resize(cols_, 0.0);
		upper.resize(cols_, kInfinity);
		x.resize(cols_, 0.0);
		pos.resize(cols_, Position::AtLower);
		lower_ = std::move(lower);
		upper_ = std::move(upper);
		x_ = std::move(x);
		pos_ = std::move(pos);

		// Structural cost for phase 2, unscaled.
		cost_.assign(cols_, 0.0);
		for (std::size_t j = 0; j < n_; ++j)
			cost_[j] = lp.variables()[j].cost;

		t_.assign(m_ * cols_, 0.0);
		basis_.assign(m_, 0);
		std::size_t next_artificial = n_ + m_;
		for (std::size_t i = 0; i < m_; ++i) {
			double* row = &t_[i * cols_];
			if (artificial_sign[i] == 0) {
				// Logical basic: B^-1 row is -e_i.
				for (std::size_t j = 0; j < n_; ++j)
					row[j] = -dense[i * n_ + j];
				row[n_ + i] = 1.0;
				basis_[i] = n_ + i;
				pos_[n_ + i] = Position::Basic;
				x_[n_ + i] = activity[i];
			} else {
				double sigma = artificial_sign[i];
				std::size_t a = next_artificial++;
				for (std::size_t j = 0; j < n_; ++j)
					row[j] = sigma * dense[i * n_ + j];
				row[n_ + i] = -sigma;
				row[a] = 1.0;
				basis_[i] = a;
				pos_[a] = Position::Basic;
				double beta = sigma > 0 ? lower_[n_ + i] : upper_[n_ + i];
				x_[n_ + i] = beta;
				pos_[n_ + i] = sigma > 0 ? Position::AtLower : Position::AtUpper;
				x_[a] = sigma * (beta - activity[i]);
			}
		}
		dense_ = std::move(dense);
		limit_ = opt_.max_iterations ? opt_.max_iterations : 50 * (m_ + cols_) + 1000;
	}

	LpSolution run(const LinearProgram& lp) {
		LpSolution sol;
		if (k_ > 0) {
			std::vector<double> phase1(cols_, 0.0);
			for (std::size_t j = n_ + m_; j < cols_; ++j)
				phase1[j] = 1.0;
			auto outcome = iterate(phase1);
			if (outcome != Outcome::Optimal) {
				sol.status = LpStatus::NumericallyUnstable;
				sol.iterations = iterations_;
				return sol;
			}
			double infeasibility = 0.0;
			for (std::size_t j = n_ + m_; j < cols_; ++j)
				infeasibility += x_[j];
			if (infeasibility > opt_.feasibility_tolerance) {
				sol.status = LpStatus::Infeasible;
				sol.iterations = iterations_;
				return sol;
			}
			for (std::size_t j = n_ + m_; j < cols_; ++j) {
				upper_[j] = 0.0;
				if (pos_[j] != Position::Basic) {
					x_[j] = 0.0;
					pos_[j] = Position::AtLower;
				}
			}
			drive_out_artificials();
			recompute_basics();
		}
		auto outcome = iterate(cost_);
		sol.iterations = iterations_;
		if (outcome == Outcome::Limit) {
			sol.status = LpStatus::NumericallyUnstable;
			return sol;
		}
		if (outcome == Outcome::Unbounded) {
			sol.status = LpStatus::Unbounded;
			return sol;
		}
		if (!refactor()) {
			sol.status = LpStatus::NumericallyUnstable;
			return sol;
		}
		sol.status = LpStatus::Optimal;
		sol.values.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
		sol.reduced_costs.assign(d_.begin(), d_.begin() + static_cast<std::ptrdiff_t>(n_));
		sol.duals.resize(m_);
		for (std::size_t i = 0; i < m_; ++i)
			sol.duals[i] = d_[n_ + i] / scale_[i];
		sol.objective = lp.objective_value(sol.values);
		return sol;
	}

private:
	enum class Outcome { Optimal, Unbounded, Limit };

	double& at(std::size_t i, std::size_t j) { return t_[i * cols_ + j]; }

	void reduced_costs(const std::vector<double>& c) {
		d_ = c;
		for (std::size_t i = 0; i < m_; ++i) {
			double cb = c[basis_[i]];
			if (cb == 0.0)
				continue;
			const double* row = &t_[i * cols_];
			for (std::size_t j = 0; j < cols_; ++j)
				d_[j] -= cb * row[j];
		}
		for (std::size_t i = 0; i < m_; ++i)
			d_[basis_[i]] = 0.0;
	}

	void recompute_basics() {
		for (std::size_t i = 0; i < m_; ++i) {
			const double* row = &t_[i * cols_];
			double v = 0.0;
			for (std::size_t j = 0; j < cols_; ++j)
				if (pos_[j] != Position::Basic && x_[j] != 0.0)
					v -= row[j] * x_[j];
			x_[basis_[i]] = v;
		}
	}

	bool fixed(std::size_t j) const { return lower_[j] == upper_[j]; }

	// Entering column and direction, or cols_ when optimal.
	std::size_t price(int& direction) const {
		std::size_t best = cols_;
		double best_score = 0.0;
		const double tol = opt_.optimality_tolerance;
		for (std::size_t j = 0; j < cols_; ++j) {
			if (pos_[j] == Position::Basic || fixed(j))
				continue;
			double d = d_[j];
			int dir = 0;
			if (pos_[j] == Position::AtLower && d < -tol)
				dir = 1;
			else if (pos_[j] == Position::AtUpper && d > tol)
				dir = -1;
			else if (pos_[j] == Position::FreeZero && std::abs(d) > tol)
				dir = d < 0 ? 1 : -1;
			if (dir == 0)
				continue;
			if (bland_) {
				direction = dir;
				return j;
			}
			if (std::abs(d) > best_score) {
				best_score = std::abs(d);
				best = j;
				direction = dir;
			}
		}
		return best;
	}

	void pivot(std::size_t r, std::size_t q) {
		double* prow = &t_[r * cols_];
		double inv = 1.0 / prow[q];
		for (std::size_t j = 0; j < cols_; ++j)
			prow[j] *= inv;
		prow[q] = 1.0;
		for (std::size_t i = 0; i < m_; ++i) {
			if (i == r)
				continue;
			double* row = &t_[i * cols_];
			double f = row[q];
			if (f == 0.0)
				continue;
			for (std::size_t j = 0; j < cols_; ++j)
				row[j] -= f * prow[j];
			row[q] = 0.0;
		}
		double dq = d_[q];
		if (dq != 0.0) {
			for (std::size_t j = 0; j < cols_; ++j)
				d_[j] -= dq * prow[j];
			d_[q] = 0.0;
		}
		basis_[r] = q;
		pos_[q] = Position::Basic;
	}

	Outcome iterate(const std::vector<double>& c) {
		reduced_costs(c);
		bool entry_bland = bland_;
		std::size_t degenerate = 0;
		std::size_t since_refresh = 0;
		while (true) {
			if (iterations_ >= limit_)
				return Outcome::Limit;
			int dir = 0;
			std::size_t q = price(dir);
			if (q == cols_)
				break;
			++iterations_;

			// Ratio test over basic variables plus the entering bound flip.
			double step = kInfinity;
			if (std::isfinite(lower_[q]) && std::isfinite(upper_[q]))
				step = upper_[q] - lower_[q];
			std::size_t leave = m_;
			double leave_alpha = 0.0;
			for (std::size_t i = 0; i < m_; ++i) {
				double alpha = dir * at(i, q);
				std::size_t b = basis_[i];
				double ratio;
				if (alpha > opt_.pivot_tolerance && std::isfinite(lower_[b]))
					ratio = std::max(0.0, (x_[b] - lower_[b]) / alpha);
				else if (alpha < -opt_.pivot_tolerance && std::isfinite(upper_[b]))
					ratio = std::max(0.0, (upper_[b] - x_[b]) / -alpha);
				else
					continue;
				bool better = ratio < step - 1e-12;
				bool tie = !better && ratio <= step + 1e-12 && leave != m_;
				if (tie)
					better = bland_ ? b < basis_[leave] : std::abs(alpha) > std::abs(leave_alpha);
				if (better) {
					step = ratio;
					leave = i;
					leave_alpha = alpha;
				}
			}
			if (step == kInfinity)
				return Outcome::Unbounded;

			degenerate = step <= 1e-12 ? degenerate + 1 : 0;
			if (degenerate > opt_.degenerate_switch)
				bland_ = true;

			if (step != 0.0) {
				x_[q] += dir * step;
				for (std::size_t i = 0; i < m_; ++i) {
					double a = at(i, q);
					if (a != 0.0)
						x_[basis_[i]] -= dir * a * step;
				}
			}
			if (leave == m_) {
				pos_[q] = dir > 0 ? Position::AtUpper : Position::AtLower;
				x_[q] = dir > 0 ? upper_[q] : lower_[q];
			} else {
				std::size_t out = basis_[leave];
				bool to_lower = leave_alpha > 0;
				x_[out] = to_lower ? lower_[out] : upper_[out];
				pos_[out] = to_lower ? Position::AtLower : Position::AtUpper;
				pivot(leave, q);
			}
			if (++since_refresh >= 64) {
				recompute_basics();
				since_refresh = 0;
			}
		}
		bland_ = entry_bland;
		return Outcome::Optimal;
	}

	void drive_out_artificials() {
		for (std::size_t r = 0; r < m_; ++r) {
			if (basis_[r] < n_ + m_)
				continue;
			std::size_t best = cols_;
			double best_abs = 1e-7;
			for (std::size_t j = 0; j < n_ + m_; ++j) {
				if (pos_[j] == Position::Basic)
					continue;
				double a = std::abs(at(r, j));
				if (a > best_abs) {
					best_abs = a;
					best = j;
				}
			}
			if (best == cols_)
				continue;
			std::size_t out = basis_[r];
			d_.assign(cols_, 0.0);
			pivot(r, best);
			x_[out] = 0.0;
			pos_[out] = Position::AtLower;
		}
	}

	// Recomputes basic values and reduced costs from a fresh factorization
	// of the basis and rejects the result if it drifted.
	bool refactor() {
		const auto m = static_cast<Eigen::Index>(m_);
		Eigen::VectorXd x_nonbasic_effect = Eigen::VectorXd::Zero(m);
		Eigen::MatrixXd basis_matrix = Eigen::MatrixXd::Zero(m, m);
		auto column = [&](std::size_t j, Eigen::VectorXd& out) {
			out.setZero(m);
			if (j < n_) {
				for (std::size_t i = 0; i < m_; ++i)
					out(static_cast<Eigen::Index>(i)) = dense_[i * n_ + j];
			} else if (j < n_ + m_) {
				out(static_cast<Eigen::Index>(j - n_)) = -1.0;
			} else {
				// Artificial columns are recovered from the original orientation.
				out = artificial_column(j);
			}
		};
		Eigen::VectorXd col(m);
		for (std::size_t i = 0; i < m_; ++i) {
			column(basis_[i], col);
			basis_matrix.col(static_cast<Eigen::Index>(i)) = col;
		}
		for (std::size_t j = 0; j < cols_; ++j) {
			if (pos_[j] == Position::Basic || x_[j] == 0.0)
				continue;
			column(j, col);
			x_nonbasic_effect += col * x_[j];
		}
		if (m_ > 0) {
			Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
			if (!(std::abs(lu.determinant()) > 0.0))
				return false;
			Eigen::VectorXd xb = lu.solve(-x_nonbasic_effect);
			Eigen::VectorXd cb(m);
			for (std::size_t i = 0; i < m_; ++i)
				cb(static_cast<Eigen::Index>(i)) = cost_[basis_[i]];
			Eigen::VectorXd y = lu.transpose().solve(cb);
			for (std::size_t i = 0; i < m_; ++i) {
				double v = xb(static_cast<Eigen::Index>(i));
				if (!std::isfinite(v))
					return false;
				x_[basis_[i]] = v;
			}
			d_ = cost_;
			for (std::size_t j = 0; j < cols_; ++j) {
				column(j, col);
				d_[j] -= y.dot(col);
			}
			for (std::size_t i = 0; i < m_; ++i)
				d_[basis_[i]] = 0.0;
		} else {
			d_ = cost_;
		}
		const double tol = opt_.feasibility_tolerance;
		for (std::size_t i = 0; i < m_; ++i) {
			std::size_t b = basis_[i];
			if (x_[b] < lower_[b] - tol || x_[b] > upper_[b] + tol)
				return false;
		}
		return true;
	}

	Eigen::VectorXd artificial_column(std::size_t j) const {
		// Each artificial was created for one row with a unit column +-e_i; its
		// orientation is stored implicitly by the initial tableau layout.
		Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
		out(static_cast<Eigen::Index>(artificial_row_.at(j - n_ - m_))) = artificial_sign_.at(j - n_ - m_);
		return out;
	}

public:
	void record_artificials() {
		artificial_row_.clear();
		artificial_sign_.clear();
		for (std::size_t j = n_ + m_; j < cols_; ++j) {
			for (std::size_t i = 0; i < m_; ++i) {
				if (basis_[i] == j) {
					artificial_row_.push_back(i);
					// Initial row i = sigma * M_i, so the logical entry is -sigma.
					artificial_sign_.push_back(-t_[i * cols_ + n_ + i]);
					break;
				}
			}
		}
	}

private:
	SimplexOptions opt_;
	bool bland_;
	std::size_t n_ = 0;
	std::size_t m_ = 0;
	std::size_t k_ = 0;
	std::size_t cols_ = 0;
	std::vector<double> scale_;
	std::vector<double> dense_;
	std::vector<double> lower_;
	std::vector<double> upper_;
	std::vector<double> x_;
	std::vector<Position> pos_;
	std::vector<double> cost_;
	std::vector<double> t_;
	std::vector<double> d_;
	std::vector<std::size_t> basis_;
	std::vector<std::size_t> artificial_row_;
	std::vector<double> artificial_sign_;
	std::size_t iterations_ = 0;
	std::size_t limit_ = 0;
};

LpSolution solve_once(const LinearProgram& lp, const SimplexOptions& options, bool bland) {
	Tableau tableau(lp, options, bland);
	tableau.record_artificials();
	return tableau.run(lp);
}

} // namespace

LpSolution DenseSimplexSolver::solve(const LinearProgram& lp) const {
	lp.validate();
	LpSolution sol = solve_once(lp, options_, false);
	auto acceptable = [&](const LpSolution& s) {
		if (s.status != LpStatus::Optimal)
			return s.status != LpStatus::NumericallyUnstable;
		return check_solution(lp, s.values, options_.feasibility_tolerance).empty();
	};
	if (acceptable(sol))
		return sol;
	std::size_t spent = sol.iterations;
	SimplexOptions retry = options_;
	retry.scale_rows = !options_.scale_rows;
	sol = solve_once(lp, retry, true);
	sol.iterations += spent;
	if (acceptable(sol))
		return sol;
	LpSolution failed;
	failed.status = LpStatus::NumericallyUnstable;
	failed.iterations = sol.iterations;
	return failed;
}

namespace {

std::string lp_name(char prefix, std::size_t index, const std::string& raw) {
	std::string out = fmt::format("{}{}_", prefix, index);
	for (char ch : raw) {
		bool ok = std::isalnum(static_cast<unsigned char>(ch)) || std::string_view("_.(){}#$%&!?@").find(ch) != std::string_view::npos;
		out.push_back(ok ? ch : '_');
	}
	return out;
}

void write_terms(std::ostream& out, const std::vector<std::pair<double, std::string>>& terms) {
	if (terms.empty()) {
		out << " 0";
		return;
	}
	bool first = true;
	for (const auto& [coef, name] : terms) {
		if (first)
			out << (coef < 0 ? " - " : " ");
		else
			out << (coef < 0 ? " - " : " + ");
		out << fmt::format("{} {}", std::abs(coef), name);
		first = false;
	}
}

} // namespace

void write_lp_format(const LinearProgram& lp, std::ostream& out) {
	std::vector<std::string> names;
	for (std::size_t j = 0; j < lp.variable_count(); ++j)
		names.push_back(lp_name('x', j, lp.variables()[j].name));
	out << "\\ objective constant " << fmt::format("{}", lp.objective_constant()) << '\n';
	out << "Minimize\n obj:";
	std::vector<std::pair<double, std::string>> objective;
	for (std::size_t j = 0; j < lp.variable_count(); ++j)
		if (lp.variables()[j].cost != 0.0)
			objective.emplace_back(lp.variables()[j].cost, names[j]);
	write_terms(out, objective);
	out << "\nSubject To\n";
	for (std::size_t i = 0; i < lp.constraint_count(); ++i) {
		const LpConstraint& c = lp.constraints()[i];
		out << ' ' << lp_name('c', i, c.name) << ':';
		std::vector<std::pair<double, std::string>> terms;
		for (const Term& t : c.terms)
			terms.emplace_back(t.coefficient, names[t.variable]);
		write_terms(out, terms);
		const char* rel = c.relation == Relation::LessEqual ? "<=" : c.relation == Relation::Equal ? "=" : ">=";
		out << ' ' << rel << ' ' << fmt::format("{}", c.rhs) << '\n';
	}
	out << "Bounds\n";
	for (std::size_t j = 0; j < lp.variable_count(); ++j) {
		const LpVariable& v = lp.variables()[j];
		if (v.lower == -kInfinity && v.upper == kInfinity)
			out << ' ' << names[j] << " free\n";
		else if (v.lower == -kInfinity)
			out << " -inf <= " << names[j] << " <= " << fmt::format("{}", v.upper) << '\n';
		else if (v.upper == kInfinity)
			out << ' ' << names[j] << " >= " << fmt::format("{}", v.lower) << '\n';
		else if (v.lower == v.upper)
			out << ' ' << names[j] << " = " << fmt::format("{}", v.lower) << '\n';
		else
			out << ' ' << fmt::format("{}", v.lower) << " <= " << names[j] << " <= " << fmt::format("{}", v.upper) << '\n';
	}
	out << "End\n";
}

} // namespace bwe
