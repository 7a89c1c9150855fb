#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace bwe {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Relation { LessEqual, Equal, GreaterEqual };

struct Term {
	std::size_t variable = 0;
	double coefficient = 0.0;
};

struct LpVariable {
	std::string name;
	double lower = 0.0;
	double upper = kInfinity;
	double cost = 0.0;
};

struct LpConstraint {
	std::string name;
	std::vector<Term> terms;
	Relation relation = Relation::LessEqual;
	double rhs = 0.0;
};

/// Minimization problem over bounded variables and linear rows.
class LinearProgram {
public:
	std::size_t add_variable(std::string name, double lower, double upper, double cost = 0.0);
	std::size_t add_constraint(std::string name, std::vector<Term> terms, Relation relation, double rhs);

	void set_cost(std::size_t variable, double cost) { variables_.at(variable).cost = cost; }
	void set_bounds(std::size_t variable, double lower, double upper);
	void set_objective_constant(double value) { objective_constant_ = value; }

	const std::vector<LpVariable>& variables() const { return variables_; }
	const std::vector<LpConstraint>& constraints() const { return constraints_; }
	std::size_t variable_count() const { return variables_.size(); }
	std::size_t constraint_count() const { return constraints_.size(); }
	double objective_constant() const { return objective_constant_; }

	double objective_value(const std::vector<double>& values) const;
	double row_activity(std::size_t constraint, const std::vector<double>& values) const;

	/// Throws std::invalid_argument on non-finite data, dangling indices or lower > upper.
	void validate() const;

private:
	std::vector<LpVariable> variables_;
	std::vector<LpConstraint> constraints_;
	double objective_constant_ = 0.0;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, NumericallyUnstable };

std::string to_string(LpStatus status);

struct LpSolution {
	LpStatus status = LpStatus::NumericallyUnstable;
	double objective = 0.0;
	std::vector<double> values;
	// Row multipliers: c = A^T y + reduced_costs at the optimum.
	std::vector<double> duals;
	std::vector<double> reduced_costs;
	std::size_t iterations = 0;

	bool optimal() const { return status == LpStatus::Optimal; }
};

struct Violation {
	enum class Kind { LowerBound, UpperBound, Constraint };
	Kind kind = Kind::Constraint;
	std::size_t index = 0;
	std::string name;
	double magnitude = 0.0;
};

/// Every bound or row breached beyond `tolerance`. Row tolerances scale with
/// the largest coefficient of the row.
std::vector<Violation> check_solution(const LinearProgram& lp, const std::vector<double>& values, double tolerance = 1e-6);

/// Lagrangian lower bound on the optimum for the given row multipliers.
/// Multipliers and reduced costs within `tolerance` of zero count as zero.
double dual_bound(const LinearProgram& lp, const std::vector<double>& duals, double tolerance = 1e-9);

class LpSolver {
public:
	virtual ~LpSolver() = default;
	virtual LpSolution solve(const LinearProgram& lp) const = 0;
	virtual std::string name() const = 0;
};

struct SimplexOptions {
	double feasibility_tolerance = 1e-6;
	double optimality_tolerance = 1e-9;
	double pivot_tolerance = 1e-9;
	std::size_t degenerate_switch = 50;
	bool scale_rows = true;
	bool force_bland = false;
	std::size_t max_iterations = 0; // 0 selects a size-based limit
};

/// Bounded-variable two-phase primal simplex on a dense tableau.
class DenseSimplexSolver : public LpSolver {
public:
	explicit DenseSimplexSolver(SimplexOptions options = {}) : options_(options) {}
	LpSolution solve(const LinearProgram& lp) const override;
	std::string name() const override { return "dense-simplex"; }

private:
	SimplexOptions options_;
};

/// Writes the program in CPLEX LP text format.
void write_lp_format(const LinearProgram& lp, std::ostream& out);

} // namespace bwe
