#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bwe/lp_core.hpp"
#include "bwe/oracle.hpp"

using namespace bwe;

namespace {

const DenseSimplexSolver solver;

} // namespace

TEST_CASE("two-variable textbook problem") {
	LinearProgram lp;
	auto x = lp.add_variable("x", 0, kInfinity, -1);
	auto y = lp.add_variable("y", 0, kInfinity, -1);
	lp.add_constraint("a", {{x, 1}, {y, 2}}, Relation::LessEqual, 4);
	lp.add_constraint("b", {{x, 3}, {y, 1}}, Relation::LessEqual, 6);
	auto s = solver.solve(lp);
	REQUIRE(s.status == LpStatus::Optimal);
	CHECK(s.objective == doctest::Approx(-2.8));
	CHECK(s.values[x] == doctest::Approx(1.6));
	CHECK(s.values[y] == doctest::Approx(1.2));
	// Both rows bind; duals give the same bound as the primal.
	CHECK(dual_bound(lp, s.duals) == doctest::Approx(s.objective));
	CHECK(check_solution(lp, s.values).empty());
}

TEST_CASE("infeasible and unbounded") {
	LinearProgram inf;
	auto x = inf.add_variable("x", 0, kInfinity, 1);
	inf.add_constraint("neg", {{x, 1}}, Relation::LessEqual, -1);
	CHECK(solver.solve(inf).status == LpStatus::Infeasible);

	LinearProgram unb;
	auto u = unb.add_variable("u", 0, kInfinity, -1);
	auto v = unb.add_variable("v", 0, kInfinity, 0);
	unb.add_constraint("r", {{u, 1}, {v, -1}}, Relation::LessEqual, 1);
	CHECK(solver.solve(unb).status == LpStatus::Unbounded);
}

TEST_CASE("free variable and equality") {
	LinearProgram lp;
	auto x = lp.add_variable("x", -kInfinity, kInfinity, 1);
	auto y = lp.add_variable("y", -kInfinity, 5, 0);
	lp.add_constraint("sum", {{x, 1}, {y, 1}}, Relation::Equal, 3);
	auto s = solver.solve(lp);
	REQUIRE(s.status == LpStatus::Optimal);
	CHECK(s.values[x] == doctest::Approx(-2));
	CHECK(s.values[y] == doctest::Approx(5));
}

TEST_CASE("bound flip without a pivot") {
	LinearProgram lp;
	auto x = lp.add_variable("x", 0, 3, -1);
	auto y = lp.add_variable("y", 0, kInfinity, 1);
	lp.add_constraint("r", {{x, 1}, {y, 1}}, Relation::GreaterEqual, 1);
	auto s = solver.solve(lp);
	REQUIRE(s.status == LpStatus::Optimal);
	CHECK(s.values[x] == doctest::Approx(3));
	CHECK(s.values[y] == doctest::Approx(0));
}

TEST_CASE("degenerate cycling example terminates") {
	// Beale's example cycles under textbook Dantzig pricing.
	LinearProgram lp;
	auto x4 = lp.add_variable("x4", 0, kInfinity, -0.75);
	auto x5 = lp.add_variable("x5", 0, kInfinity, 150);
	auto x6 = lp.add_variable("x6", 0, kInfinity, -0.02);
	auto x7 = lp.add_variable("x7", 0, kInfinity, 6);
	lp.add_constraint("r1", {{x4, 0.25}, {x5, -60}, {x6, -0.04}, {x7, 9}}, Relation::LessEqual, 0);
	lp.add_constraint("r2", {{x4, 0.5}, {x5, -90}, {x6, -0.02}, {x7, 3}}, Relation::LessEqual, 0);
	lp.add_constraint("r3", {{x6, 1}}, Relation::LessEqual, 1);
	for (bool bland : {false, true}) {
		SimplexOptions opt;
		opt.force_bland = bland;
		auto s = DenseSimplexSolver(opt).solve(lp);
		REQUIRE(s.status == LpStatus::Optimal);
		CHECK(s.objective == doctest::Approx(-0.05));
	}
	CHECK(enumerate_vertices(lp).objective == doctest::Approx(-0.05));
}

TEST_CASE("objective constant and fixed variables") {
	LinearProgram lp;
	auto x = lp.add_variable("x", 2, 2, 3);
	lp.set_objective_constant(1.5);
	lp.add_constraint("r", {{x, 1}}, Relation::LessEqual, 10);
	auto s = solver.solve(lp);
	REQUIRE(s.optimal());
	CHECK(s.objective == doctest::Approx(7.5));
}

TEST_CASE("validation") {
	LinearProgram lp;
	lp.add_variable("x", 1, 0, 0);
	CHECK_THROWS_AS(lp.validate(), std::invalid_argument);
	LinearProgram bad_term;
	bad_term.add_variable("x", 0, 1, 0);
	bad_term.add_constraint("r", {{3, 1.0}}, Relation::LessEqual, 1);
	CHECK_THROWS_AS(bad_term.validate(), std::invalid_argument);
}

TEST_CASE("solution checker reports violations") {
	LinearProgram lp;
	auto x = lp.add_variable("x", 0, 1, 0);
	lp.add_constraint("cap", {{x, 2}}, Relation::LessEqual, 1);
	auto v = check_solution(lp, {1.0});
	REQUIRE(v.size() == 1);
	CHECK(v[0].kind == Violation::Kind::Constraint);
	CHECK(v[0].magnitude == doctest::Approx(1.0));
	auto b = check_solution(lp, {-0.5});
	REQUIRE_FALSE(b.empty());
	CHECK(b[0].kind == Violation::Kind::LowerBound);
	CHECK(check_solution(lp, {0.5}).empty());
}

TEST_CASE("lp format export") {
	LinearProgram lp;
	auto x = lp.add_variable("B[gamma]", -12, 12, 1);
	auto y = lp.add_variable("free y", -kInfinity, kInfinity, 0);
	lp.add_constraint("flow <= 3", {{x, 0.6}, {y, 1}}, Relation::LessEqual, 3);
	std::ostringstream out;
	write_lp_format(lp, out);
	std::string text = out.str();
	CHECK(text.find("Minimize") != std::string::npos);
	CHECK(text.find("Subject To") != std::string::npos);
	CHECK(text.find("Bounds") != std::string::npos);
	CHECK(text.find("free") != std::string::npos);
	CHECK(text.find("End") != std::string::npos);
	CHECK(text.find('[') == std::string::npos);
}

TEST_CASE("random problems agree with vertex enumeration") {
	std::size_t statuses[4] = {0, 0, 0, 0};
	for (std::uint64_t seed = 0; seed < 150; ++seed) {
		CAPTURE(seed);
		LinearProgram lp = random_lp(seed, 20, 4);
		auto expected = enumerate_vertices(lp);
		auto s = solver.solve(lp);
		++statuses[static_cast<int>(expected.status)];
		REQUIRE(s.status == expected.status);
		if (expected.status == LpStatus::Optimal) {
			CHECK(std::abs(s.objective - expected.objective) <= 1e-6 * std::max(1.0, std::abs(expected.objective)));
			CHECK(check_solution(lp, s.values).empty());
			CHECK(std::abs(dual_bound(lp, s.duals) - s.objective) <= 1e-6 * std::max(1.0, std::abs(s.objective)));
		}
	}
	CHECK(statuses[static_cast<int>(LpStatus::Optimal)] > 0);
	CHECK(statuses[static_cast<int>(LpStatus::Infeasible)] > 0);
	CHECK(statuses[static_cast<int>(LpStatus::Unbounded)] > 0);
}

TEST_CASE("pricing and scaling variants agree") {
	SimplexOptions plain;
	plain.scale_rows = false;
	plain.force_bland = true;
	DenseSimplexSolver alt(plain);
	for (std::uint64_t seed = 500; seed < 560; ++seed) {
		CAPTURE(seed);
		LinearProgram lp = random_lp(seed, 15, 4);
		auto a = solver.solve(lp);
		auto b = alt.solve(lp);
		REQUIRE(a.status == b.status);
		if (a.optimal())
			CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-9));
	}
}
