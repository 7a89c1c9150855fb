#include <doctest.h>

#include "bwe/oracle.hpp"
#include "support.hpp"

using namespace bwe;
using bwe::test::Zone90kv;

TEST_CASE("vertex enumeration on hand-solved problems") {
	LinearProgram lp;
	auto x = lp.add_variable("x", 0, kInfinity, -1);
	auto y = lp.add_variable("y", 0, kInfinity, -1);
	lp.add_constraint("a", {{x, 1}, {y, 2}}, Relation::LessEqual, 4);
	lp.add_constraint("b", {{x, 3}, {y, 1}}, Relation::LessEqual, 6);
	auto r = enumerate_vertices(lp);
	REQUIRE(r.status == LpStatus::Optimal);
	CHECK(r.objective == doctest::Approx(-2.8));
	CHECK(r.values[x] == doctest::Approx(1.6));
	CHECK(r.values[y] == doctest::Approx(1.2));

	LinearProgram boxed;
	auto u = boxed.add_variable("u", -2, 3, 1);
	auto v = boxed.add_variable("v", -kInfinity, kInfinity, 2);
	boxed.add_constraint("link", {{u, 1}, {v, -1}}, Relation::Equal, 1);
	boxed.add_constraint("cap", {{v, 1}}, Relation::GreaterEqual, -1);
	auto b = enumerate_vertices(boxed);
	REQUIRE(b.status == LpStatus::Optimal);
	CHECK(b.values[u] == doctest::Approx(0.0));
	CHECK(b.values[v] == doctest::Approx(-1.0));
	CHECK(b.objective == doctest::Approx(-2.0));
}

TEST_CASE("vertex enumeration status") {
	LinearProgram inf;
	auto x = inf.add_variable("x", 0, 1, 1);
	inf.add_constraint("r", {{x, 1}}, Relation::GreaterEqual, 2);
	CHECK(enumerate_vertices(inf).status == LpStatus::Infeasible);

	LinearProgram unb;
	auto u = unb.add_variable("u", 0, kInfinity, -1);
	auto v = unb.add_variable("v", 0, kInfinity, 0);
	unb.add_constraint("r", {{u, 1}, {v, -1}}, Relation::LessEqual, 1);
	CHECK(enumerate_vertices(unb).status == LpStatus::Unbounded);

	// Unbounded feasible region with a bounded optimum.
	LinearProgram ray;
	auto p = ray.add_variable("p", 0, kInfinity, 1);
	auto q = ray.add_variable("q", 0, kInfinity, 1);
	ray.add_constraint("r", {{p, 1}, {q, 1}}, Relation::GreaterEqual, 2);
	auto s = enumerate_vertices(ray);
	CHECK(s.status == LpStatus::Optimal);
	CHECK(s.objective == doctest::Approx(2.0));
}

TEST_CASE("vertex enumeration guard") {
	auto lp = random_lp(11, 50, 4);
	CHECK_THROWS_AS(enumerate_vertices(lp, 10), OracleGuardError);
}

TEST_CASE("random LPs are reproducible and mixed") {
	CHECK(random_lp(5).variable_count() == random_lp(5).variable_count());
	std::size_t counts[3] = {0, 0, 0};
	for (std::uint64_t seed = 0; seed < 120; ++seed) {
		auto lp = random_lp(seed, 8, 3);
		lp.validate();
		auto r = enumerate_vertices(lp);
		if (r.status == LpStatus::Optimal)
			++counts[0];
		else if (r.status == LpStatus::Infeasible)
			++counts[1];
		else
			++counts[2];
	}
	CHECK(counts[0] > 20);
	CHECK(counts[1] > 2);
	CHECK(counts[2] > 10);
}

TEST_CASE("grid search on a two-bus zone") {
	auto spec = test::two_bus_specification(10, 12, 15);
	ZoneModel zone = build_zone(spec);
	auto row = build_forecast_row(spec, zone, injections_by_id(spec, {{"a", 15}}), {0.0, 0.0}, Season::Summer, "t");
	auto r = brute_force_power_bandwidth(zone, row, Season::Summer);
	REQUIRE(r.feasible);
	CHECK(r.b_lower == doctest::Approx(5.0).epsilon(1e-9));
	CHECK(r.b_upper == doctest::Approx(10.0).epsilon(1e-9));
	CHECK(r.curtailment_total == 0.0);

	CHECK(oracle_controls_feasible(zone, row, Season::Summer, 5.0, {0.0, 0.0}));
	CHECK_FALSE(oracle_controls_feasible(zone, row, Season::Summer, 4.9, {0.0, 0.0}));
}

TEST_CASE("grid search with curtailment") {
	auto spec = test::two_bus_specification(10, 12, 15);
	ZoneModel zone = build_zone(spec);
	// 25 MW at a: the battery covers 10, curtailment the remaining 5.
	auto row = build_forecast_row(spec, zone, injections_by_id(spec, {{"a", 25}}), {8.0, 0.0}, Season::Summer, "t");
	GridSearchConfig cfg;
	cfg.power_resolution = 0.05;
	auto r = brute_force_power_bandwidth(zone, row, Season::Summer, cfg);
	REQUIRE(r.feasible);
	CHECK(r.b_lower == doctest::Approx(10.0).epsilon(1e-9));
	CHECK(r.b_upper == doctest::Approx(10.0).epsilon(1e-9));
	CHECK(r.curtailment_total == doctest::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("grid search on fixture rows") {
	Zone90kv pz;
	auto t7 = brute_force_power_bandwidth(pz.zone, pz.normal_overload(), Season::Summer);
	REQUIRE(t7.feasible);
	CHECK(t7.b_lower == doctest::Approx(5.0 / 3.0).epsilon(0.01 / 1.67));
	CHECK(t7.b_upper == doctest::Approx(12.0));

	auto q = brute_force_power_bandwidth(pz.zone, pz.quiet(), Season::Summer);
	REQUIRE(q.feasible);
	CHECK(q.b_lower == -12.0);
	CHECK(q.b_upper == 12.0);
}

TEST_CASE("grid search guard") {
	Zone90kv pz;
	ZoneModel big = pz.zone;
	big.buses.push_back(big.buses[0]);
	big.buses.push_back(big.buses[1]);
	CHECK_THROWS_AS(brute_force_power_bandwidth(big, pz.quiet(), Season::Summer), OracleGuardError);
	GridSearchConfig bad;
	bad.power_resolution = 0.0;
	CHECK_THROWS_AS(brute_force_power_bandwidth(pz.zone, pz.quiet(), Season::Summer, bad), OracleGuardError);
}

TEST_CASE("forward propagation on simple bands") {
	Zone90kv pz;
	std::vector<EffectiveBand> bands(3, EffectiveBand{-12.0, 12.0, 0.0, 24.0});
	auto full = forward_soc_feasible_set(bands, pz.zone);
	REQUIRE(full.size() == 4);
	for (const auto& s : full) {
		CHECK_FALSE(s.empty);
		CHECK(s.lower == doctest::Approx(0.0).epsilon(1e-9));
		CHECK(s.upper == doctest::Approx(24.0).epsilon(1e-9));
	}

	bands[1] = EffectiveBand{6.0, 12.0, 0.0, 24.0};
	auto charge = forward_soc_feasible_set(bands, pz.zone);
	CHECK(charge[1].upper == doctest::Approx(18.0).epsilon(1e-9));

	std::vector<EffectiveBand> tight(3, EffectiveBand{10.0, 12.0, 0.0, 24.0});
	CHECK(forward_soc_feasible_set(tight, pz.zone)[0].empty);
}

TEST_CASE("random instances are deterministic") {
	for (std::uint64_t seed : {1u, 17u, 99u}) {
		auto a = random_instance(seed);
		auto b = random_instance(seed);
		CHECK(a.zone.buses.size() == b.zone.buses.size());
		CHECK(a.zone.buses.size() >= 2);
		CHECK(a.zone.buses.size() <= 4);
		CHECK(a.zone.contingencies.size() <= 2);
		CHECK(a.row.reference_flow_normal == b.row.reference_flow_normal);
		CHECK(a.row.curtailable_max_mw == b.row.curtailable_max_mw);
	}
	auto p = random_power_series(4, Zone90kv().zone, 12);
	auto q = random_power_series(4, Zone90kv().zone, 12);
	for (std::size_t t = 0; t < p.size(); ++t) {
		CHECK(p[t].b_lower == q[t].b_lower);
		CHECK(p[t].b_lower <= p[t].b_upper);
	}
}
