#include <doctest.h>

#include <cmath>
#include <numeric>

#include "bwe/dc_network.hpp"
#include "support.hpp"

using namespace bwe;
using bwe::test::Zone90kv;

TEST_CASE("two-bus flows by hand") {
	auto spec = test::two_bus_specification(10, 12, 15);
	ZoneModel zone = build_zone(spec);
	// 15 MW injected at a leaves through a-b and b-x.
	auto f = spec.network.flows({15.0, 0.0, 0.0, 0.0});
	CHECK(f[0] == doctest::Approx(15.0));
	CHECK(f[1] == doctest::Approx(15.0));
	CHECK(zone.outbound_lines[0].ptdf_normal[0] == doctest::Approx(1.0));
	CHECK(zone.outbound_lines[0].ptdf_normal[1] == doctest::Approx(1.0));
}

TEST_CASE("meshed network splits by reactance") {
	std::vector<FullNetwork::Branch> b{{"1-2", 0, 1, 0.1}, {"1-3", 0, 2, 0.1}, {"2-3", 1, 2, 0.1}};
	FullNetwork net({"1", "2", "3"}, b, 2);
	// 1 MW from 1 to 3: direct path carries 2/3, the two-line path 1/3.
	auto f = net.flows({1.0, 0.0, 0.0});
	CHECK(f[1] == doctest::Approx(2.0 / 3.0));
	CHECK(f[0] == doctest::Approx(1.0 / 3.0));
	CHECK(f[2] == doctest::Approx(1.0 / 3.0));
	auto ptdf = net.ptdf_column(0);
	CHECK(ptdf[1] == doctest::Approx(2.0 / 3.0));
	CHECK(net.is_connected({0}));
	CHECK_FALSE(net.is_connected({0, 1}));
}

TEST_CASE("fixture sensitivities") {
	Zone90kv pz;
	const ZoneModel& z = pz.zone;
	const std::size_t gamma = z.bus_index("gamma");
	const std::size_t west = 0;
	const std::size_t east = 1;
	// 0.6 of an injection at gamma leaves through delta.
	CHECK(z.outbound_lines[east].ptdf_normal[gamma] == doctest::Approx(0.6));
	CHECK(z.outbound_lines[west].ptdf_normal[gamma] == doctest::Approx(0.4));
	// After the gamma-delta outage all of it leaves through alpha.
	CHECK(z.outbound_lines[west].ptdf_contingency[0][gamma] == doctest::Approx(1.0));
	CHECK(z.outbound_lines[east].ptdf_contingency[0][gamma] == doctest::Approx(0.0));
	CHECK(z.outbound_lines[east].ptdf_contingency[0][z.bus_index("delta")] == doctest::Approx(1.0));
}

TEST_CASE("outbound ptdf sums to one inside each island") {
	Zone90kv pz;
	const ZoneModel& z = pz.zone;
	for (std::size_t c = 0; c <= z.contingencies.size(); ++c) {
		TopologyState topo = c == z.contingencies.size() ? base_topology(z) : contingency_topology(z, c);
		PtdfMatrix p = compute_ptdf(z, topo);
		for (std::size_t k = 0; k < z.buses.size(); ++k)
			CHECK(p.outbound.col(static_cast<Eigen::Index>(k)).sum() == doctest::Approx(1.0));
	}
}

TEST_CASE("dc flows reproduce the whole-grid flows") {
	Zone90kv pz;
	ForecastRow row = pz.combined_overload();
	auto full = pz.spec.network.flows(
		injections_by_id(pz.spec, {{"alpha", 10}, {"beta", 50}, {"gamma", 60}, {"delta", -10}, {"W", 120}}));
	auto zone_flows = dc_flows(pz.zone, base_topology(pz.zone), row.injection_mw, row.reference_flow_normal);
	for (const auto& line : pz.zone.lines)
		CHECK(zone_flows[*pz.zone.find_line(line.id)] == doctest::Approx(full[pz.spec.network.branch_index(line.id)]));
	// Fixture values: 91 MW on gamma-delta in the normal state.
	CHECK(zone_flows[*pz.zone.find_line("gamma-delta")] == doctest::Approx(91.0));

	auto post = dc_flows(pz.zone, contingency_topology(pz.zone, 0), row.injection_mw, row.reference_flow_contingency[0]);
	CHECK(post[*pz.zone.find_line("alpha-beta")] == doctest::Approx(-110.0));
	CHECK(post[*pz.zone.find_line("gamma-delta")] == doctest::Approx(0.0));
}

TEST_CASE("dc flows reject an unbalanced island") {
	Zone90kv pz;
	ForecastRow row = pz.normal_overload();
	row.reference_flow_normal[0] += 5.0;
	CHECK_THROWS(dc_flows(pz.zone, base_topology(pz.zone), row.injection_mw, row.reference_flow_normal));
}

TEST_CASE("island without an outbound line is rejected") {
	// Chain a-b-c with the only outbound line at a; losing b-c strands c.
	std::vector<FullNetwork::Branch> b{{"a-b", 0, 1, 0.1}, {"b-c", 1, 2, 0.1}, {"a-x", 0, 3, 0.1}, {"c-x", 2, 3, 0.2}};
	ZoneSpecification spec(FullNetwork({"a", "b", "c", "X"}, b, 3));
	spec.zone_buses = {"a", "b", "c"};
	RatingSet r{50, 60, 70, std::nullopt};
	spec.internal_lines = {{"a-b", r, r}, {"b-c", r, r}};
	spec.outbound_branches = {"a-x", "c-x"};
	spec.battery_bus = "b";
	spec.battery_pmin_mw = -5;
	spec.battery_pmax_mw = 5;
	spec.battery_capacity_mwh = 10;
	CHECK_NOTHROW(build_zone(spec));
	spec.outbound_branches = {"a-x"};
	spec.contingencies = {{"n-b-c", "b-c"}};
	CHECK_THROWS_AS(build_zone(spec), InputError);
}
