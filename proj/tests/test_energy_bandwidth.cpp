#include <doctest.h>

#include <random>

#include "bwe/energy_bandwidth.hpp"
#include "bwe/oracle.hpp"
#include "support.hpp"

using namespace bwe;
using bwe::test::Zone90kv;

namespace {

PowerBandwidthResult band(double lower, double upper, double charge = 0.0, double discharge = 0.0) {
	PowerBandwidthResult r;
	r.lower_status = r.upper_status = LpStatus::Optimal;
	r.congestion = CongestionClass::Reduced;
	r.b_lower = lower;
	r.b_upper = upper;
	r.curative_charge_worst = charge;
	r.curative_discharge_worst = discharge;
	return r;
}

std::vector<PowerBandwidthResult> full_day(std::size_t n) {
	std::vector<PowerBandwidthResult> out(n, band(-12.0, 12.0));
	for (auto& r : out)
		r.congestion = CongestionClass::FullyAvailable;
	return out;
}

} // namespace

TEST_CASE("fully available horizon spans the whole battery") {
	Zone90kv pz;
	auto e = compute_energy_bandwidths(full_day(24), pz.zone);
	REQUIRE(e.feasible);
	REQUIRE(e.soc_lower.size() == 25);
	for (std::size_t t = 0; t <= 24; ++t) {
		CHECK(e.soc_lower[t] == 0.0);
		CHECK(e.soc_upper[t] == 24.0);
	}
}

TEST_CASE("single mandatory charge lowers the preceding ceiling") {
	Zone90kv pz;
	auto power = full_day(24);
	power[7] = band(5.0 / 3.0, 12.0);
	auto e = compute_energy_bandwidths(power, pz.zone);
	CHECK(e.soc_upper[7] == doctest::Approx(24.0 - 5.0 / 3.0));
	CHECK(e.soc_lower[7] == 0.0);
	CHECK(e.soc_upper[8] == 24.0);
	// A full hour of discharge before it restores the ceiling.
	CHECK(e.soc_upper[6] == 24.0);
}

TEST_CASE("consecutive charges accumulate") {
	Zone90kv pz;
	auto power = full_day(4);
	power[1] = band(6.0, 12.0);
	power[2] = band(6.0, 12.0);
	auto e = compute_energy_bandwidths(power, pz.zone);
	CHECK(e.soc_upper[1] == doctest::Approx(12.0));
	CHECK(e.soc_upper[2] == doctest::Approx(18.0));
	CHECK(e.soc_upper[0] == 24.0);
}

TEST_CASE("mandatory discharge raises the floor") {
	Zone90kv pz;
	auto power = full_day(3);
	power[2] = band(-12.0, -4.0);
	auto e = compute_energy_bandwidths(power, pz.zone);
	CHECK(e.soc_lower[2] == doctest::Approx(4.0));
	CHECK(e.soc_upper[2] == 24.0);
}

TEST_CASE("curative charge reserves headroom") {
	Zone90kv pz;
	auto power = full_day(4);
	power[3] = band(3.0, 12.0, 2.0, 0.0);
	auto e = compute_energy_bandwidths(power, pz.zone);
	CHECK(e.bands[3].lower == doctest::Approx(3.0 + 2.0 * 5.0 / 60.0));
	CHECK(e.bands[3].soc_ceiling == doctest::Approx(24.0 - 2.0 * 5.0 / 60.0));
	CHECK(e.soc_upper[3] == doctest::Approx(20.0 + 5.0 / 6.0).epsilon(1e-9));
}

TEST_CASE("curative headroom holds on random series") {
	Zone90kv pz;
	const double dt_cur = pz.zone.curative_duration_hours;
	for (std::uint64_t seed = 1; seed <= 60; ++seed) {
		auto power = random_power_series(seed, pz.zone, 24);
		auto e = compute_energy_bandwidths(power, pz.zone);
		if (!e.feasible)
			continue;
		for (std::size_t t = 0; t < power.size(); ++t) {
			double cc = std::max(0.0, power[t].curative_charge_worst);
			double cd = std::min(0.0, power[t].curative_discharge_worst);
			CHECK(e.soc_upper[t] <= 24.0 - dt_cur * cc + 1e-9);
			CHECK(e.soc_lower[t] >= -dt_cur * cd - 1e-9);
			CHECK(e.soc_upper[t] + 1e-9 >= e.soc_lower[t]);
		}
	}
}

TEST_CASE("boundaries ignore earlier timesteps") {
	Zone90kv pz;
	auto power = random_power_series(7, pz.zone, 24);
	auto base = compute_energy_bandwidths(power, pz.zone);
	for (std::size_t k : {0u, 5u, 12u, 23u}) {
		auto changed = power;
		changed[k] = band(11.0, 12.0);
		auto e = compute_energy_bandwidths(changed, pz.zone);
		for (std::size_t t = k + 1; t <= power.size(); ++t) {
			CHECK(e.soc_lower[t] == base.soc_lower[t]);
			CHECK(e.soc_upper[t] == base.soc_upper[t]);
		}
	}
}

TEST_CASE("matches forward propagation") {
	Zone90kv pz;
	std::size_t empty = 0;
	for (std::uint64_t seed = 100; seed < 140; ++seed) {
		auto power = random_power_series(seed, pz.zone, 24);
		auto e = compute_energy_bandwidths(power, pz.zone);
		auto forward = forward_soc_feasible_set(e.bands, pz.zone);
		if (forward[0].empty) {
			++empty;
			CHECK_FALSE(e.feasible);
			continue;
		}
		REQUIRE(e.feasible);
		for (std::size_t t = 0; t < forward.size(); ++t) {
			CHECK(e.soc_lower[t] == doctest::Approx(forward[t].lower).epsilon(1e-6));
			CHECK(e.soc_upper[t] == doctest::Approx(forward[t].upper).epsilon(1e-6));
		}
	}
	CHECK(empty < 40);
}

TEST_CASE("witness trajectories") {
	Zone90kv pz;
	std::mt19937_64 rng(3);
	std::size_t checked = 0;
	for (std::uint64_t seed = 200; seed < 260; ++seed) {
		auto power = random_power_series(seed, pz.zone, 24);
		auto e = compute_energy_bandwidths(power, pz.zone);
		if (!e.feasible)
			continue;
		for (int k = 0; k < 5; ++k) {
			double start = std::uniform_real_distribution<double>(e.soc_lower[0], e.soc_upper[0])(rng);
			auto traj = verify_trajectory_existence(power, e, pz.zone, start);
			REQUIRE(traj.exists);
			for (std::size_t t = 0; t < power.size(); ++t) {
				CHECK(traj.power_mw[t] >= e.bands[t].lower - 1e-9);
				CHECK(traj.power_mw[t] <= e.bands[t].upper + 1e-9);
				CHECK(traj.soc_mwh[t + 1] >= e.soc_lower[t + 1] - 1e-9);
				CHECK(traj.soc_mwh[t + 1] <= e.soc_upper[t + 1] + 1e-9);
			}
			++checked;
		}
	}
	CHECK(checked > 100);
}

TEST_CASE("witness rejects a start outside the interval") {
	Zone90kv pz;
	auto power = full_day(4);
	power[0] = band(6.0, 12.0);
	auto e = compute_energy_bandwidths(power, pz.zone);
	auto traj = verify_trajectory_existence(power, e, pz.zone, 20.0);
	CHECK_FALSE(traj.exists);
	REQUIRE(traj.violation_boundary);
	CHECK(*traj.violation_boundary == 0);
	CHECK(verify_trajectory_existence(power, e, pz.zone, 18.0).exists);
}

TEST_CASE("infeasible timestep is an error") {
	Zone90kv pz;
	auto power = full_day(3);
	power[1].congestion = CongestionClass::Infeasible;
	CHECK_THROWS_AS(compute_energy_bandwidths(power, pz.zone), EnergyError);
	CHECK_THROWS_AS(compute_energy_bandwidths(full_day(3), pz.zone, 5), EnergyError);
}

TEST_CASE("curative reserve can empty a band") {
	Zone90kv pz;
	auto power = full_day(3);
	// 11.9 + 12 * 5/60 = 12.9 > 12
	power[1] = band(11.9, 12.0, 12.0, 0.0);
	auto e = compute_energy_bandwidths(power, pz.zone);
	CHECK_FALSE(e.feasible);
	REQUIRE(e.infeasible_boundary);
	CHECK(*e.infeasible_boundary == 1);
	CHECK_FALSE(verify_trajectory_existence(power, e, pz.zone, 0.0).exists);
}

TEST_CASE("too much mandatory charge empties the horizon") {
	Zone90kv pz;
	std::vector<PowerBandwidthResult> power(3, band(10.0, 12.0));
	auto e = compute_energy_bandwidths(power, pz.zone);
	CHECK_FALSE(e.feasible);
	CHECK_FALSE(e.message.empty());
}

TEST_CASE("contingency-limited hour keeps its curative reserve") {
	Zone90kv pz;
	std::vector<PowerBandwidthResult> power;
	power.push_back(solve_timestep(pz.zone, pz.contingency_overload(), EngineConfig{}));
	for (int t = 0; t < 20; ++t)
		power.push_back(solve_timestep(pz.zone, pz.quiet(), EngineConfig{}));
	REQUIRE(power[0].b_lower == doctest::Approx(3.0).epsilon(1e-6));
	REQUIRE(power[0].curative_charge_worst == doctest::Approx(2.0).epsilon(1e-6));
	auto e = compute_energy_bandwidths(power, pz.zone);
	REQUIRE(e.feasible);
	CHECK(e.soc_lower[0] == 0.0);
	CHECK(e.soc_upper[0] == doctest::Approx(24.0 - 3.0 - 2.0 * 5.0 / 60.0).epsilon(1e-6));
	CHECK(e.soc_upper[1] == 24.0);
}
