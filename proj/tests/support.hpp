#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "bwe/fixtures.hpp"
#include "bwe/grid_model.hpp"
#include "bwe/power_bandwidth.hpp"

namespace bwe::test {

inline const std::vector<double> kCurtailable{20.0, 30.0, 30.0, 5.0};

struct Zone90kv {
	ZoneSpecification spec = zone90kv_specification();
	ZoneModel zone = build_zone(spec);

	ForecastRow row(Season season, double alpha, double beta, double gamma, double delta, double west,
		std::vector<double> curt = kCurtailable) const {
		auto inj = injections_by_id(spec, {{"alpha", alpha}, {"beta", beta}, {"gamma", gamma}, {"delta", delta}, {"W", west}});
		return build_forecast_row(spec, zone, inj, curt, season, "t");
	}
	// Normal-state gamma-delta overload, summer.
	ForecastRow normal_overload() const { return row(Season::Summer, 10, 25, 35, -10, 192.5); }
	// Normal overload plus alpha-beta immediate overload after the gamma-delta outage.
	ForecastRow combined_overload() const { return row(Season::Winter, 10, 50, 60, -10, 120); }
	// Contingency overload only.
	ForecastRow contingency_overload() const { return row(Season::Winter, 10, 48, 56, -10, 82); }
	ForecastRow quiet() const { return row(Season::Summer, 0, 0, 0, 0, 0); }
};

/// Zone a-b with the battery at a, one outbound line b->X.
/// Line a-b carries the injection at a minus the battery setpoint.
inline ZoneSpecification two_bus_specification(double permanent, double long_term, double immediate) {
	std::vector<FullNetwork::Branch> branches{
		{"a-b", 0, 1, 0.05},
		{"b-x", 1, 2, 0.1},
		{"x-s", 2, 3, 0.1},
	};
	ZoneSpecification spec(FullNetwork({"a", "b", "X", "S"}, branches, 3));
	spec.name = "two-bus";
	spec.zone_buses = {"a", "b"};
	RatingSet r{permanent, long_term, immediate, std::nullopt};
	spec.internal_lines = {{"a-b", r, r}};
	spec.outbound_branches = {"b-x"};
	spec.battery_bus = "a";
	spec.battery_pmin_mw = -10.0;
	spec.battery_pmax_mw = 10.0;
	spec.battery_capacity_mwh = 20.0;
	return spec;
}

class TempDir {
public:
	explicit TempDir(const std::string& tag) {
		path_ = std::filesystem::temp_directory_path() / ("bwe-test-" + tag + "-" + std::to_string(::getpid()));
		std::filesystem::remove_all(path_);
		std::filesystem::create_directories(path_);
	}
	~TempDir() { std::filesystem::remove_all(path_); }
	TempDir(const TempDir&) = delete;
	TempDir& operator=(const TempDir&) = delete;
	const std::filesystem::path& path() const { return path_; }
	std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
	std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
	std::ifstream in(path, std::ios::binary);
	return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
	std::ofstream(path, std::ios::binary) << text;
}

} // namespace bwe::test
