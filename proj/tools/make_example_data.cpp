#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "bwe/fixtures.hpp"
#include "bwe/grid_model.hpp"
#include "bwe/power_bandwidth.hpp"
#include "bwe/report.hpp"

namespace {

using namespace bwe;

// alpha, beta, gamma, delta, W
struct Hour {
	std::array<double, 5> mw;
};

const std::vector<double> kCurtailable{20.0, 30.0, 30.0, 5.0};

ForecastRow make_row(const ZoneSpecification& spec, const ZoneModel& zone, const Hour& h, const std::vector<double>& curt,
	Season season, std::string stamp) {
	auto inj = injections_by_id(spec,
		{{"alpha", h.mw[0]}, {"beta", h.mw[1]}, {"gamma", h.mw[2]}, {"delta", h.mw[3]}, {"W", h.mw[4]}});
	return build_forecast_row(spec, zone, inj, curt, season, std::move(stamp));
}

// Summer day: solar noon congests gamma-delta, the evening import peak limits charging.
Forecast summer_day(const ZoneSpecification& spec, const ZoneModel& zone) {
	const std::vector<Hour> hours = {
		{{2, 5, 6, -10, 30}},
		{{2, 4, 5, -9, 25}},
		{{2, 4, 5, -9, 20}},
		{{2, 4, 5, -9, 20}},
		{{2, 5, 6, -9, 30}},
		{{3, 8, 10, -10, 60}},
		{{6, 15, 21, -10, 130}},
		{{10, 25, 35, -10, 192.5}},
		{{10, 25, 35, -10, 194}},
		{{10, 25, 35, -10, 195.5}},
		{{10, 25, 35, -10, 196}},
		{{10, 25, 35, -10, 193.5}},
		{{9, 22.5, 31.5, -10, 192.5}},
		{{8, 20, 28, -10, 192.5}},
		{{7, 18, 25, -10, 180}},
		{{5, 12, 16, -12, 120}},
		{{3, 6, 8, -14, 60}},
		{{0, -5, -8, -14, -40}},
		{{-8, -22, -30, -12, -170}},
		{{-10, -25, -35, -10, -200}},
		{{-9, -24, -33, -10, -185}},
		{{-4, -10, -12, -10, -60}},
		{{1, 2, 3, -10, 10}},
		{{2, 4, 5, -10, 25}},
	};
	Forecast out;
	for (std::size_t t = 0; t < hours.size(); ++t)
		out.push_back(make_row(spec, zone, hours[t], kCurtailable, Season::Summer, fmt::format("2024-07-15T{:02d}:00", t)));
	return out;
}

// Winter day: wind at beta and gamma with the gamma-delta outage binding the first hours.
Forecast winter_day(const ZoneSpecification& spec, const ZoneModel& zone) {
	std::vector<Hour> hours = {
		{{10, 50, 60, -10, 120}},
		{{10, 50, 60, -10, 120}},
		{{8, 40, 48, -10, 90}},
		{{10, 48, 56, -10, 82}},
	};
	for (int t = 4; t < 24; ++t) {
		double wind = 0.7 * std::exp(-0.12 * (t - 4)) + 0.1;
		hours.push_back({{10 * wind, 45 * wind, 55 * wind, -12, 100 * wind}});
	}
	Forecast out;
	for (std::size_t t = 0; t < hours.size(); ++t)
		out.push_back(make_row(spec, zone, hours[t], kCurtailable, Season::Winter, fmt::format("2024-01-15T{:02d}:00", t)));
	return out;
}

// A year of hourly rows: wind stronger in winter, solar in summer, loads at delta.
Forecast synthetic_year(const ZoneSpecification& spec, const ZoneModel& zone, std::uint64_t seed) {
	std::mt19937_64 rng(seed);
	std::normal_distribution<double> noise(0.0, 1.0);
	constexpr std::array<int, 12> days = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
	constexpr double kPi = 3.14159265358979323846;
	Forecast out;
	double wind_state = 0.0;
	int day_of_year = 0;
	for (int month = 0; month < 12; ++month) {
		const Season season = month >= 3 && month <= 8 ? Season::Summer : Season::Winter;
		for (int day = 0; day < days[static_cast<std::size_t>(month)]; ++day, ++day_of_year) {
			const double annual = std::cos(2.0 * kPi * (day_of_year + 15) / 365.0); // +1 mid-January
			for (int hour = 0; hour < 24; ++hour) {
				wind_state = 0.6 * wind_state + 0.78 * noise(rng);
				const double mean = 0.36 + 0.16 * annual;
				const double wind = std::clamp(mean + 0.22 * wind_state, 0.0, 0.8);
				const double sun = std::max(0.0, std::sin(kPi * (hour - 6) / 14.0)) * (0.6 - 0.3 * annual);
				const double load = 10.0 + 6.0 * std::max(0.0, std::sin(kPi * (hour - 7) / 15.0)) + 4.0 * annual;
				Hour h{{12.0 * wind + 4.0 * sun - 3.0, 55.0 * wind + 10.0 * sun - 4.0, 65.0 * wind + 8.0 * sun - 5.0, -load,
					215.0 * wind + 20.0 * sun - 60.0 + 8.0 * noise(rng)}};
				std::vector<double> curt = {
					std::max(0.0, 12.0 * wind + 4.0 * sun),
					std::max(0.0, 55.0 * wind + 10.0 * sun),
					std::max(0.0, 65.0 * wind + 8.0 * sun),
					0.0,
				};
				out.push_back(make_row(spec, zone, h, curt, season,
					fmt::format("2023-{:02d}-{:02d}T{:02d}:00", month + 1, day + 1, hour)));
			}
		}
	}
	return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
	std::ofstream out(path, std::ios::binary);
	if (!out)
		throw std::runtime_error(fmt::format("cannot write {}", path.string()));
	out << text;
}

void write_forecast_file(const std::filesystem::path& path, const ZoneModel& zone, const Forecast& forecast) {
	std::ofstream out(path, std::ios::binary);
	if (!out)
		throw std::runtime_error(fmt::format("cannot write {}", path.string()));
	write_forecast(zone, forecast, out);
}

} // namespace

int main(int argc, char** argv) {
	CLI::App app{"Writes the bundled zone, forecasts and regression goldens"};
	std::string out_dir = "data";
	std::uint64_t seed = 2023;
	bool goldens = true;
	app.add_option("--out", out_dir, "data directory");
	app.add_option("--seed", seed, "synthetic year seed");
	app.add_flag("!--no-goldens", goldens, "skip the golden CSVs");
	CLI11_PARSE(app, argc, argv);

	try {
		const std::filesystem::path dir(out_dir);
		std::filesystem::create_directories(dir / "golden");
		ZoneSpecification spec = zone90kv_specification();
		ZoneModel zone = build_zone(spec);
		write_file(dir / "zone90kv.json", zone_to_json(zone).dump(2) + "\n");

		const std::vector<std::pair<std::string, Forecast>> sets = {
			{"summer_day", summer_day(spec, zone)},
			{"winter_day", winter_day(spec, zone)},
			{"synthetic_year", synthetic_year(spec, zone, seed)},
		};
		for (const auto& [name, forecast] : sets)
			write_forecast_file(dir / (name + ".csv"), zone, forecast);

		if (goldens) {
			EngineConfig config;
			for (const auto& [name, forecast] : sets) {
				if (name == "synthetic_year")
					continue;
				auto run = compute_power_bandwidths(zone, forecast, config);
				write_file(dir / "golden" / (name + "_power.csv"), power_csv(run.results));
			}
		}
		fmt::print("wrote {}\n", dir.string());
	} catch (const std::exception& e) {
		fmt::print(stderr, "make_example_data: {}\n", e.what());
		return 1;
	}
	return 0;
}
