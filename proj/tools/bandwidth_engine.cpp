#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <unistd.h>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "bwe/energy_bandwidth.hpp"
#include "bwe/oracle.hpp"
#include "bwe/power_bandwidth.hpp"
#include "bwe/report.hpp"
#include "bwe/statistics.hpp"

namespace {

using namespace bwe;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitDisagreement = 3;

struct RunConfig {
	std::string zone;
	std::string forecast;
	std::optional<std::size_t> horizon;
	std::string out = "out";
	std::size_t workers = 1;
	std::string objective = "weighted";
	double c1 = Weights{}.c1;
	double c2 = Weights{}.c2;
	double c3 = Weights{}.c3;
	std::string season_override;
	int verbosity = 0;
};

// Flag values land here; only flags given on the command line override the config file.
struct Flags {
	RunConfig values;
	std::string config_path;
	std::size_t horizon = 0;
	CLI::Option* zone = nullptr;
	CLI::Option* forecast = nullptr;
	CLI::Option* horizon_opt = nullptr;
	CLI::Option* out = nullptr;
	CLI::Option* workers = nullptr;
	CLI::Option* objective = nullptr;
	CLI::Option* c1 = nullptr;
	CLI::Option* c2 = nullptr;
	CLI::Option* c3 = nullptr;
	CLI::Option* season = nullptr;
	CLI::Option* verbose = nullptr;
};

void add_run_flags(CLI::App* cmd, Flags& f, bool needs_out) {
	f.zone = cmd->add_option("--zone", f.values.zone, "zone description (JSON)");
	f.forecast = cmd->add_option("--forecast", f.values.forecast, "forecast table (CSV)");
	f.horizon_opt = cmd->add_option("--horizon", f.horizon, "number of timesteps to solve")->check(CLI::PositiveNumber);
	if (needs_out)
		f.out = cmd->add_option("--out", f.values.out, "output directory");
	f.workers = cmd->add_option("--workers", f.values.workers, "worker threads");
	f.objective = cmd->add_option("--objective", f.values.objective, "weighted or lexicographic")
					  ->check(CLI::IsMember({"weighted", "lexicographic"}));
	f.c1 = cmd->add_option("--c1", f.values.c1, "preventive curtailment weight");
	f.c2 = cmd->add_option("--c2", f.values.c2, "curative battery weight");
	f.c3 = cmd->add_option("--c3", f.values.c3, "curative curtailment weight");
	f.season = cmd->add_option("--season-override", f.values.season_override, "force summer or winter ratings")
				   ->check(CLI::IsMember({"summer", "winter"}));
	cmd->add_option("--config", f.config_path, "JSON run configuration; flags take precedence");
	f.verbose = cmd->add_flag("-v,--verbose", f.values.verbosity, "more logging (repeatable)");
}

RunConfig resolve(const Flags& f) {
	RunConfig cfg;
	if (!f.config_path.empty()) {
		std::ifstream in(f.config_path);
		if (!in)
			throw std::runtime_error(fmt::format("cannot read config {}", f.config_path));
		nlohmann::json doc;
		try {
			doc = nlohmann::json::parse(in);
		} catch (const nlohmann::json::exception& e) {
			throw std::runtime_error(fmt::format("{}: {}", f.config_path, e.what()));
		}
		auto get = [&](const char* key, auto& dst) {
			if (doc.contains(key) && !doc[key].is_null())
				dst = doc[key].get<std::remove_reference_t<decltype(dst)>>();
		};
		get("zone", cfg.zone);
		get("forecast", cfg.forecast);
		get("out", cfg.out);
		get("workers", cfg.workers);
		get("objective", cfg.objective);
		get("c1", cfg.c1);
		get("c2", cfg.c2);
		get("c3", cfg.c3);
		get("season_override", cfg.season_override);
		get("verbosity", cfg.verbosity);
		if (doc.contains("horizon") && !doc["horizon"].is_null())
			cfg.horizon = doc["horizon"].get<std::size_t>();
		if (doc.contains("weights")) {
			const auto& w = doc["weights"];
			cfg.c1 = w.value("c1", cfg.c1);
			cfg.c2 = w.value("c2", cfg.c2);
			cfg.c3 = w.value("c3", cfg.c3);
		}
	}
	auto given = [](const CLI::Option* o) { return o != nullptr && o->count() > 0; };
	const RunConfig& v = f.values;
	if (given(f.zone))
		cfg.zone = v.zone;
	if (given(f.forecast))
		cfg.forecast = v.forecast;
	if (given(f.horizon_opt))
		cfg.horizon = f.horizon;
	if (given(f.out))
		cfg.out = v.out;
	if (given(f.workers))
		cfg.workers = v.workers;
	if (given(f.objective))
		cfg.objective = v.objective;
	if (given(f.c1))
		cfg.c1 = v.c1;
	if (given(f.c2))
		cfg.c2 = v.c2;
	if (given(f.c3))
		cfg.c3 = v.c3;
	if (given(f.season))
		cfg.season_override = v.season_override;
	if (given(f.verbose))
		cfg.verbosity = v.verbosity;

	if (cfg.zone.empty())
		throw std::runtime_error("--zone is required");
	if (cfg.forecast.empty())
		throw std::runtime_error("--forecast is required");
	if (!std::filesystem::exists(cfg.zone))
		throw std::runtime_error(fmt::format("zone file {} does not exist", cfg.zone));
	if (!std::filesystem::exists(cfg.forecast))
		throw std::runtime_error(fmt::format("forecast file {} does not exist", cfg.forecast));
	if (cfg.workers < 1)
		throw std::runtime_error("--workers must be >= 1");
	if (!(cfg.c1 > 0.0) || !(cfg.c2 > 0.0) || !(cfg.c3 > 0.0))
		throw std::runtime_error("objective weights must be > 0");
	return cfg;
}

EngineConfig engine_config(const RunConfig& cfg) {
	EngineConfig e;
	e.weights = {cfg.c1, cfg.c2, cfg.c3};
	e.mode = parse_objective_mode(cfg.objective);
	e.workers = cfg.workers;
	if (!cfg.season_override.empty())
		e.season_override = parse_season(cfg.season_override);
	return e;
}

void configure_logging(int verbosity) {
	auto logger = spdlog::stderr_color_mt("bwe");
	spdlog::set_default_logger(logger);
	spdlog::set_pattern("[%l] %v");
	spdlog::set_level(spdlog::level::warn);
	if (const char* env = std::getenv("BANDWIDTH_ENGINE_LOG"))
		spdlog::set_level(spdlog::level::from_str(env));
	if (verbosity == 1)
		spdlog::set_level(spdlog::level::info);
	else if (verbosity == 2)
		spdlog::set_level(spdlog::level::debug);
	else if (verbosity > 2)
		spdlog::set_level(spdlog::level::trace);
}

int report_run(const RunOutcome& outcome) {
	const auto& results = outcome.power.results;
	for (const auto& f : outcome.power.failures)
		spdlog::error("timestep {} ({}): {}", f.timestep, f.timestamp, f.message);
	for (const auto& r : results)
		if (!r.feasible() && r.diagnostic.size())
			spdlog::warn("timestep {} ({}) infeasible: {}", r.timestep, r.timestamp, r.diagnostic);
	if (!outcome.energy_error.empty())
		spdlog::warn("energy bandwidths: {}", outcome.energy_error);
	const auto& all = outcome.availability.overall;
	fmt::print("{} timesteps: {} fully available, {} reduced, {} strong, {} infeasible\n", results.size(), all.fully_available,
		all.reduced, all.strong, all.infeasible);
	if (!outcome.power.failures.empty())
		return kExitError;
	return outcome.any_infeasible() ? kExitInfeasible : kExitOk;
}

RunOutcome compute(const RunConfig& cfg, const std::filesystem::path& out) {
	RunRequest req;
	req.zone_path = cfg.zone;
	req.forecast_path = cfg.forecast;
	req.out_dir = out;
	req.horizon = cfg.horizon;
	req.engine = engine_config(cfg);
	spdlog::info("solving {} with {} worker(s), {} objective", cfg.forecast, cfg.workers, cfg.objective);
	RunOutcome outcome = run_compute(req);
	spdlog::info("outputs written to {}", out.string());
	return outcome;
}

// ---- verify -----------------------------------------------------------------

struct VerifyOptions {
	std::size_t seeds = 0;
	std::string golden;
	double resolution = 0.0;
};

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

int verify_golden(const RunConfig& cfg, const std::string& golden) {
	const auto out = std::filesystem::temp_directory_path() / fmt::format("bwe-verify-{}", ::getpid());
	RunOutcome outcome = compute(cfg, out);
	std::filesystem::remove_all(out);
	std::ifstream in(golden);
	if (!in)
		throw std::runtime_error(fmt::format("cannot read golden file {}", golden));
	std::stringstream expected_text;
	expected_text << in.rdbuf();
	std::istringstream expected(expected_text.str());
	std::istringstream actual(power_csv(outcome.power.results));
	std::string e_line;
	std::string a_line;
	std::size_t line = 0;
	std::size_t mismatches = 0;
	while (true) {
		bool has_e = static_cast<bool>(std::getline(expected, e_line));
		bool has_a = static_cast<bool>(std::getline(actual, a_line));
		if (!has_e && !has_a)
			break;
		++line;
		if (has_e != has_a) {
			fmt::print("line {}: {} has extra rows\n", line, has_e ? "golden" : "engine");
			++mismatches;
			break;
		}
		if (e_line == a_line)
			continue;
		// Numbers may differ in the last printed digit.
		std::istringstream es(e_line);
		std::istringstream as(a_line);
		std::string ef;
		std::string af;
		bool same = true;
		while (std::getline(es, ef, ',')) {
			if (!std::getline(as, af, ',')) {
				same = false;
				break;
			}
			if (ef == af)
				continue;
			char* e_end = nullptr;
			char* a_end = nullptr;
			double ev = std::strtod(ef.c_str(), &e_end);
			double av = std::strtod(af.c_str(), &a_end);
			if (ef.empty() || af.empty() || *e_end != '\0' || *a_end != '\0' || !close(ev, av, 1e-6))
				same = false;
		}
		if (std::getline(as, af, ','))
			same = false;
		if (!same) {
			fmt::print("line {}:\n  golden: {}\n  engine: {}\n", line, e_line, a_line);
			++mismatches;
		}
	}
	if (mismatches > 0) {
		fmt::print("{} row(s) disagree with {}\n", mismatches, golden);
		return kExitDisagreement;
	}
	fmt::print("all {} rows agree with {}\n", line > 0 ? line - 1 : 0, golden);
	return kExitOk;
}

int verify_instance(const RunConfig& cfg, double resolution) {
	ZoneModel zone = load_zone(cfg.zone);
	Forecast forecast = load_forecast(zone, cfg.forecast);
	std::size_t count = cfg.horizon.value_or(forecast.size());
	if (count > forecast.size())
		throw std::runtime_error(fmt::format("horizon {} exceeds the {} forecast rows", count, forecast.size()));
	EngineConfig engine = engine_config(cfg);
	GridSearchConfig grid;
	grid.power_resolution = resolution;
	std::size_t disagreements = 0;
	std::vector<PowerBandwidthResult> results;
	fmt::print("{:<22} {:>24} {:>24}  {}\n", "timestep", "engine", "oracle", "status");
	for (std::size_t t = 0; t < count; ++t) {
		const ForecastRow& row = forecast[t];
		Season season = engine.season_override.value_or(row.season);
		auto r = solve_timestep(zone, row, engine, t);
		auto o = brute_force_power_bandwidth(zone, row, season, grid);
		bool ok = r.feasible() == o.feasible;
		if (ok && o.feasible)
			ok = close(r.b_lower, o.b_lower, resolution + 1e-6) && close(r.b_upper, o.b_upper, resolution + 1e-6);
		auto show = [](bool feasible, double lo, double hi) {
			return feasible ? fmt::format("[{:.3f}, {:.3f}]", lo, hi) : std::string("infeasible");
		};
		fmt::print("{:<22} {:>24} {:>24}  {}\n", row.timestamp, show(r.feasible(), r.b_lower, r.b_upper),
			show(o.feasible, o.b_lower, o.b_upper), ok ? "agree" : "DISAGREE");
		disagreements += ok ? 0 : 1;
		results.push_back(std::move(r));
	}
	bool all_feasible = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.feasible(); });
	if (all_feasible) {
		auto energy = compute_energy_bandwidths(results, zone);
		auto forward = forward_soc_feasible_set(energy.bands, zone);
		bool ok = true;
		for (std::size_t b = 0; b < forward.size(); ++b) {
			if (energy.feasible != !forward[0].empty) {
				ok = false;
				break;
			}
			if (!energy.feasible)
				break;
			if (forward[b].empty || !close(forward[b].lower, energy.soc_lower[b], 1e-6) ||
				!close(forward[b].upper, energy.soc_upper[b], 1e-6))
				ok = false;
		}
		fmt::print("energy bandwidths vs forward propagation: {}\n", ok ? "agree" : "DISAGREE");
		disagreements += ok ? 0 : 1;
	}
	fmt::print("{} disagreement(s)\n", disagreements);
	return disagreements == 0 ? kExitOk : kExitDisagreement;
}

int verify_seeds(std::size_t seeds, double resolution) {
	GridSearchConfig grid;
	grid.power_resolution = resolution;
	EngineConfig engine;
	std::size_t bw_bad = 0;
	std::size_t lp_bad = 0;
	std::size_t soc_bad = 0;
	double worst = 0.0;
	std::map<std::string, std::size_t> classes;
	const DenseSimplexSolver solver;
	for (std::size_t s = 0; s < seeds; ++s) {
		auto inst = random_instance(s);
		auto r = solve_timestep(inst.zone, inst.row, engine);
		auto o = brute_force_power_bandwidth(inst.zone, inst.row, Season::Summer, grid);
		++classes[to_string(r.congestion)];
		bool ok = r.feasible() == o.feasible;
		if (ok && o.feasible) {
			double dev = std::max(std::abs(r.b_lower - o.b_lower), std::abs(r.b_upper - o.b_upper));
			worst = std::max(worst, dev);
			ok = dev <= resolution + 1e-6;
		}
		if (!ok) {
			++bw_bad;
			spdlog::warn("seed {}: engine [{}, {}] oracle [{}, {}]", s, r.b_lower, r.b_upper, o.b_lower, o.b_upper);
		}

		LinearProgram lp = random_lp(s);
		auto sol = solver.solve(lp);
		auto vx = enumerate_vertices(lp);
		bool lp_ok = sol.status == vx.status &&
			(vx.status != LpStatus::Optimal || std::abs(sol.objective - vx.objective) <= 1e-6 * std::max(1.0, std::abs(vx.objective)));
		if (!lp_ok) {
			++lp_bad;
			spdlog::warn("seed {}: simplex {} {} vertex oracle {} {}", s, to_string(sol.status), sol.objective, to_string(vx.status),
				vx.objective);
		}

		auto series = random_power_series(s, inst.zone, 24);
		auto energy = compute_energy_bandwidths(series, inst.zone);
		auto forward = forward_soc_feasible_set(energy.bands, inst.zone);
		bool soc_ok = energy.feasible == !forward[0].empty;
		for (std::size_t b = 0; soc_ok && energy.feasible && b < forward.size(); ++b)
			soc_ok = !forward[b].empty && close(forward[b].lower, energy.soc_lower[b], 1e-6) &&
				close(forward[b].upper, energy.soc_upper[b], 1e-6);
		if (!soc_ok) {
			++soc_bad;
			spdlog::warn("seed {}: energy recursion disagrees with forward propagation", s);
		}
	}
	fmt::print("{:<36} {:>8} {:>14}\n", "check", "seeds", "disagreements");
	fmt::print("{:<36} {:>8} {:>14}\n", fmt::format("power bandwidth vs grid ({} MW)", resolution), seeds, bw_bad);
	fmt::print("{:<36} {:>8} {:>14}\n", "simplex vs vertex enumeration", seeds, lp_bad);
	fmt::print("{:<36} {:>8} {:>14}\n", "energy recursion vs forward", seeds, soc_bad);
	fmt::print("largest bandwidth deviation: {:.4f} MW\n", worst);
	for (const auto& [name, n] : classes)
		fmt::print("  {:<16} {}\n", name, n);
	return bw_bad + lp_bad + soc_bad == 0 ? kExitOk : kExitDisagreement;
}

// ---- export-lp --------------------------------------------------------------

int export_lp(const RunConfig& cfg, std::size_t timestep, const std::string& direction, const std::string& path) {
	ZoneModel zone = load_zone(cfg.zone);
	Forecast forecast = load_forecast(zone, cfg.forecast);
	if (timestep >= forecast.size())
		throw std::runtime_error(fmt::format("timestep {} outside the {} forecast rows", timestep, forecast.size()));
	EngineConfig engine = engine_config(cfg);
	BuildOptions options;
	options.direction = direction == "upper" ? Direction::Upper : Direction::Lower;
	options.weights = engine.weights;
	const ForecastRow& row = forecast[timestep];
	auto problem = build_lp(zone, row, engine.season_override.value_or(row.season), options, timestep);
	if (path.empty() || path == "-") {
		write_lp_format(problem.lp, std::cout);
	} else {
		std::ofstream out(path);
		if (!out)
			throw std::runtime_error(fmt::format("cannot write {}", path));
		write_lp_format(problem.lp, out);
	}
	spdlog::info("{} variables, {} constraints", problem.lp.variable_count(), problem.lp.constraint_count());
	return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
	CLI::App app{"Battery operating bandwidths for a sub-transmission zone"};
	app.require_subcommand(1);
	app.set_version_flag("--version", kEngineVersion);

	Flags compute_flags;
	auto* compute_cmd = app.add_subcommand("compute", "power and energy bandwidths for a forecast");
	add_run_flags(compute_cmd, compute_flags, true);

	Flags stats_flags;
	std::string stats_run;
	std::string stats_json;
	std::string stats_binding;
	auto* stats_cmd = app.add_subcommand("stats", "availability statistics");
	add_run_flags(stats_cmd, stats_flags, true);
	stats_cmd->add_option("--run", stats_run, "directory of a previous compute run");
	stats_cmd->add_option("--json", stats_json, "write the report as JSON");
	stats_cmd->add_option("--binding-csv", stats_binding, "write the binding-constraint histogram");

	Flags verify_flags;
	VerifyOptions verify;
	auto* verify_cmd = app.add_subcommand("verify", "cross-check the engine against brute-force oracles");
	add_run_flags(verify_cmd, verify_flags, false);
	verify_cmd->add_option("--seeds", verify.seeds, "random instances to sweep instead of a zone");
	verify_cmd->add_option("--golden", verify.golden, "power_bandwidths.csv to compare against");
	verify_cmd->add_option("--resolution", verify.resolution, "grid step in MW")->check(CLI::PositiveNumber);

	Flags export_flags;
	std::size_t export_timestep = 0;
	std::string export_direction = "lower";
	std::string export_path;
	auto* export_cmd = app.add_subcommand("export-lp", "write one timestep's LP in CPLEX LP format");
	add_run_flags(export_cmd, export_flags, false);
	export_cmd->add_option("--timestep", export_timestep, "row of the forecast");
	export_cmd->add_option("--direction", export_direction, "lower or upper")->check(CLI::IsMember({"lower", "upper"}));
	export_cmd->add_option("--output", export_path, "LP file (stdout when omitted)");

	CLI11_PARSE(app, argc, argv);

	int verbosity = 0;
	for (const Flags* f : {&compute_flags, &stats_flags, &verify_flags, &export_flags})
		verbosity = std::max(verbosity, f->values.verbosity);
	configure_logging(verbosity);

	try {
		if (compute_cmd->parsed()) {
			RunConfig cfg = resolve(compute_flags);
			return report_run(compute(cfg, cfg.out));
		}
		if (stats_cmd->parsed()) {
			std::vector<PowerBandwidthResult> results;
			int status = kExitOk;
			if (!stats_run.empty()) {
				results = read_report_csv(std::filesystem::path(stats_run) / "report.csv");
			} else {
				RunConfig cfg = resolve(stats_flags);
				RunOutcome outcome = compute(cfg, cfg.out);
				status = outcome.power.failures.empty() ? (outcome.any_infeasible() ? kExitInfeasible : kExitOk) : kExitError;
				results = std::move(outcome.power.results);
			}
			if (results.empty())
				throw std::runtime_error("no timesteps to summarize");
			AvailabilityReport report = summarize(results);
			fmt::print("{}", report_to_text(report));
			if (!stats_json.empty())
				std::ofstream(stats_json) << report_to_json(report).dump(2) << "\n";
			if (!stats_binding.empty())
				std::ofstream(stats_binding) << binding_histogram_csv(report);
			return status;
		}
		if (verify_cmd->parsed()) {
			if (verify.seeds > 0)
				return verify_seeds(verify.seeds, verify.resolution > 0.0 ? verify.resolution : 0.25);
			RunConfig cfg = resolve(verify_flags);
			if (!verify.golden.empty())
				return verify_golden(cfg, verify.golden);
			return verify_instance(cfg, verify.resolution > 0.0 ? verify.resolution : 0.01);
		}
		if (export_cmd->parsed())
			return export_lp(resolve(export_flags), export_timestep, export_direction, export_path);
	} catch (const std::exception& e) {
		spdlog::error("{}", e.what());
		return kExitError;
	}
	return kExitError;
}
