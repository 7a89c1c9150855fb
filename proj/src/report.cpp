#include "bwe/report.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <openssl/evp.h>

namespace bwe {

namespace {

std::string csv_field(const std::string& text) {
	if (text.find_first_of(",\"\n") == std::string::npos)
		return text;
	std::string out = "\"";
	for (char c : text) {
		if (c == '"')
			out += '"';
		out += c;
	}
	return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
	std::vector<std::string> fields(1);
	bool quoted = false;
	for (std::size_t i = 0; i < line.size(); ++i) {
		char c = line[i];
		if (quoted) {
			if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
				fields.back() += '"';
				++i;
			} else if (c == '"') {
				quoted = false;
			} else {
				fields.back() += c;
			}
		} else if (c == '"') {
			quoted = true;
		} else if (c == ',') {
			fields.emplace_back();
		} else if (c != '\r') {
			fields.back() += c;
		}
	}
	return fields;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
	std::ofstream out(path, std::ios::binary);
	if (!out)
		throw std::runtime_error(fmt::format("cannot write {}", path.string()));
	out << text;
}

std::string bound(const PowerBandwidthResult& r, double value) { return r.feasible() ? format_mw(value) : std::string(); }

} // namespace

std::string format_mw(double value) {
	std::string s = fmt::format("{:.6f}", value);
	if (s == "-0.000000")
		return "0.000000";
	return s;
}

std::string sha256_hex(const std::string& bytes) {
	unsigned char digest[EVP_MAX_MD_SIZE];
	unsigned int length = 0;
	if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
		throw std::runtime_error("SHA-256 digest failed");
	std::string out;
	for (unsigned int i = 0; i < length; ++i)
		out += fmt::format("{:02x}", digest[i]);
	return out;
}

std::string sha256_file(const std::filesystem::path& path) {
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw std::runtime_error(fmt::format("cannot read {}", path.string()));
	std::ostringstream buffer;
	buffer << in.rdbuf();
	return sha256_hex(buffer.str());
}

std::string power_csv(const std::vector<PowerBandwidthResult>& results) {
	std::string out = "timestamp,B_lower_mw,B_upper_mw,curative_charge_worst_mw,curative_discharge_worst_mw,"
					  "preventive_curtailment_mw,congestion_class,binding_constraint\n";
	for (const auto& r : results) {
		out += fmt::format("{},{},{},{},{},{},{},{}\n", csv_field(r.timestamp), bound(r, r.b_lower), bound(r, r.b_upper),
			bound(r, r.curative_charge_worst), bound(r, r.curative_discharge_worst), bound(r, r.preventive_curtailment()),
			to_string(r.congestion), csv_field(r.binding_constraint));
	}
	return out;
}

std::string energy_csv(const std::vector<PowerBandwidthResult>& results, const std::optional<EnergyBandwidthResult>& energy) {
	std::string out = "boundary,timestamp,soc_lower_mwh,soc_upper_mwh\n";
	if (!energy)
		return out;
	for (std::size_t t = 0; t < energy->soc_lower.size(); ++t) {
		// The closing boundary has no timestep of its own.
		std::string stamp = t < results.size() ? results[t].timestamp : "end";
		out += fmt::format("{},{},{},{}\n", t, csv_field(stamp), format_mw(energy->soc_lower[t]), format_mw(energy->soc_upper[t]));
	}
	return out;
}

std::string report_csv(const std::vector<PowerBandwidthResult>& results, const std::optional<EnergyBandwidthResult>& energy) {
	std::string out = "timestep,timestamp,season,B_lower_mw,B_upper_mw,curative_charge_worst_mw,curative_discharge_worst_mw,"
					  "curtailment_lower_mw,curtailment_upper_mw,congestion_class,binding_constraint,"
					  "soc_lower_start_mwh,soc_upper_start_mwh,soc_lower_end_mwh,soc_upper_end_mwh,diagnostic\n";
	for (std::size_t t = 0; t < results.size(); ++t) {
		const auto& r = results[t];
		std::string soc = ",,,";
		if (energy && t + 1 < energy->soc_lower.size())
			soc = fmt::format("{},{},{},{}", format_mw(energy->soc_lower[t]), format_mw(energy->soc_upper[t]),
				format_mw(energy->soc_lower[t + 1]), format_mw(energy->soc_upper[t + 1]));
		out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", t, csv_field(r.timestamp), to_string(r.season),
			bound(r, r.b_lower), bound(r, r.b_upper), bound(r, r.curative_charge_worst), bound(r, r.curative_discharge_worst),
			bound(r, r.curtailment_lower), bound(r, r.curtailment_upper), to_string(r.congestion),
			csv_field(r.binding_constraint), soc, csv_field(r.diagnostic));
	}
	return out;
}

std::vector<PowerBandwidthResult> read_report_csv(const std::filesystem::path& path) {
	std::ifstream in(path);
	if (!in)
		throw std::runtime_error(fmt::format("cannot read {}", path.string()));
	std::string line;
	if (!std::getline(in, line))
		throw std::runtime_error(fmt::format("{}: empty report", path.string()));
	auto header = split_csv_line(line);
	auto column = [&](const std::string& name) {
		for (std::size_t i = 0; i < header.size(); ++i)
			if (header[i] == name)
				return i;
		throw std::runtime_error(fmt::format("{}: missing column '{}'", path.string(), name));
	};
	const std::size_t c_time = column("timestamp");
	const std::size_t c_season = column("season");
	const std::size_t c_lower = column("B_lower_mw");
	const std::size_t c_upper = column("B_upper_mw");
	const std::size_t c_class = column("congestion_class");
	const std::size_t c_binding = column("binding_constraint");
	std::vector<PowerBandwidthResult> out;
	std::size_t number = 1;
	while (std::getline(in, line)) {
		++number;
		if (line.empty())
			continue;
		auto f = split_csv_line(line);
		if (f.size() != header.size())
			throw std::runtime_error(fmt::format("{}:{}: expected {} fields, found {}", path.string(), number, header.size(), f.size()));
		PowerBandwidthResult r;
		r.timestep = out.size();
		r.timestamp = f[c_time];
		r.season = parse_season(f[c_season]);
		r.congestion = parse_congestion_class(f[c_class]);
		r.binding_constraint = f[c_binding];
		if (r.feasible()) {
			r.b_lower = std::stod(f[c_lower]);
			r.b_upper = std::stod(f[c_upper]);
			r.lower_status = r.upper_status = LpStatus::Optimal;
		}
		out.push_back(std::move(r));
	}
	return out;
}

RunOutcome run_compute(const RunRequest& request) {
	RunOutcome outcome;
	outcome.zone = load_zone(request.zone_path);
	Forecast forecast = load_forecast(outcome.zone, request.forecast_path);
	if (forecast.empty())
		throw InputError(fmt::format("{}: forecast has no rows", request.forecast_path.string()));
	if (request.horizon && (*request.horizon == 0 || *request.horizon > forecast.size()))
		throw InputError(fmt::format("horizon {} outside [1, {}]", *request.horizon, forecast.size()));

	outcome.power = compute_power_bandwidths(outcome.zone, forecast, request.engine, request.horizon);
	const auto& results = outcome.power.results;
	if (outcome.power.failures.empty() && outcome.power.infeasible_count() == 0) {
		try {
			outcome.energy = compute_energy_bandwidths(results, outcome.zone);
		} catch (const EnergyError& e) {
			outcome.energy_error = e.what();
		}
	} else {
		outcome.energy_error = "energy bandwidths need a feasible power bandwidth at every timestep";
	}
	if (outcome.energy && !outcome.energy->feasible)
		outcome.energy_error = outcome.energy->message;
	outcome.availability = summarize(results);

	std::filesystem::create_directories(request.out_dir);
	const std::vector<std::pair<std::string, std::string>> files = {
		{"power_bandwidths.csv", power_csv(results)},
		{"energy_bandwidths.csv", energy_csv(results, outcome.energy)},
		{"report.csv", report_csv(results, outcome.energy)},
		{"availability.json", report_to_json(outcome.availability).dump(2) + "\n"},
	};
	nlohmann::json outputs = nlohmann::json::object();
	for (const auto& [name, text] : files) {
		write_text(request.out_dir / name, text);
		outputs[name] = sha256_hex(text);
	}

	const EngineConfig& cfg = request.engine;
	nlohmann::json failures = nlohmann::json::array();
	for (const auto& f : outcome.power.failures)
		failures.push_back({{"timestep", f.timestep}, {"timestamp", f.timestamp}, {"message", f.message}});
	nlohmann::json infeasible = nlohmann::json::array();
	for (const auto& r : results)
		if (!r.feasible())
			infeasible.push_back({{"timestep", r.timestep}, {"timestamp", r.timestamp}, {"diagnostic", r.diagnostic}});
	const SimplexOptions simplex;
	outcome.manifest = {
		{"engine", {{"name", "bandwidth-engine"}, {"version", kEngineVersion}, {"solver", (cfg.solver ? *cfg.solver : default_solver()).name()}}},
		{"inputs",
			{{"zone", {{"path", request.zone_path.string()}, {"sha256", sha256_file(request.zone_path)}}},
				{"forecast", {{"path", request.forecast_path.string()}, {"sha256", sha256_file(request.forecast_path)}}}}},
		{"config",
			{{"objective", to_string(cfg.mode)},
				{"c1", cfg.weights.c1},
				{"c2", cfg.weights.c2},
				{"c3", cfg.weights.c3},
				{"season_override", cfg.season_override ? nlohmann::json(to_string(*cfg.season_override)) : nlohmann::json()},
				{"horizon", results.size()},
				{"timestep_hours", outcome.zone.timestep_hours},
				{"curative_duration_hours", outcome.zone.curative_duration_hours}}},
		{"tolerances",
			{{"congestion_class_mw", cfg.class_tolerance},
				{"lexicographic_curtailment_mw", cfg.curtailment_tolerance},
				{"simplex_feasibility", simplex.feasibility_tolerance},
				{"simplex_optimality", simplex.optimality_tolerance},
				{"solution_check", 1e-6},
				{"energy_mwh", 1e-9}}},
		{"outputs", outputs},
		{"summary",
			{{"timesteps", results.size()},
				{"infeasible_timesteps", infeasible},
				{"failures", failures},
				{"energy_feasible", outcome.energy && outcome.energy->feasible},
				{"energy_message", outcome.energy_error}}},
	};
	write_text(request.out_dir / "manifest.json", outcome.manifest.dump(2) + "\n");
	return outcome;
}

} // namespace bwe
