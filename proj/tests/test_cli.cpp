#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <sys/wait.h>

#include "bwe/report.hpp"
#include "support.hpp"

using namespace bwe;
using bwe::test::Zone90kv;
using bwe::test::TempDir;

namespace {

const std::filesystem::path kData = BWE_DATA_DIR;

int run(const std::string& args) {
	std::string cmd = fmt::format("\"{}\" {} >/dev/null 2>&1", BWE_CLI, args);
	int status = std::system(cmd.c_str());
	return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string zone_arg() { return fmt::format("--zone \"{}\"", (kData / "zone90kv.json").string()); }

std::string forecast_arg(const std::filesystem::path& p) { return fmt::format("--forecast \"{}\"", p.string()); }

void write_rows(const std::filesystem::path& path, const ZoneModel& zone, const Forecast& rows) {
	std::ostringstream out;
	write_forecast(zone, rows, out);
	test::write_file(path, out.str());
}

} // namespace

TEST_CASE("format and digest helpers") {
	CHECK(format_mw(-0.0) == "0.000000");
	CHECK(format_mw(-1e-9) == "0.000000");
	CHECK(format_mw(1.6666666) == "1.666667");
	CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("report round trip") {
	Zone90kv pz;
	std::vector<PowerBandwidthResult> rs;
	for (const auto& row : {pz.normal_overload(), pz.quiet(), pz.contingency_overload()})
		rs.push_back(solve_timestep(pz.zone, row, EngineConfig{}, rs.size()));
	PowerBandwidthResult bad;
	bad.timestep = 3;
	bad.timestamp = "x,y";
	bad.diagnostic = "gamma-delta:n:permanent exceeded by 4 MW";
	rs.push_back(bad);
	TempDir dir("report");
	test::write_file(dir / "report.csv", report_csv(rs, std::nullopt));
	auto back = read_report_csv(dir / "report.csv");
	REQUIRE(back.size() == rs.size());
	for (std::size_t t = 0; t < rs.size(); ++t) {
		CHECK(back[t].congestion == rs[t].congestion);
		CHECK(back[t].season == rs[t].season);
		CHECK(back[t].timestamp == rs[t].timestamp);
		CHECK(back[t].binding_constraint == rs[t].binding_constraint);
		if (rs[t].feasible())
			CHECK(back[t].b_lower == doctest::Approx(rs[t].b_lower).epsilon(1e-6));
	}
	CHECK(power_csv(rs).find("\"x,y\",,,") != std::string::npos);
}

TEST_CASE("energy csv") {
	CHECK(energy_csv({}, std::nullopt) == "boundary,timestamp,soc_lower_mwh,soc_upper_mwh\n");
	PowerBandwidthResult r;
	r.timestamp = "t0";
	EnergyBandwidthResult e;
	e.soc_lower = {0.0, 1.0};
	e.soc_upper = {24.0, 23.0};
	CHECK(energy_csv({r}, e) == "boundary,timestamp,soc_lower_mwh,soc_upper_mwh\n0,t0,0.000000,24.000000\n1,end,1.000000,23.000000\n");
}

TEST_CASE("compute writes every output") {
	TempDir dir("compute");
	REQUIRE(run(fmt::format("compute {} {} --out \"{}\"", zone_arg(), forecast_arg(kData / "summer_day.csv"), dir.path().string())) == 0);
	for (const char* name : {"power_bandwidths.csv", "energy_bandwidths.csv", "report.csv", "availability.json", "manifest.json"})
		CHECK(std::filesystem::exists(dir / name));
	auto manifest = nlohmann::json::parse(test::read_file(dir / "manifest.json"));
	CHECK(manifest["engine"]["version"] == kEngineVersion);
	CHECK(manifest["outputs"]["power_bandwidths.csv"] == sha256_file(dir / "power_bandwidths.csv"));
	CHECK(manifest["inputs"]["forecast"]["sha256"] == sha256_file(kData / "summer_day.csv"));
	CHECK(manifest["summary"]["energy_feasible"] == true);

	auto rows = read_report_csv(dir / "report.csv");
	REQUIRE(rows.size() == 24);
	CHECK(rows[7].b_lower == doctest::Approx(1.666667).epsilon(1e-6));

	CHECK(run(fmt::format("stats --run \"{}\" --json \"{}\"", dir.path().string(), (dir / "stats.json").string())) == 0);
	auto stats = nlohmann::json::parse(test::read_file(dir / "stats.json"));
	CHECK(stats["overall"]["timesteps"] == 24);
}

TEST_CASE("compute is deterministic across worker counts") {
	TempDir a("det-a");
	TempDir b("det-b");
	const auto forecast = forecast_arg(kData / "winter_day.csv");
	REQUIRE(run(fmt::format("compute {} {} --out \"{}\" --workers 1", zone_arg(), forecast, a.path().string())) == 0);
	REQUIRE(run(fmt::format("compute {} {} --out \"{}\" --workers 3", zone_arg(), forecast, b.path().string())) == 0);
	for (const char* name : {"power_bandwidths.csv", "energy_bandwidths.csv", "report.csv", "availability.json"})
		CHECK(test::read_file(a / name) == test::read_file(b / name));
}

TEST_CASE("input errors exit 1") {
	TempDir dir("errors");
	test::write_file(dir / "empty.csv", test::read_file(kData / "summer_day.csv").substr(0, test::read_file(kData / "summer_day.csv").find('\n') + 1));
	CHECK(run(fmt::format("compute {} {} --out \"{}\"", zone_arg(), forecast_arg(dir / "empty.csv"), (dir / "o").string())) == 1);
	CHECK(run(fmt::format("compute {} {} --out \"{}\"", zone_arg(), forecast_arg(dir / "missing.csv"), (dir / "o").string())) == 1);
	CHECK(run(fmt::format("compute {} {} --out \"{}\" --workers 0", zone_arg(), forecast_arg(kData / "summer_day.csv"),
			  (dir / "o").string())) == 1);
	CHECK(run(fmt::format("compute {} {} --out \"{}\" --c1 -1", zone_arg(), forecast_arg(kData / "summer_day.csv"),
			  (dir / "o").string())) == 1);
}

TEST_CASE("unclearable overload exits 2") {
	Zone90kv pz;
	TempDir dir("overload");
	// Nothing curtailable and far more export than the chain can carry.
	Forecast rows{pz.normal_overload(), pz.row(Season::Summer, 10, 60, 90, -10, 300, {0, 0, 0, 0})};
	rows[0].timestamp = "2024-07-15T07:00";
	rows[1].timestamp = "2024-07-15T08:00";
	write_rows(dir / "overload.csv", pz.zone, rows);
	CHECK(run(fmt::format("compute {} {} --out \"{}\"", zone_arg(), forecast_arg(dir / "overload.csv"), (dir / "o").string())) == 2);
	auto report = read_report_csv(dir / "o" / "report.csv");
	REQUIRE(report.size() == 2);
	CHECK(report[0].feasible());
	CHECK_FALSE(report[1].feasible());
	CHECK(test::read_file(dir / "o" / "energy_bandwidths.csv") == "boundary,timestamp,soc_lower_mwh,soc_upper_mwh\n");
}

TEST_CASE("verify against goldens") {
	TempDir dir("golden");
	const auto golden = kData / "golden" / "summer_day_power.csv";
	CHECK(run(fmt::format("verify {} {} --golden \"{}\"", zone_arg(), forecast_arg(kData / "summer_day.csv"), golden.string())) == 0);

	std::string text = test::read_file(golden);
	auto pos = text.find("1.666667");
	REQUIRE(pos != std::string::npos);
	text.replace(pos, 8, "1.766667");
	test::write_file(dir / "bad.csv", text);
	CHECK(run(fmt::format("verify {} {} --golden \"{}\"", zone_arg(), forecast_arg(kData / "summer_day.csv"),
			  (dir / "bad.csv").string())) == 3);
}

TEST_CASE("verify against oracles") {
	CHECK(run("verify --seeds 5") == 0);
	CHECK(run(fmt::format("verify {} {} --horizon 4 --resolution 0.05", zone_arg(), forecast_arg(kData / "winter_day.csv"))) == 0);
}

TEST_CASE("export-lp") {
	TempDir dir("export");
	const auto lp = dir / "t7.lp";
	REQUIRE(run(fmt::format("export-lp {} {} --timestep 7 --direction upper --output \"{}\"", zone_arg(),
				forecast_arg(kData / "summer_day.csv"), lp.string())) == 0);
	std::string text = test::read_file(lp);
	CHECK(text.rfind("\\", 0) == 0);
	CHECK(text.find("Minimize") != std::string::npos);
	CHECK(text.find("Subject To") != std::string::npos);
	CHECK(text.find("End") != std::string::npos);
	CHECK(run(fmt::format("export-lp {} {} --timestep 99", zone_arg(), forecast_arg(kData / "summer_day.csv"))) == 1);
}
