#include <doctest.h>

#include <sstream>

#include "bwe/grid_model.hpp"
#include "support.hpp"

using namespace bwe;
using bwe::test::Zone90kv;

namespace {

nlohmann::json fixture_json() { return zone_to_json(Zone90kv{}.zone); }

std::string error_of(const nlohmann::json& doc) {
	try {
		parse_zone(doc);
	} catch (const InputError& e) {
		return e.what();
	}
	return {};
}

std::string forecast_text(const ZoneModel& zone, const Forecast& forecast) {
	std::ostringstream out;
	write_forecast(zone, forecast, out);
	return out.str();
}

} // namespace

TEST_CASE("zone json round trip") {
	Zone90kv pz;
	ZoneModel back = parse_zone(zone_to_json(pz.zone));
	CHECK(back == pz.zone);
	CHECK(back.buses.size() == 4);
	CHECK(back.lines.size() == 3);
	CHECK(back.outbound_lines.size() == 2);
	CHECK(back.contingencies[0].modifies_zone_topology);
	CHECK_FALSE(back.contingencies[1].modifies_zone_topology);
}

TEST_CASE("zone defaults") {
	auto doc = fixture_json();
	doc.erase("base_mva");
	doc.erase("curative_duration_hours");
	doc["battery"].erase("soc_min_mwh");
	ZoneModel z = parse_zone(doc);
	CHECK(z.base_mva == 100.0);
	CHECK(z.curative_duration_hours == doctest::Approx(5.0 / 60.0));
	CHECK(z.battery.soc_min_mwh == 0.0);
}

TEST_CASE("zone errors name the offending element") {
	SUBCASE("duplicate bus") {
		auto doc = fixture_json();
		doc["buses"][1]["id"] = "alpha";
		CHECK(error_of(doc).find("alpha") != std::string::npos);
	}
	SUBCASE("nonpositive reactance") {
		auto doc = fixture_json();
		doc["lines"][0]["reactance_pu"] = 0.0;
		CHECK(error_of(doc).find("alpha-beta") != std::string::npos);
	}
	SUBCASE("rating order") {
		auto doc = fixture_json();
		doc["lines"][2]["ratings"]["summer"]["immediate"] = 50.0;
		CHECK(error_of(doc).find("gamma-delta") != std::string::npos);
	}
	SUBCASE("unknown bus") {
		auto doc = fixture_json();
		doc["lines"][1]["to"] = "omega";
		CHECK(error_of(doc).find("omega") != std::string::npos);
	}
	SUBCASE("self loop") {
		auto doc = fixture_json();
		doc["lines"][1]["to"] = "beta";
		CHECK_FALSE(error_of(doc).empty());
	}
	SUBCASE("battery limits") {
		auto doc = fixture_json();
		doc["battery"]["pmin_mw"] = 5.0;
		CHECK(error_of(doc).find("battery") != std::string::npos);
	}
	SUBCASE("disconnected zone") {
		auto doc = fixture_json();
		doc["lines"].erase(1);
		CHECK_FALSE(error_of(doc).empty());
	}
	SUBCASE("no outbound line") {
		auto doc = fixture_json();
		doc["outbound_lines"] = nlohmann::json::array();
		CHECK_FALSE(error_of(doc).empty());
	}
	SUBCASE("ptdf out of range") {
		auto doc = fixture_json();
		doc["outbound_lines"][0]["ptdf"]["beta"] = 1.5;
		CHECK_FALSE(error_of(doc).empty());
	}
	SUBCASE("internal outage without topology flag") {
		auto doc = fixture_json();
		doc["contingencies"][0]["modifies_zone_topology"] = false;
		CHECK(error_of(doc).find("n-gamma-delta") != std::string::npos);
	}
	SUBCASE("missing field") {
		auto doc = fixture_json();
		doc["battery"].erase("bus");
		CHECK(error_of(doc).find("bus") != std::string::npos);
	}
}

TEST_CASE("season ratings") {
	Zone90kv pz;
	const Line& gd = pz.zone.lines[*pz.zone.find_line("gamma-delta")];
	CHECK(select_ratings(gd, Season::Summer).permanent == 77.0);
	CHECK(select_ratings(gd, Season::Winter).permanent == 87.0);
	CHECK(parse_season("winter") == Season::Winter);
	CHECK_THROWS_AS(parse_season("autumn"), InputError);
}

TEST_CASE("islands after an internal outage") {
	Zone90kv pz;
	auto base = internal_islands(pz.zone, std::nullopt);
	CHECK(base == std::vector<std::size_t>{0, 0, 0, 0});
	auto split = internal_islands(pz.zone, pz.zone.find_line("gamma-delta"));
	CHECK(split == std::vector<std::size_t>{0, 0, 0, 1});
	CHECK(outaged_internal_line(pz.zone, 0) == pz.zone.find_line("gamma-delta"));
	CHECK_FALSE(outaged_internal_line(pz.zone, 1).has_value());
}

TEST_CASE("forecast round trip") {
	Zone90kv pz;
	Forecast f{pz.normal_overload(), pz.combined_overload()};
	f[0].timestamp = "2024-07-15T07:00";
	f[1].timestamp = "2024-01-15T00:00";
	std::string text = forecast_text(pz.zone, f);
	std::istringstream in(text);
	Forecast back = parse_forecast(pz.zone, in);
	REQUIRE(back.size() == 2);
	CHECK(back[0] == f[0]);
	CHECK(back[1] == f[1]);
	CHECK(forecast_text(pz.zone, back) == text);
}

TEST_CASE("forecast columns are found by header") {
	Zone90kv pz;
	Forecast f{pz.normal_overload()};
	std::string text = forecast_text(pz.zone, f);
	// Swap two columns in header and data.
	auto swap_fields = [](const std::string& line) {
		std::vector<std::string> parts;
		std::stringstream ss(line);
		std::string item;
		while (std::getline(ss, item, ','))
			parts.push_back(item);
		std::swap(parts[2], parts[3]);
		std::string out;
		for (std::size_t i = 0; i < parts.size(); ++i)
			out += (i ? "," : "") + parts[i];
		return out;
	};
	std::istringstream lines(text);
	std::string header;
	std::string row;
	std::getline(lines, header);
	std::getline(lines, row);
	std::istringstream in(swap_fields(header) + "\n" + swap_fields(row) + "\n");
	Forecast back = parse_forecast(pz.zone, in);
	CHECK(back[0] == f[0]);
}

TEST_CASE("forecast errors") {
	Zone90kv pz;
	std::string text = forecast_text(pz.zone, {pz.normal_overload()});
	auto parse_error = [&](const std::string& body) -> std::string {
		std::istringstream in(body);
		try {
			parse_forecast(pz.zone, in);
		} catch (const InputError& e) {
			return e.what();
		}
		return {};
	};
	std::string header = text.substr(0, text.find('\n'));
	std::string row = text.substr(text.find('\n') + 1);

	SUBCASE("missing column") {
		std::string h = header;
		h.replace(h.find("inj:beta"), 8, "inj:omega");
		CHECK(parse_error(h + "\n" + row).find("inj:") != std::string::npos);
	}
	SUBCASE("bad number names line") {
		std::string r = row;
		r.replace(r.find(",10,"), 4, ",x1,");
		CHECK(parse_error(header + "\n" + r).find("line 2") != std::string::npos);
	}
	SUBCASE("imbalanced reference flows") {
		std::string r = row;
		auto pos = r.find("summer,") + 7;
		r.replace(pos, 2, "40");
		CHECK_FALSE(parse_error(header + "\n" + r).empty());
	}
	SUBCASE("negative curtailment") {
		std::string r = row;
		r.replace(r.find(",20,"), 4, ",-2,");
		CHECK_FALSE(parse_error(header + "\n" + r).empty());
	}
	SUBCASE("unknown season") {
		std::string r = row;
		r.replace(r.find("summer"), 6, "spring");
		CHECK_FALSE(parse_error(header + "\n" + r).empty());
	}
}
