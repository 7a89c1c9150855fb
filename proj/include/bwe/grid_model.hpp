#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace bwe {

/// Raised for malformed or inconsistent zone / forecast input.
class InputError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

enum class Season { Summer, Winter };

std::string to_string(Season season);
Season parse_season(const std::string& text);

/// Thermal limits of one line for one season, in MW.
///
/// The short-term rating is carried through I/O but never turned into a
/// constraint; it is reserved for a future fast-curative window model.
struct RatingSet {
	double permanent = 0.0;
	double long_term = 0.0;
	double immediate = 0.0;
	std::optional<double> short_term;

	bool operator==(const RatingSet&) const = default;
};

struct Bus {
	std::string id;

	bool operator==(const Bus&) const = default;
};

struct Line {
	std::string id;
	std::size_t from_bus = 0;
	std::size_t to_bus = 0;
	double reactance_pu = 0.0;
	RatingSet summer;
	RatingSet winter;

	bool operator==(const Line&) const = default;
};

/// Line crossing the zone boundary. Its flow is oriented out of the zone:
/// positive means power leaves through `boundary_bus`.
struct OutboundLine {
	std::string id;
	std::size_t boundary_bus = 0;
	// Sensitivity of the outbound flow to a 1 MW injection at each zone bus
	// (withdrawn at the remote slack), indexed by bus.
	std::vector<double> ptdf_normal;
	// Same, per contingency (outer index) and bus (inner index).
	std::vector<std::vector<double>> ptdf_contingency;

	bool operator==(const OutboundLine&) const = default;
};

struct Contingency {
	std::string id;
	std::string outaged_element;
	bool modifies_zone_topology = false;
	// Index of the outaged internal line when modifies_zone_topology is set.
	std::optional<std::size_t> outaged_line;

	bool operator==(const Contingency&) const = default;
};

struct Battery {
	std::size_t bus = 0;
	double pmin_mw = 0.0; // most negative injection (full discharge)
	double pmax_mw = 0.0; // full charge
	double capacity_mwh = 0.0;
	double soc_min_mwh = 0.0;

	bool operator==(const Battery&) const = default;
};

/// Static description of the zone. Immutable once loaded.
struct ZoneModel {
	std::string name;
	std::vector<Bus> buses;
	std::vector<Line> lines;
	std::vector<OutboundLine> outbound_lines;
	std::vector<Contingency> contingencies;
	Battery battery;
	double base_mva = 100.0;
	double timestep_hours = 1.0;
	double curative_duration_hours = 5.0 / 60.0;

	bool operator==(const ZoneModel&) const = default;

	std::size_t bus_index(const std::string& id) const;
	std::optional<std::size_t> find_bus(const std::string& id) const;
	std::optional<std::size_t> find_line(const std::string& id) const;
	std::optional<std::size_t> find_contingency(const std::string& id) const;

	/// Battery power limit at a bus: zero everywhere but the battery bus.
	double battery_min_at(std::size_t bus) const { return bus == battery.bus ? battery.pmin_mw : 0.0; }
	double battery_max_at(std::size_t bus) const { return bus == battery.bus ? battery.pmax_mw : 0.0; }
};

const RatingSet& select_ratings(const Line& line, Season season);

/// Connected components of the internal line graph with one line removed
/// (or none). Returns the component label of every bus, labels numbered in
/// order of their lowest bus index.
std::vector<std::size_t> internal_islands(const ZoneModel& zone, std::optional<std::size_t> outaged_line);

/// Outaged internal line of a contingency, or nothing for external outages.
std::optional<std::size_t> outaged_internal_line(const ZoneModel& zone, std::optional<std::size_t> contingency);

/// One forecast timestep. Vectors are indexed like the zone's buses,
/// outbound lines and contingencies.
struct ForecastRow {
	std::string timestamp;
	Season season = Season::Summer;
	std::vector<double> injection_mw;
	std::vector<double> curtailable_max_mw;
	std::vector<double> reference_flow_normal;
	// [contingency][outbound line]
	std::vector<std::vector<double>> reference_flow_contingency;

	bool operator==(const ForecastRow&) const = default;
};

using Forecast = std::vector<ForecastRow>;

// Zone I/O. Parsing validates every invariant and throws InputError naming
// the offending element.
ZoneModel parse_zone(const nlohmann::json& document);
ZoneModel load_zone(const std::filesystem::path& path);
nlohmann::json zone_to_json(const ZoneModel& zone);
void validate_zone(const ZoneModel& zone);

// Forecast CSV I/O. Columns are resolved by header name:
// timestamp, season, inj:<bus>, curt_max:<bus>, ref:<oline>, ref:<oline>@<contingency>.
Forecast parse_forecast(const ZoneModel& zone, std::istream& in);
Forecast load_forecast(const ZoneModel& zone, const std::filesystem::path& path);
void write_forecast(const ZoneModel& zone, const Forecast& forecast, std::ostream& out);
void validate_forecast_row(const ZoneModel& zone, const ForecastRow& row, std::size_t index);

} // namespace bwe
