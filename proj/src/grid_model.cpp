#include "bwe/grid_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

namespace bwe {

namespace {

constexpr double kPtdfTolerance = 1e-6;
constexpr double kPtdfSumTolerance = 1e-5;
constexpr double kBalanceTolerance = 1e-4;

using nlohmann::json;

const json& require(const json& object, const char* key, const std::string& where) {
	if (!object.is_object() || !object.contains(key))
		throw InputError(fmt::format("{}: missing field '{}'", where, key));
	return object.at(key);
}

double require_number(const json& object, const char* key, const std::string& where) {
	const json& value = require(object, key, where);
	if (!value.is_number())
		throw InputError(fmt::format("{}: field '{}' must be a number", where, key));
	double number = value.get<double>();
	if (!std::isfinite(number))
		throw InputError(fmt::format("{}: field '{}' must be finite", where, key));
	return number;
}

std::string require_string(const json& object, const char* key, const std::string& where) {
	const json& value = require(object, key, where);
	if (!value.is_string())
		throw InputError(fmt::format("{}: field '{}' must be a string", where, key));
	return value.get<std::string>();
}

const json& require_array(const json& object, const char* key, const std::string& where) {
	const json& value = require(object, key, where);
	if (!value.is_array())
		throw InputError(fmt::format("{}: field '{}' must be an array", where, key));
	return value;
}

RatingSet parse_rating(const json& object, const std::string& where) {
	RatingSet rating;
	rating.permanent = require_number(object, "permanent", where);
	rating.long_term = require_number(object, "long_term", where);
	rating.immediate = require_number(object, "immediate", where);
	if (object.contains("short_term") && !object.at("short_term").is_null())
		rating.short_term = require_number(object, "short_term", where);
	return rating;
}

json rating_to_json(const RatingSet& rating) {
	json out = {{"permanent", rating.permanent}, {"long_term", rating.long_term}, {"immediate", rating.immediate}};
	if (rating.short_term)
		out["short_term"] = *rating.short_term;
	return out;
}

std::vector<double> parse_bus_map(const json& object, const ZoneModel& zone, const std::string& where) {
	if (!object.is_object())
		throw InputError(fmt::format("{}: expected an object keyed by bus id", where));
	std::vector<double> values(zone.buses.size(), 0.0);
	std::vector<bool> seen(zone.buses.size(), false);
	for (auto it = object.begin(); it != object.end(); ++it) {
		auto bus = zone.find_bus(it.key());
		if (!bus)
			throw InputError(fmt::format("{}: unknown bus '{}'", where, it.key()));
		if (!it.value().is_number() || !std::isfinite(it.value().get<double>()))
			throw InputError(fmt::format("{}: factor for bus '{}' must be a finite number", where, it.key()));
		values[*bus] = it.value().get<double>();
		seen[*bus] = true;
	}
	for (std::size_t b = 0; b < zone.buses.size(); ++b)
		if (!seen[b])
			throw InputError(fmt::format("{}: missing factor for bus '{}'", where, zone.buses[b].id));
	return values;
}

json bus_map_to_json(const std::vector<double>& values, const ZoneModel& zone) {
	json out = json::object();
	for (std::size_t b = 0; b < zone.buses.size(); ++b)
		out[zone.buses[b].id] = values[b];
	return out;
}

void check_rating(const RatingSet& rating, const std::string& line, const char* season) {
	if (!(rating.permanent > 0.0))
		throw InputError(fmt::format("line '{}' ({}): permanent rating must be > 0", line, season));
	if (!(rating.permanent <= rating.long_term && rating.long_term <= rating.immediate))
		throw InputError(fmt::format("line '{}' ({}): ratings must satisfy permanent <= long_term <= immediate", line, season));
	if (rating.short_term && !(*rating.short_term > 0.0))
		throw InputError(fmt::format("line '{}' ({}): short-term rating must be > 0", line, season));
}

// Checks that outbound sensitivities of one topology route every zone bus
// injection out of its own island exactly once.
void check_ptdf_topology(const ZoneModel& zone, std::optional<std::size_t> contingency) {
	auto islands = internal_islands(zone, outaged_internal_line(zone, contingency));
	std::string state = contingency ? fmt::format("contingency '{}'", zone.contingencies[*contingency].id) : "normal state";
	for (std::size_t k = 0; k < zone.buses.size(); ++k) {
		double inside = 0.0;
		double outside = 0.0;
		for (const auto& oline : zone.outbound_lines) {
			double factor = contingency ? oline.ptdf_contingency[*contingency][k] : oline.ptdf_normal[k];
			if (std::abs(factor) > 1.0 + kPtdfTolerance)
				throw InputError(fmt::format("outbound line '{}' ({}): |ptdf| for bus '{}' exceeds 1", oline.id, state, zone.buses[k].id));
			if (islands[oline.boundary_bus] == islands[k])
				inside += factor;
			else
				outside += std::abs(factor);
		}
		if (std::abs(inside - 1.0) > kPtdfSumTolerance || outside > kPtdfSumTolerance)
			throw InputError(fmt::format(
				"{}: outbound PTDFs of bus '{}' must sum to 1 over the outbound lines of its island (got {:.6f})", state,
				zone.buses[k].id, inside));
	}
}

std::vector<std::string> split_csv_line(const std::string& line) {
	std::vector<std::string> fields;
	std::string field;
	std::istringstream stream(line);
	while (std::getline(stream, field, ','))
		fields.push_back(field);
	if (!line.empty() && line.back() == ',')
		fields.emplace_back();
	for (auto& f : fields) {
		auto first = f.find_first_not_of(" \t\r");
		auto last = f.find_last_not_of(" \t\r");
		f = first == std::string::npos ? std::string() : f.substr(first, last - first + 1);
	}
	return fields;
}

double parse_double(const std::string& text, const std::string& where) {
	try {
		std::size_t used = 0;
		double value = std::stod(text, &used);
		if (used != text.size() || !std::isfinite(value))
			throw std::invalid_argument(text);
		return value;
	} catch (const std::exception&) {
		throw InputError(fmt::format("{}: '{}' is not a finite number", where, text));
	}
}

} // namespace

std::string to_string(Season season) {
	return season == Season::Summer ? "summer" : "winter";
}

Season parse_season(const std::string& text) {
	std::string lower = text;
	std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
	if (lower == "summer")
		return Season::Summer;
	if (lower == "winter")
		return Season::Winter;
	throw InputError(fmt::format("unknown season '{}' (expected summer or winter)", text));
}

const RatingSet& select_ratings(const Line& line, Season season) {
	return season == Season::Summer ? line.summer : line.winter;
}

std::size_t ZoneModel::bus_index(const std::string& id) const {
	auto bus = find_bus(id);
	if (!bus)
		throw InputError(fmt::format("unknown bus '{}'", id));
	return *bus;
}

std::optional<std::size_t> ZoneModel::find_bus(const std::string& id) const {
	for (std::size_t i = 0; i < buses.size(); ++i)
		if (buses[i].id == id)
			return i;
	return std::nullopt;
}

std::optional<std::size_t> ZoneModel::find_line(const std::string& id) const {
	for (std::size_t i = 0; i < lines.size(); ++i)
		if (lines[i].id == id)
			return i;
	return std::nullopt;
}

std::optional<std::size_t> ZoneModel::find_contingency(const std::string& id) const {
	for (std::size_t i = 0; i < contingencies.size(); ++i)
		if (contingencies[i].id == id)
			return i;
	return std::nullopt;
}

std::vector<std::size_t> internal_islands(const ZoneModel& zone, std::optional<std::size_t> outaged_line) {
	const std::size_t n = zone.buses.size();
	std::vector<std::size_t> parent(n);
	std::iota(parent.begin(), parent.end(), 0);
	auto find = [&](std::size_t x) {
		while (parent[x] != x)
			x = parent[x] = parent[parent[x]];
		return x;
	};
	for (std::size_t l = 0; l < zone.lines.size(); ++l) {
		if (outaged_line && *outaged_line == l)
			continue;
		auto a = find(zone.lines[l].from_bus);
		auto b = find(zone.lines[l].to_bus);
		if (a != b)
			parent[std::max(a, b)] = std::min(a, b);
	}
	std::vector<std::size_t> label(n, n);
	std::vector<std::size_t> root_label(n, n);
	std::size_t next = 0;
	for (std::size_t i = 0; i < n; ++i) {
		auto root = find(i);
		if (root_label[root] == n)
			root_label[root] = next++;
		label[i] = root_label[root];
	}
	return label;
}

std::optional<std::size_t> outaged_internal_line(const ZoneModel& zone, std::optional<std::size_t> contingency) {
	if (!contingency)
		return std::nullopt;
	return zone.contingencies.at(*contingency).outaged_line;
}

void validate_zone(const ZoneModel& zone) {
	if (zone.buses.size() < 2 || zone.lines.empty())
		throw InputError("degenerate topology: a zone needs at least two buses and one internal line");
	if (zone.outbound_lines.empty())
		throw InputError("degenerate topology: a zone needs at least one outbound line");
	if (!(zone.base_mva > 0.0))
		throw InputError("base_mva must be > 0");
	if (!(zone.timestep_hours > 0.0))
		throw InputError("timestep_hours must be > 0");
	if (!(zone.curative_duration_hours > 0.0 && zone.curative_duration_hours <= zone.timestep_hours))
		throw InputError("curative_duration_hours must satisfy 0 < value <= timestep_hours");

	for (std::size_t i = 0; i < zone.buses.size(); ++i)
		for (std::size_t j = i + 1; j < zone.buses.size(); ++j)
			if (zone.buses[i].id == zone.buses[j].id)
				throw InputError(fmt::format("duplicate bus id '{}'", zone.buses[i].id));

	for (std::size_t l = 0; l < zone.lines.size(); ++l) {
		const Line& line = zone.lines[l];
		if (line.from_bus >= zone.buses.size() || line.to_bus >= zone.buses.size())
			throw InputError(fmt::format("line '{}': endpoint is not a zone bus", line.id));
		if (line.from_bus == line.to_bus)
			throw InputError(fmt::format("line '{}': from_bus and to_bus must differ", line.id));
		if (!(line.reactance_pu > 0.0) || !std::isfinite(line.reactance_pu))
			throw InputError(fmt::format("line '{}': reactance must be > 0 (x_ij > 0)", line.id));
		check_rating(line.summer, line.id, "summer");
		check_rating(line.winter, line.id, "winter");
		for (std::size_t m = l + 1; m < zone.lines.size(); ++m)
			if (zone.lines[m].id == line.id)
				throw InputError(fmt::format("duplicate line id '{}'", line.id));
	}

	auto base_islands = internal_islands(zone, std::nullopt);
	if (*std::max_element(base_islands.begin(), base_islands.end()) != 0) {
		for (std::size_t b = 0; b < zone.buses.size(); ++b)
			if (base_islands[b] != 0)
				throw InputError(fmt::format("disconnected topology: bus '{}' is not connected to bus '{}' by internal lines",
					zone.buses[b].id, zone.buses[0].id));
	}

	const Battery& battery = zone.battery;
	if (battery.bus >= zone.buses.size())
		throw InputError("battery: bus is not a zone bus");
	if (!(battery.pmin_mw <= 0.0 && 0.0 <= battery.pmax_mw))
		throw InputError("battery: limits must satisfy pmin_mw <= 0 <= pmax_mw");
	if (!(battery.capacity_mwh > 0.0))
		throw InputError("battery: capacity_mwh must be > 0");
	if (!(battery.soc_min_mwh >= 0.0 && battery.soc_min_mwh < battery.capacity_mwh))
		throw InputError("battery: soc_min_mwh must satisfy 0 <= soc_min < capacity");

	for (std::size_t c = 0; c < zone.contingencies.size(); ++c) {
		const Contingency& cont = zone.contingencies[c];
		for (std::size_t d = c + 1; d < zone.contingencies.size(); ++d)
			if (zone.contingencies[d].id == cont.id)
				throw InputError(fmt::format("duplicate contingency id '{}'", cont.id));
		if (cont.modifies_zone_topology) {
			if (!cont.outaged_line || *cont.outaged_line >= zone.lines.size())
				throw InputError(fmt::format("contingency '{}': outaged element '{}' is not an internal line", cont.id,
					cont.outaged_element));
		} else if (cont.outaged_line) {
			throw InputError(fmt::format("contingency '{}': external outage must not reference an internal line", cont.id));
		}
		auto islands = internal_islands(zone, cont.outaged_line);
		std::size_t count = *std::max_element(islands.begin(), islands.end()) + 1;
		for (std::size_t isl = 0; isl < count; ++isl) {
			bool has_outbound = std::any_of(zone.outbound_lines.begin(), zone.outbound_lines.end(),
				[&](const OutboundLine& o) { return islands[o.boundary_bus] == isl; });
			if (!has_outbound) {
				std::string members;
				for (std::size_t b = 0; b < zone.buses.size(); ++b)
					if (islands[b] == isl)
						members += (members.empty() ? "" : ",") + zone.buses[b].id;
				throw InputError(fmt::format("contingency '{}': buses {{{}}} are islanded from the grid", cont.id, members));
			}
		}
		// The battery bus must keep a path to the grid through a rated line.
		bool battery_linked =
			std::any_of(zone.outbound_lines.begin(), zone.outbound_lines.end(),
				[&](const OutboundLine& o) { return o.boundary_bus == battery.bus; }) ||
			std::any_of(zone.lines.begin(), zone.lines.end(), [&](const Line& line) {
				bool outaged = cont.outaged_line && &zone.lines[*cont.outaged_line] == &line;
				return !outaged && (line.from_bus == battery.bus || line.to_bus == battery.bus);
			});
		if (!battery_linked)
			throw InputError(fmt::format("contingency '{}': disconnects the battery bus from all rated lines", cont.id));
	}

	for (std::size_t o = 0; o < zone.outbound_lines.size(); ++o) {
		const OutboundLine& oline = zone.outbound_lines[o];
		if (oline.boundary_bus >= zone.buses.size())
			throw InputError(fmt::format("outbound line '{}': boundary bus is not a zone bus", oline.id));
		if (oline.ptdf_normal.size() != zone.buses.size())
			throw InputError(fmt::format("outbound line '{}': ptdf must list every bus", oline.id));
		if (oline.ptdf_contingency.size() != zone.contingencies.size())
			throw InputError(fmt::format("outbound line '{}': ptdf_contingency must list every contingency", oline.id));
		for (const auto& row : oline.ptdf_contingency)
			if (row.size() != zone.buses.size())
				throw InputError(fmt::format("outbound line '{}': contingency ptdf must list every bus", oline.id));
		for (std::size_t p = o + 1; p < zone.outbound_lines.size(); ++p)
			if (zone.outbound_lines[p].id == oline.id)
				throw InputError(fmt::format("duplicate outbound line id '{}'", oline.id));
	}
	check_ptdf_topology(zone, std::nullopt);
	for (std::size_t c = 0; c < zone.contingencies.size(); ++c)
		check_ptdf_topology(zone, c);
}

ZoneModel parse_zone(const json& doc) {
	if (!doc.is_object())
		throw InputError("zone file: top level must be an object");
	ZoneModel zone;
	zone.name = doc.value("name", std::string("zone"));
	zone.base_mva = doc.contains("base_mva") ? require_number(doc, "base_mva", "zone") : 100.0;
	zone.timestep_hours = require_number(doc, "timestep_hours", "zone");
	zone.curative_duration_hours =
		doc.contains("curative_duration_hours") ? require_number(doc, "curative_duration_hours", "zone") : 5.0 / 60.0;

	for (const auto& item : require_array(doc, "buses", "zone"))
		zone.buses.push_back(Bus{require_string(item, "id", "bus")});

	auto resolve_bus = [&](const std::string& id, const std::string& where) {
		auto bus = zone.find_bus(id);
		if (!bus)
			throw InputError(fmt::format("{}: unknown bus '{}'", where, id));
		return *bus;
	};

	for (const auto& item : require_array(doc, "lines", "zone")) {
		Line line;
		line.id = require_string(item, "id", "line");
		std::string where = fmt::format("line '{}'", line.id);
		line.from_bus = resolve_bus(require_string(item, "from", where), where);
		line.to_bus = resolve_bus(require_string(item, "to", where), where);
		line.reactance_pu = require_number(item, "reactance_pu", where);
		const json& ratings = require(item, "ratings", where);
		line.summer = parse_rating(require(ratings, "summer", where), where + " summer ratings");
		line.winter = parse_rating(require(ratings, "winter", where), where + " winter ratings");
		zone.lines.push_back(std::move(line));
	}

	for (const auto& item : require_array(doc, "contingencies", "zone")) {
		Contingency cont;
		cont.id = require_string(item, "id", "contingency");
		std::string where = fmt::format("contingency '{}'", cont.id);
		cont.outaged_element = require_string(item, "outaged_element", where);
		const json& flag = require(item, "modifies_zone_topology", where);
		if (!flag.is_boolean())
			throw InputError(where + ": field 'modifies_zone_topology' must be a boolean");
		cont.modifies_zone_topology = flag.get<bool>();
		auto line = zone.find_line(cont.outaged_element);
		if (cont.modifies_zone_topology && !line)
			throw InputError(fmt::format("{}: outaged element '{}' does not exist in the zone", where, cont.outaged_element));
		if (!cont.modifies_zone_topology && line)
			throw InputError(fmt::format("{}: internal line '{}' outage must set modifies_zone_topology", where,
				cont.outaged_element));
		if (cont.modifies_zone_topology)
			cont.outaged_line = line;
		zone.contingencies.push_back(std::move(cont));
	}

	for (const auto& item : require_array(doc, "outbound_lines", "zone")) {
		OutboundLine oline;
		oline.id = require_string(item, "id", "outbound line");
		std::string where = fmt::format("outbound line '{}'", oline.id);
		oline.boundary_bus = resolve_bus(require_string(item, "bus", where), where);
		oline.ptdf_normal = parse_bus_map(require(item, "ptdf", where), zone, where + " ptdf");
		const json& per_cont = require(item, "ptdf_contingency", where);
		if (!per_cont.is_object())
			throw InputError(where + ": 'ptdf_contingency' must be an object keyed by contingency id");
		for (auto it = per_cont.begin(); it != per_cont.end(); ++it)
			if (!zone.find_contingency(it.key()))
				throw InputError(fmt::format("{}: unknown contingency '{}' in ptdf_contingency", where, it.key()));
		for (const auto& cont : zone.contingencies) {
			if (!per_cont.contains(cont.id))
				throw InputError(fmt::format("{}: missing ptdf_contingency for '{}'", where, cont.id));
			oline.ptdf_contingency.push_back(
				parse_bus_map(per_cont.at(cont.id), zone, fmt::format("{} ptdf_contingency '{}'", where, cont.id)));
		}
		zone.outbound_lines.push_back(std::move(oline));
	}

	const json& battery = require(doc, "battery", "zone");
	zone.battery.bus = resolve_bus(require_string(battery, "bus", "battery"), "battery");
	zone.battery.pmin_mw = require_number(battery, "pmin_mw", "battery");
	zone.battery.pmax_mw = require_number(battery, "pmax_mw", "battery");
	zone.battery.capacity_mwh = require_number(battery, "capacity_mwh", "battery");
	zone.battery.soc_min_mwh = battery.contains("soc_min_mwh") ? require_number(battery, "soc_min_mwh", "battery") : 0.0;

	validate_zone(zone);
	return zone;
}

ZoneModel load_zone(const std::filesystem::path& path) {
	std::ifstream in(path);
	if (!in)
		throw InputError(fmt::format("cannot open zone file '{}'", path.string()));
	json doc;
	try {
		doc = json::parse(in);
	} catch (const json::parse_error& e) {
		throw InputError(fmt::format("zone file '{}': {}", path.string(), e.what()));
	}
	return parse_zone(doc);
}

json zone_to_json(const ZoneModel& zone) {
	json doc;
	doc["name"] = zone.name;
	doc["base_mva"] = zone.base_mva;
	doc["timestep_hours"] = zone.timestep_hours;
	doc["curative_duration_hours"] = zone.curative_duration_hours;
	doc["buses"] = json::array();
	for (const auto& bus : zone.buses)
		doc["buses"].push_back({{"id", bus.id}});
	doc["lines"] = json::array();
	for (const auto& line : zone.lines) {
		doc["lines"].push_back({{"id", line.id},
			{"from", zone.buses[line.from_bus].id},
			{"to", zone.buses[line.to_bus].id},
			{"reactance_pu", line.reactance_pu},
			{"ratings", {{"summer", rating_to_json(line.summer)}, {"winter", rating_to_json(line.winter)}}}});
	}
	doc["outbound_lines"] = json::array();
	for (const auto& oline : zone.outbound_lines) {
		json per_cont = json::object();
		for (std::size_t c = 0; c < zone.contingencies.size(); ++c)
			per_cont[zone.contingencies[c].id] = bus_map_to_json(oline.ptdf_contingency[c], zone);
		doc["outbound_lines"].push_back({{"id", oline.id},
			{"bus", zone.buses[oline.boundary_bus].id},
			{"ptdf", bus_map_to_json(oline.ptdf_normal, zone)},
			{"ptdf_contingency", per_cont}});
	}
	doc["contingencies"] = json::array();
	for (const auto& cont : zone.contingencies)
		doc["contingencies"].push_back({{"id", cont.id},
			{"outaged_element", cont.outaged_element},
			{"modifies_zone_topology", cont.modifies_zone_topology}});
	doc["battery"] = {{"bus", zone.buses[zone.battery.bus].id},
		{"pmin_mw", zone.battery.pmin_mw},
		{"pmax_mw", zone.battery.pmax_mw},
		{"capacity_mwh", zone.battery.capacity_mwh},
		{"soc_min_mwh", zone.battery.soc_min_mwh}};
	return doc;
}

void validate_forecast_row(const ZoneModel& zone, const ForecastRow& row, std::size_t index) {
	const std::string where = fmt::format("forecast row {} ({})", index, row.timestamp);
	if (row.injection_mw.size() != zone.buses.size() || row.curtailable_max_mw.size() != zone.buses.size())
		throw InputError(where + ": per-bus columns do not match the zone");
	if (row.reference_flow_normal.size() != zone.outbound_lines.size())
		throw InputError(where + ": reference flows do not match the outbound lines");
	if (row.reference_flow_contingency.size() != zone.contingencies.size())
		throw InputError(where + ": missing contingency reference flows");
	for (const auto& flows : row.reference_flow_contingency)
		if (flows.size() != zone.outbound_lines.size())
			throw InputError(where + ": missing contingency reference flows");
	for (std::size_t b = 0; b < zone.buses.size(); ++b)
		if (!(row.curtailable_max_mw[b] >= 0.0))
			throw InputError(fmt::format("{}: curt_max:{} must be >= 0", where, zone.buses[b].id));

	// Reference flows come from a whole-grid load flow and must carry each
	// island's net injection out of the zone.
	auto check_state = [&](std::optional<std::size_t> contingency, const std::vector<double>& flows) {
		auto islands = internal_islands(zone, outaged_internal_line(zone, contingency));
		std::size_t count = *std::max_element(islands.begin(), islands.end()) + 1;
		for (std::size_t isl = 0; isl < count; ++isl) {
			double injected = 0.0;
			double exported = 0.0;
			for (std::size_t b = 0; b < zone.buses.size(); ++b)
				if (islands[b] == isl)
					injected += row.injection_mw[b];
			for (std::size_t o = 0; o < zone.outbound_lines.size(); ++o)
				if (islands[zone.outbound_lines[o].boundary_bus] == isl)
					exported += flows[o];
			if (std::abs(injected - exported) > kBalanceTolerance * std::max(1.0, std::abs(injected)))
				throw InputError(fmt::format("{}: reference outbound flows ({:.6f} MW) do not balance net injection "
											 "({:.6f} MW) in {}",
					where, exported, injected,
					contingency ? fmt::format("contingency '{}'", zone.contingencies[*contingency].id) : "the normal state"));
		}
	};
	check_state(std::nullopt, row.reference_flow_normal);
	for (std::size_t c = 0; c < zone.contingencies.size(); ++c)
		check_state(c, row.reference_flow_contingency[c]);
}

Forecast parse_forecast(const ZoneModel& zone, std::istream& in) {
	std::string header_line;
	if (!std::getline(in, header_line))
		throw InputError("forecast: empty file");
	auto header = split_csv_line(header_line);

	constexpr std::size_t kMissing = static_cast<std::size_t>(-1);
	std::size_t col_timestamp = kMissing;
	std::size_t col_season = kMissing;
	std::vector<std::size_t> col_inj(zone.buses.size(), kMissing);
	std::vector<std::size_t> col_curt(zone.buses.size(), kMissing);
	std::vector<std::size_t> col_ref(zone.outbound_lines.size(), kMissing);
	std::vector<std::vector<std::size_t>> col_ref_cont(
		zone.contingencies.size(), std::vector<std::size_t>(zone.outbound_lines.size(), kMissing));

	auto find_oline = [&](const std::string& id) -> std::optional<std::size_t> {
		for (std::size_t o = 0; o < zone.outbound_lines.size(); ++o)
			if (zone.outbound_lines[o].id == id)
				return o;
		return std::nullopt;
	};
	auto assign = [&](std::size_t& slot, std::size_t column, const std::string& name) {
		if (slot != kMissing)
			throw InputError(fmt::format("forecast: duplicate column '{}'", name));
		slot = column;
	};

	for (std::size_t c = 0; c < header.size(); ++c) {
		const std::string& name = header[c];
		if (name == "timestamp") {
			assign(col_timestamp, c, name);
		} else if (name == "season") {
			assign(col_season, c, name);
		} else if (name.rfind("inj:", 0) == 0) {
			auto bus = zone.find_bus(name.substr(4));
			if (!bus)
				throw InputError(fmt::format("forecast: column '{}' names an unknown bus", name));
			assign(col_inj[*bus], c, name);
		} else if (name.rfind("curt_max:", 0) == 0) {
			auto bus = zone.find_bus(name.substr(9));
			if (!bus)
				throw InputError(fmt::format("forecast: column '{}' names an unknown bus", name));
			assign(col_curt[*bus], c, name);
		} else if (name.rfind("ref:", 0) == 0) {
			std::string rest = name.substr(4);
			auto at = rest.find('@');
			auto oline = find_oline(rest.substr(0, at));
			if (!oline)
				throw InputError(fmt::format("forecast: column '{}' names an unknown outbound line", name));
			if (at == std::string::npos) {
				assign(col_ref[*oline], c, name);
			} else {
				auto cont = zone.find_contingency(rest.substr(at + 1));
				if (!cont)
					throw InputError(fmt::format("forecast: column '{}' names an unknown contingency", name));
				assign(col_ref_cont[*cont][*oline], c, name);
			}
		} else {
			throw InputError(fmt::format("forecast: unrecognised column '{}'", name));
		}
	}
	if (col_timestamp == kMissing)
		throw InputError("forecast: missing column 'timestamp'");
	if (col_season == kMissing)
		throw InputError("forecast: missing column 'season'");
	for (std::size_t b = 0; b < zone.buses.size(); ++b) {
		if (col_inj[b] == kMissing)
			throw InputError(fmt::format("forecast: missing column 'inj:{}'", zone.buses[b].id));
		if (col_curt[b] == kMissing)
			throw InputError(fmt::format("forecast: missing column 'curt_max:{}'", zone.buses[b].id));
	}
	for (std::size_t o = 0; o < zone.outbound_lines.size(); ++o) {
		if (col_ref[o] == kMissing)
			throw InputError(fmt::format("forecast: missing column 'ref:{}'", zone.outbound_lines[o].id));
		for (std::size_t k = 0; k < zone.contingencies.size(); ++k)
			if (col_ref_cont[k][o] == kMissing)
				throw InputError(fmt::format("forecast: missing reference flow column 'ref:{}@{}'", zone.outbound_lines[o].id,
					zone.contingencies[k].id));
	}

	Forecast forecast;
	std::string line;
	std::size_t line_number = 1;
	while (std::getline(in, line)) {
		++line_number;
		if (line.find_first_not_of(" \t\r") == std::string::npos)
			continue;
		auto fields = split_csv_line(line);
		if (fields.size() != header.size())
			throw InputError(fmt::format("forecast line {}: expected {} fields, found {}", line_number, header.size(),
				fields.size()));
		auto number = [&](std::size_t column) {
			return parse_double(fields[column], fmt::format("forecast line {} column '{}'", line_number, header[column]));
		};
		ForecastRow row;
		row.timestamp = fields[col_timestamp];
		try {
			row.season = parse_season(fields[col_season]);
		} catch (const InputError& e) {
			throw InputError(fmt::format("forecast line {}: {}", line_number, e.what()));
		}
		for (std::size_t b = 0; b < zone.buses.size(); ++b) {
			row.injection_mw.push_back(number(col_inj[b]));
			row.curtailable_max_mw.push_back(number(col_curt[b]));
		}
		for (std::size_t o = 0; o < zone.outbound_lines.size(); ++o)
			row.reference_flow_normal.push_back(number(col_ref[o]));
		row.reference_flow_contingency.resize(zone.contingencies.size());
		for (std::size_t k = 0; k < zone.contingencies.size(); ++k)
			for (std::size_t o = 0; o < zone.outbound_lines.size(); ++o)
				row.reference_flow_contingency[k].push_back(number(col_ref_cont[k][o]));
		validate_forecast_row(zone, row, forecast.size());
		forecast.push_back(std::move(row));
	}
	return forecast;
}

Forecast load_forecast(const ZoneModel& zone, const std::filesystem::path& path) {
	std::ifstream in(path);
	if (!in)
		throw InputError(fmt::format("cannot open forecast file '{}'", path.string()));
	return parse_forecast(zone, in);
}

void write_forecast(const ZoneModel& zone, const Forecast& forecast, std::ostream& out) {
	out << "timestamp,season";
	for (const auto& bus : zone.buses)
		out << ",inj:" << bus.id;
	for (const auto& bus : zone.buses)
		out << ",curt_max:" << bus.id;
	for (const auto& oline : zone.outbound_lines)
		out << ",ref:" << oline.id;
	for (const auto& cont : zone.contingencies)
		for (const auto& oline : zone.outbound_lines)
			out << ",ref:" << oline.id << '@' << cont.id;
	out << '\n';
	for (const auto& row : forecast) {
		out << row.timestamp << ',' << to_string(row.season);
		for (double v : row.injection_mw)
			out << ',' << fmt::format("{}", v);
		for (double v : row.curtailable_max_mw)
			out << ',' << fmt::format("{}", v);
		for (double v : row.reference_flow_normal)
			out << ',' << fmt::format("{}", v);
		for (const auto& flows : row.reference_flow_contingency)
			for (double v : flows)
				out << ',' << fmt::format("{}", v);
		out << '\n';
	}
}

} // namespace bwe
