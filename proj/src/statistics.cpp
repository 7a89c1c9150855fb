#include "bwe/statistics.hpp"

#include <fmt/format.h>

namespace bwe {

namespace {

void count(SeasonAvailability& s, const PowerBandwidthResult& r) {
	++s.timesteps;
	switch (r.congestion) {
	case CongestionClass::Strong:
		++s.strong;
		break;
	case CongestionClass::Reduced:
		++s.reduced;
		break;
	case CongestionClass::Infeasible:
		++s.infeasible;
		break;
	case CongestionClass::FullyAvailable:
		++s.fully_available;
		break;
	}
}

void finish(SeasonAvailability& s) {
	if (s.timesteps == 0)
		return;
	const double n = static_cast<double>(s.timesteps);
	s.fraction_strong_congestion = static_cast<double>(s.strong) / n;
	s.fraction_congestion = static_cast<double>(s.congestion()) / n;
	s.fraction_fully_available = 1.0 - s.fraction_congestion;
}

nlohmann::json season_json(const SeasonAvailability& s) {
	return {{"timesteps", s.timesteps},
		{"strong", s.strong},
		{"reduced", s.reduced},
		{"infeasible", s.infeasible},
		{"fully_available", s.fully_available},
		{"fraction_strong_congestion", s.fraction_strong_congestion},
		{"fraction_congestion", s.fraction_congestion},
		{"fraction_fully_available", s.fraction_fully_available}};
}

} // namespace

AvailabilityReport summarize(const std::vector<PowerBandwidthResult>& results) {
	AvailabilityReport report;
	for (const auto& r : results) {
		count(report.seasons[to_string(r.season)], r);
		count(report.overall, r);
		if (r.congestion != CongestionClass::FullyAvailable && !r.binding_constraint.empty())
			++report.binding_histogram[r.binding_constraint];
	}
	for (auto& [name, s] : report.seasons)
		finish(s);
	finish(report.overall);
	return report;
}

nlohmann::json report_to_json(const AvailabilityReport& report) {
	nlohmann::json doc;
	doc["overall"] = season_json(report.overall);
	doc["seasons"] = nlohmann::json::object();
	for (const auto& [name, s] : report.seasons)
		doc["seasons"][name] = season_json(s);
	doc["binding_constraints"] = nlohmann::json::object();
	for (const auto& [label, n] : report.binding_histogram)
		doc["binding_constraints"][label] = n;
	return doc;
}

std::string report_to_text(const AvailabilityReport& report) {
	std::string out = fmt::format("{:<10} {:>9} {:>18} {:>12} {:>16}\n", "season", "timesteps", "strong congestion",
		"congestion", "fully available");
	auto line = [&](const std::string& name, const SeasonAvailability& s) {
		out += fmt::format("{:<10} {:>9} {:>17.2f}% {:>11.2f}% {:>15.2f}%\n", name, s.timesteps,
			100.0 * s.fraction_strong_congestion, 100.0 * s.fraction_congestion, 100.0 * s.fraction_fully_available);
	};
	for (const auto& [name, s] : report.seasons)
		line(name, s);
	line("all", report.overall);
	if (!report.binding_histogram.empty()) {
		out += "\nbinding constraints\n";
		for (const auto& [label, n] : report.binding_histogram)
			out += fmt::format("  {:<48} {}\n", label, n);
	}
	return out;
}

std::string binding_histogram_csv(const AvailabilityReport& report) {
	std::string out = "binding_constraint,timesteps\n";
	for (const auto& [label, n] : report.binding_histogram)
		out += fmt::format("{},{}\n", label, n);
	return out;
}

} // namespace bwe
