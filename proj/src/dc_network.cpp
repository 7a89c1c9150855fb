#include "bwe/dc_network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace bwe {

namespace {

// Nodal susceptance matrix in per-unit over the active lines.
Eigen::MatrixXd susceptance_matrix(const ZoneModel& zone, const TopologyState& topology) {
	const auto n = static_cast<Eigen::Index>(zone.buses.size());
	Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
	for (std::size_t l = 0; l < zone.lines.size(); ++l) {
		if (!topology.active_lines[l])
			continue;
		const Line& line = zone.lines[l];
		double y = 1.0 / line.reactance_pu;
		auto i = static_cast<Eigen::Index>(line.from_bus);
		auto j = static_cast<Eigen::Index>(line.to_bus);
		b(i, i) += y;
		b(j, j) += y;
		b(i, j) -= y;
		b(j, i) -= y;
	}
	return b;
}

std::string island_members(const ZoneModel& zone, const TopologyState& topology, std::size_t island) {
	std::string members;
	for (std::size_t b = 0; b < zone.buses.size(); ++b)
		if (topology.island_of_bus[b] == island)
			members += (members.empty() ? "" : ",") + zone.buses[b].id;
	return "{" + members + "}";
}

} // namespace

TopologyState make_topology(const ZoneModel& zone, std::vector<bool> active_lines, std::optional<std::size_t> contingency) {
	TopologyState state;
	state.active_lines = std::move(active_lines);
	state.contingency = contingency;
	const std::size_t n = zone.buses.size();
	std::vector<std::size_t> parent(n);
	std::iota(parent.begin(), parent.end(), 0);
	auto find = [&](std::size_t x) {
		while (parent[x] != x)
			x = parent[x] = parent[parent[x]];
		return x;
	};
	for (std::size_t l = 0; l < zone.lines.size(); ++l) {
		if (!state.active_lines[l])
			continue;
		auto a = find(zone.lines[l].from_bus);
		auto b = find(zone.lines[l].to_bus);
		if (a != b)
			parent[std::max(a, b)] = std::min(a, b);
	}
	state.island_of_bus.assign(n, 0);
	std::vector<std::size_t> label(n, n);
	state.island_count = 0;
	for (std::size_t b = 0; b < n; ++b) {
		auto root = find(b);
		if (label[root] == n) {
			label[root] = state.island_count++;
			state.island_reference.push_back(b);
		}
		state.island_of_bus[b] = label[root];
	}
	return state;
}

TopologyState base_topology(const ZoneModel& zone) {
	return make_topology(zone, std::vector<bool>(zone.lines.size(), true), std::nullopt);
}

TopologyState contingency_topology(const ZoneModel& zone, std::size_t contingency) {
	std::vector<bool> active(zone.lines.size(), true);
	if (auto line = zone.contingencies.at(contingency).outaged_line)
		active[*line] = false;
	return make_topology(zone, std::move(active), contingency);
}

std::vector<double> dc_flows(const ZoneModel& zone, const TopologyState& topology, const std::vector<double>& injections_mw,
	const std::vector<double>& boundary_flows_mw, double balance_tolerance_mw) {
	const std::size_t n = zone.buses.size();
	if (injections_mw.size() != n)
		throw InputError("dc_flows: injection vector does not match the zone buses");
	if (boundary_flows_mw.size() != zone.outbound_lines.size())
		throw InputError("dc_flows: boundary flow vector does not match the outbound lines");

	std::vector<double> net(injections_mw);
	for (std::size_t o = 0; o < zone.outbound_lines.size(); ++o)
		net[zone.outbound_lines[o].boundary_bus] -= boundary_flows_mw[o];

	std::vector<double> imbalance(topology.island_count, 0.0);
	for (std::size_t b = 0; b < n; ++b)
		imbalance[topology.island_of_bus[b]] += net[b];
	for (std::size_t isl = 0; isl < topology.island_count; ++isl)
		if (std::abs(imbalance[isl]) > balance_tolerance_mw)
			throw InputError(fmt::format("dc_flows: island {} is out of balance by {:.9f} MW",
				island_members(zone, topology, isl), imbalance[isl]));

	// Every island reference angle is grounded; the remaining system is
	// nonsingular as long as each island is internally connected.
	Eigen::MatrixXd b = susceptance_matrix(zone, topology);
	std::vector<Eigen::Index> keep;
	for (std::size_t bus = 0; bus < n; ++bus)
		if (topology.island_reference[topology.island_of_bus[bus]] != bus)
			keep.push_back(static_cast<Eigen::Index>(bus));
	Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
	if (!keep.empty()) {
		const auto k = static_cast<Eigen::Index>(keep.size());
		Eigen::MatrixXd reduced(k, k);
		Eigen::VectorXd rhs(k);
		for (Eigen::Index r = 0; r < k; ++r) {
			rhs(r) = net[static_cast<std::size_t>(keep[r])] / zone.base_mva;
			for (Eigen::Index c = 0; c < k; ++c)
				reduced(r, c) = b(keep[r], keep[c]);
		}
		Eigen::VectorXd solved = reduced.ldlt().solve(rhs);
		for (Eigen::Index r = 0; r < k; ++r)
			theta(keep[r]) = solved(r);
	}

	std::vector<double> flows(zone.lines.size(), 0.0);
	for (std::size_t l = 0; l < zone.lines.size(); ++l) {
		if (!topology.active_lines[l])
			continue;
		const Line& line = zone.lines[l];
		flows[l] = zone.base_mva *
			(theta(static_cast<Eigen::Index>(line.from_bus)) - theta(static_cast<Eigen::Index>(line.to_bus))) / line.reactance_pu;
	}
	return flows;
}

PtdfMatrix compute_ptdf(const ZoneModel& zone, const TopologyState& topology) {
	const std::size_t n = zone.buses.size();
	for (std::size_t isl = 0; isl < topology.island_count; ++isl) {
		bool has_outbound = false;
		for (const auto& oline : zone.outbound_lines)
			has_outbound = has_outbound || topology.island_of_bus[oline.boundary_bus] == isl;
		if (!has_outbound)
			throw InputError(
				fmt::format("compute_ptdf: singular network, island {} has no outbound line", island_members(zone, topology, isl)));
	}

	PtdfMatrix ptdf;
	ptdf.internal = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(zone.lines.size()), static_cast<Eigen::Index>(n));
	ptdf.outbound = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(zone.outbound_lines.size()), static_cast<Eigen::Index>(n));
	for (std::size_t k = 0; k < n; ++k) {
		std::vector<double> injection(n, 0.0);
		injection[k] = 1.0;
		std::vector<double> boundary(zone.outbound_lines.size(), 0.0);
		for (std::size_t o = 0; o < zone.outbound_lines.size(); ++o) {
			const OutboundLine& oline = zone.outbound_lines[o];
			boundary[o] = topology.contingency ? oline.ptdf_contingency[*topology.contingency][k] : oline.ptdf_normal[k];
			ptdf.outbound(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(k)) = boundary[o];
		}
		auto flows = dc_flows(zone, topology, injection, boundary, 1e-5);
		for (std::size_t l = 0; l < zone.lines.size(); ++l)
			ptdf.internal(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) = flows[l];
	}
	return ptdf;
}

FullNetwork::FullNetwork(std::vector<std::string> buses, std::vector<Branch> branches, std::size_t slack, double base_mva)
	: buses_(std::move(buses)), branches_(std::move(branches)), slack_(slack), base_mva_(base_mva) {
	if (slack_ >= buses_.size())
		throw InputError("full network: slack bus out of range");
	for (const auto& branch : branches_)
		if (branch.from >= buses_.size() || branch.to >= buses_.size() || branch.from == branch.to || !(branch.reactance_pu > 0.0))
			throw InputError(fmt::format("full network: invalid branch '{}'", branch.id));
}

std::size_t FullNetwork::bus_index(const std::string& id) const {
	for (std::size_t i = 0; i < buses_.size(); ++i)
		if (buses_[i] == id)
			return i;
	throw InputError(fmt::format("full network: unknown bus '{}'", id));
}

std::size_t FullNetwork::branch_index(const std::string& id) const {
	for (std::size_t i = 0; i < branches_.size(); ++i)
		if (branches_[i].id == id)
			return i;
	throw InputError(fmt::format("full network: unknown branch '{}'", id));
}

bool FullNetwork::is_connected(const std::vector<std::size_t>& outaged) const {
	std::vector<std::size_t> parent(buses_.size());
	std::iota(parent.begin(), parent.end(), 0);
	auto find = [&](std::size_t x) {
		while (parent[x] != x)
			x = parent[x] = parent[parent[x]];
		return x;
	};
	std::size_t components = buses_.size();
	for (std::size_t i = 0; i < branches_.size(); ++i) {
		if (std::find(outaged.begin(), outaged.end(), i) != outaged.end())
			continue;
		auto a = find(branches_[i].from);
		auto b = find(branches_[i].to);
		if (a != b) {
			parent[a] = b;
			--components;
		}
	}
	return components == 1;
}

std::vector<double> FullNetwork::flows(const std::vector<double>& injections_mw, const std::vector<std::size_t>& outaged) const {
	if (injections_mw.size() != buses_.size())
		throw InputError("full network: injection vector size mismatch");
	if (!is_connected(outaged))
		throw InputError("full network: outage islands the grid");
	const auto n = static_cast<Eigen::Index>(buses_.size());
	Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
	std::vector<bool> active(branches_.size(), true);
	for (auto i : outaged)
		active.at(i) = false;
	for (std::size_t i = 0; i < branches_.size(); ++i) {
		if (!active[i])
			continue;
		double y = 1.0 / branches_[i].reactance_pu;
		auto f = static_cast<Eigen::Index>(branches_[i].from);
		auto t = static_cast<Eigen::Index>(branches_[i].to);
		b(f, f) += y;
		b(t, t) += y;
		b(f, t) -= y;
		b(t, f) -= y;
	}
	Eigen::MatrixXd reduced(n - 1, n - 1);
	Eigen::VectorXd rhs(n - 1);
	std::vector<Eigen::Index> keep;
	for (Eigen::Index i = 0; i < n; ++i)
		if (static_cast<std::size_t>(i) != slack_)
			keep.push_back(i);
	for (Eigen::Index r = 0; r < n - 1; ++r) {
		rhs(r) = injections_mw[static_cast<std::size_t>(keep[r])] / base_mva_;
		for (Eigen::Index c = 0; c < n - 1; ++c)
			reduced(r, c) = b(keep[r], keep[c]);
	}
	Eigen::VectorXd solved = reduced.ldlt().solve(rhs);
	Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
	for (Eigen::Index r = 0; r < n - 1; ++r)
		theta(keep[r]) = solved(r);
	std::vector<double> out(branches_.size(), 0.0);
	for (std::size_t i = 0; i < branches_.size(); ++i)
		if (active[i])
			out[i] = base_mva_ *
				(theta(static_cast<Eigen::Index>(branches_[i].from)) - theta(static_cast<Eigen::Index>(branches_[i].to))) /
				branches_[i].reactance_pu;
	return out;
}

std::vector<double> FullNetwork::ptdf_column(std::size_t bus, const std::vector<std::size_t>& outaged) const {
	std::vector<double> injection(buses_.size(), 0.0);
	injection.at(bus) += 1.0;
	return flows(injection, outaged);
}

} // namespace bwe
