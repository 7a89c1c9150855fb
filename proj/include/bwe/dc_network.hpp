#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bwe/grid_model.hpp"

namespace bwe {

/// Active internal lines of one network state and the islands they form.
struct TopologyState {
	std::vector<bool> active_lines;
	std::optional<std::size_t> contingency;
	std::vector<std::size_t> island_of_bus;
	std::size_t island_count = 1;
	// Lowest-index bus of each island; its angle is fixed to zero.
	std::vector<std::size_t> island_reference;

	bool connected() const { return island_count == 1; }
	bool line_active(std::size_t line) const { return active_lines[line]; }
};

TopologyState base_topology(const ZoneModel& zone);
TopologyState contingency_topology(const ZoneModel& zone, std::size_t contingency);
TopologyState make_topology(const ZoneModel& zone, std::vector<bool> active_lines, std::optional<std::size_t> contingency);

/// Sensitivities of flows to a 1 MW injection at each zone bus, balanced at
/// the remote slack through the outbound lines.
struct PtdfMatrix {
	Eigen::MatrixXd internal; // line x bus; rows of inactive lines are zero
	Eigen::MatrixXd outbound; // outbound line x bus
	std::string slack_bus = "remote";
};

PtdfMatrix compute_ptdf(const ZoneModel& zone, const TopologyState& topology);

/// DC flows on the internal lines for given bus injections and outbound
/// flows (MW, positive leaving the zone). Inactive lines carry zero.
std::vector<double> dc_flows(const ZoneModel& zone, const TopologyState& topology, const std::vector<double>& injections_mw,
	const std::vector<double>& boundary_flows_mw, double balance_tolerance_mw = 1e-6);

/// Whole-grid DC model with a slack bus. Used to derive outbound PTDFs and
/// reference flows for synthetic zones.
class FullNetwork {
public:
	struct Branch {
		std::string id;
		std::size_t from = 0;
		std::size_t to = 0;
		double reactance_pu = 0.0;
	};

	FullNetwork(std::vector<std::string> buses, std::vector<Branch> branches, std::size_t slack, double base_mva = 100.0);

	const std::vector<std::string>& buses() const { return buses_; }
	const std::vector<Branch>& branches() const { return branches_; }
	std::size_t bus_index(const std::string& id) const;
	std::size_t branch_index(const std::string& id) const;

	/// Branch flows for bus injections (slack absorbs the imbalance), with
	/// the listed branches out of service.
	std::vector<double> flows(const std::vector<double>& injections_mw, const std::vector<std::size_t>& outaged = {}) const;

	/// Flow change on each branch per 1 MW injected at `bus` and withdrawn at the slack.
	std::vector<double> ptdf_column(std::size_t bus, const std::vector<std::size_t>& outaged = {}) const;

	bool is_connected(const std::vector<std::size_t>& outaged = {}) const;

private:
	std::vector<std::string> buses_;
	std::vector<Branch> branches_;
	std::size_t slack_;
	double base_mva_;
};

} // namespace bwe
