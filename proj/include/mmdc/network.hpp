#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mmdc/channel.hpp"
#include "mmdc/geometry.hpp"

namespace mmdc {

enum class NodeRole { Mn, Sn };

struct NodeDescriptor {
    int id = 0;
    NodeRole role = NodeRole::Sn;
    Point position;
    int channel = 0; // SN only; -1 for the MN
};

struct TopologySpec {
    double width = 100.0;
    double height = 100.0;
    double inter_bs_distance = 50.0;
    // Overrides the grid when non-empty; channels alternate by list order.
    std::vector<Point> explicit_sn_positions;
};

/// SNs get ids 0..n-1 and the MN is the last node. Default layout: SN columns
/// straddle the vertical mid-line at +-d/2 and repeat every d, rows every d from
/// y = 0; carriers alternate in a checkerboard.
std::vector<NodeDescriptor> build_topology(const TopologySpec& spec);

std::vector<Transmitter> secondary_transmitters(std::span<const NodeDescriptor> nodes);
const NodeDescriptor& master_node(std::span<const NodeDescriptor> nodes);

void write_topology_csv(std::ostream& out, std::span<const NodeDescriptor> nodes);

/// UE kinematics along a polyline street, bouncing at both ends.
struct UeState {
    Point position;
    Point velocity;
    double path_offset = 0.0; // arc length from the first waypoint
    int direction = 1;        // +1 towards the last waypoint
};

class StreetPath {
  public:
    explicit StreetPath(std::vector<Point> waypoints);

    [[nodiscard]] double length() const { return total_; }
    [[nodiscard]] Point at(double offset) const;
    /// Unit tangent of the segment containing offset, in the direction of travel.
    [[nodiscard]] Point heading(double offset, int direction) const;
    [[nodiscard]] const std::vector<Point>& waypoints() const { return points_; }

  private:
    std::vector<Point> points_;
    std::vector<double> cumulative_;
    double total_ = 0.0;
};

/// Default street: the vertical mid-line of the area, bottom to top.
StreetPath default_street(double width, double height);

UeState start_on_path(const StreetPath& path, double speed, double offset = 0.0, int direction = 1);

/// Advances by speed * dt along the path, reflecting at the ends.
UeState step_mobility(const UeState& ue, double dt, const StreetPath& path, double speed);

/// The nearest SN and the nearest SN on a different carrier; the one with the
/// higher SINR serves. Returns {serving, idle}.
std::pair<int, std::optional<int>> initial_attachment(std::span<const Transmitter> sns, Point ue,
                                                      std::span<const double> sinr_db);

} // namespace mmdc
