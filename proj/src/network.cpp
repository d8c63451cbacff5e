#include "mmdc/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace mmdc {

std::vector<NodeDescriptor> build_topology(const TopologySpec& spec)
{
    if (!(spec.inter_bs_distance > 0.0))
        throw std::invalid_argument("inter-BS distance must be positive");
    if (!(spec.width > 0.0) || !(spec.height > 0.0))
        throw std::invalid_argument("area bounds must be positive");

    std::vector<NodeDescriptor> nodes;
    if (!spec.explicit_sn_positions.empty()) {
        int id = 0;
        for (const auto& p : spec.explicit_sn_positions) {
            nodes.push_back({id, NodeRole::Sn, p, id % 2});
            ++id;
        }
    } else {
        const double d = spec.inter_bs_distance;
        const double mid = spec.width / 2.0;
        constexpr double eps = 1e-9;
        std::vector<double> columns;
        for (int k = static_cast<int>(std::floor(-mid / d - 0.5)); ; ++k) {
            const double x = mid + (k + 0.5) * d;
            if (x > spec.width + eps)
                break;
            if (x >= -eps)
                columns.push_back(x);
        }
        const int rows = static_cast<int>(std::floor(spec.height / d + eps)) + 1;
        int id = 0;
        for (int r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < columns.size(); ++c) {
                const int channel = static_cast<int>((c + static_cast<std::size_t>(r)) % 2);
                nodes.push_back({id++, NodeRole::Sn, {columns[c], r * d}, channel});
            }
        }
    }
    const int mn_id = static_cast<int>(nodes.size());
    nodes.push_back({mn_id, NodeRole::Mn, {spec.width / 2.0, spec.height / 2.0}, -1});
    return nodes;
}

std::vector<Transmitter> secondary_transmitters(std::span<const NodeDescriptor> nodes)
{
    std::vector<Transmitter> out;
    for (const auto& n : nodes)
        if (n.role == NodeRole::Sn)
            out.push_back({n.position, n.channel});
    return out;
}

const NodeDescriptor& master_node(std::span<const NodeDescriptor> nodes)
{
    auto it = std::find_if(nodes.begin(), nodes.end(), [](const auto& n) { return n.role == NodeRole::Mn; });
    if (it == nodes.end())
        throw std::invalid_argument("topology has no master node");
    return *it;
}

void write_topology_csv(std::ostream& out, std::span<const NodeDescriptor> nodes)
{
    out << "id,role,x,y,channel\n";
    for (const auto& n : nodes)
        out << fmt::format("{},{},{:.3f},{:.3f},{}\n", n.id, n.role == NodeRole::Mn ? "MN" : "SN", n.position.x,
                           n.position.y, n.channel);
}

StreetPath::StreetPath(std::vector<Point> waypoints) : points_(std::move(waypoints))
{
    if (points_.size() < 2)
        throw std::invalid_argument("a street needs at least two waypoints");
    cumulative_.push_back(0.0);
    for (std::size_t i = 1; i < points_.size(); ++i) {
        total_ += distance(points_[i - 1], points_[i]);
        cumulative_.push_back(total_);
    }
    if (!(total_ > 0.0))
        throw std::invalid_argument("street has zero length");
}

Point StreetPath::at(double offset) const
{
    offset = std::clamp(offset, 0.0, total_);
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), offset);
    std::size_t seg = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), points_.size() - 1);
    seg = std::max<std::size_t>(seg, 1);
    const double len = cumulative_[seg] - cumulative_[seg - 1];
    const double f = len > 0.0 ? (offset - cumulative_[seg - 1]) / len : 0.0;
    const Point a = points_[seg - 1];
    const Point b = points_[seg];
    return {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)};
}

Point StreetPath::heading(double offset, int direction) const
{
    offset = std::clamp(offset, 0.0, total_);
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), offset);
    std::size_t seg = static_cast<std::size_t>(it - cumulative_.begin());
    // At a vertex, use the segment we are about to enter.
    if (direction < 0 && seg > 0 && offset == cumulative_[seg - 1])
        seg -= 1;
    seg = std::clamp<std::size_t>(seg, 1, points_.size() - 1);
    const Point a = points_[seg - 1];
    const Point b = points_[seg];
    const double len = distance(a, b);
    const double sx = (b.x - a.x) / len * direction;
    const double sy = (b.y - a.y) / len * direction;
    return {sx, sy};
}

StreetPath default_street(double width, double height)
{
    return StreetPath({{width / 2.0, 0.0}, {width / 2.0, height}});
}

UeState start_on_path(const StreetPath& path, double speed, double offset, int direction)
{
    UeState ue;
    ue.path_offset = std::clamp(offset, 0.0, path.length());
    ue.direction = direction >= 0 ? 1 : -1;
    ue.position = path.at(ue.path_offset);
    const Point h = path.heading(ue.path_offset, ue.direction);
    ue.velocity = {h.x * speed, h.y * speed};
    return ue;
}

UeState step_mobility(const UeState& ue, double dt, const StreetPath& path, double speed)
{
    const double length = path.length();
    double s = ue.path_offset + ue.direction * speed * dt;
    int dir = ue.direction;
    while (s > length || s < 0.0) {
        if (s > length) {
            s = 2.0 * length - s;
            dir = -1;
        } else {
            s = -s;
            dir = 1;
        }
    }
    UeState next;
    next.path_offset = s;
    next.direction = dir;
    next.position = path.at(s);
    const Point h = path.heading(s, dir);
    next.velocity = {h.x * speed, h.y * speed};
    return next;
}

std::pair<int, std::optional<int>> initial_attachment(std::span<const Transmitter> sns, Point ue,
                                                      std::span<const double> sinr_db)
{
    if (sns.empty())
        throw std::invalid_argument("no secondary nodes to attach to");
    auto nearest = [&](auto&& accept) {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < sns.size(); ++i) {
            if (!accept(sns[i]))
                continue;
            const double d = distance(sns[i].position, ue);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(i);
            }
        }
        return best;
    };
    const int first = nearest([](const Transmitter&) { return true; });
    const int first_channel = sns[static_cast<std::size_t>(first)].channel;
    const int second = nearest([&](const Transmitter& t) { return t.channel != first_channel; });
    if (second < 0)
        return {first, std::nullopt};
    if (sinr_db[static_cast<std::size_t>(second)] > sinr_db[static_cast<std::size_t>(first)])
        return {second, first};
    return {first, second};
}

} // namespace mmdc
