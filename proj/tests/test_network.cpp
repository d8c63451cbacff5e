#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "mmdc/network.hpp"

using namespace mmdc;

TEST(Topology, DefaultGrid)
{
    const auto nodes = build_topology(TopologySpec{});
    ASSERT_EQ(nodes.size(), 7u);
    const auto& mn = master_node(nodes);
    EXPECT_EQ(mn.id, 6);
    EXPECT_EQ(mn.position, (Point{50.0, 50.0}));

    const auto sns = secondary_transmitters(nodes);
    ASSERT_EQ(sns.size(), 6u);
    double min_d = 1e9;
    for (std::size_t i = 0; i < sns.size(); ++i)
        for (std::size_t j = i + 1; j < sns.size(); ++j)
            min_d = std::min(min_d, distance(sns[i].position, sns[j].position));
    EXPECT_DOUBLE_EQ(min_d, 50.0);

    std::set<std::pair<double, double>> pos;
    for (const auto& s : sns)
        pos.insert({s.position.x, s.position.y});
    const std::set<std::pair<double, double>> want{{25, 0}, {75, 0}, {25, 50}, {75, 50}, {25, 100}, {75, 100}};
    EXPECT_EQ(pos, want);
}

TEST(Topology, NeighboursAlternateCarrier)
{
    const auto sns = secondary_transmitters(build_topology(TopologySpec{}));
    for (std::size_t i = 0; i < sns.size(); ++i)
        for (std::size_t j = i + 1; j < sns.size(); ++j)
            if (std::abs(distance(sns[i].position, sns[j].position) - 50.0) < 1e-9)
                EXPECT_NE(sns[i].channel, sns[j].channel);

    // The two nearest SNs to any street point sit on different carriers.
    for (double y = 0.0; y <= 100.0; y += 0.5) {
        const Point ue{50.0, y};
        const std::vector<double> sinr(sns.size(), 0.0);
        const auto [serving, idle] = initial_attachment(sns, ue, sinr);
        ASSERT_TRUE(idle.has_value());
        EXPECT_NE(sns[static_cast<std::size_t>(serving)].channel, sns[static_cast<std::size_t>(*idle)].channel);
    }
}

TEST(Topology, WideSpacing)
{
    TopologySpec spec;
    spec.inter_bs_distance = 100.0;
    EXPECT_EQ(secondary_transmitters(build_topology(spec)).size(), 4u);
}

TEST(Topology, ExplicitPositions)
{
    TopologySpec spec;
    spec.explicit_sn_positions = {{10, 10}, {20, 20}, {30, 30}};
    const auto nodes = build_topology(spec);
    ASSERT_EQ(nodes.size(), 4u);
    EXPECT_EQ(nodes[0].channel, 0);
    EXPECT_EQ(nodes[1].channel, 1);
    EXPECT_EQ(nodes[2].channel, 0);
    EXPECT_EQ(nodes[2].position, (Point{30, 30}));
}

TEST(Topology, RejectsBadSpacing)
{
    TopologySpec spec;
    spec.inter_bs_distance = 0.0;
    EXPECT_THROW(build_topology(spec), std::invalid_argument);
}

TEST(Topology, CsvDump)
{
    TopologySpec spec;
    spec.explicit_sn_positions = {{10, 10}, {20, 20}};
    std::ostringstream out;
    write_topology_csv(out, build_topology(spec));
    EXPECT_EQ(out.str(), "id,role,x,y,channel\n"
                         "0,SN,10.000,10.000,0\n"
                         "1,SN,20.000,20.000,1\n"
                         "2,MN,50.000,50.000,-1\n");
}

TEST(Mobility, LinearMotion)
{
    const auto street = default_street(100, 100);
    auto ue = start_on_path(street, 10.0, 10.0);
    ue = step_mobility(ue, 1.0, street, 10.0);
    EXPECT_NEAR(ue.position.x, 50.0, 1e-12);
    EXPECT_NEAR(ue.position.y, 20.0, 1e-12);
    EXPECT_NEAR(ue.velocity.y, 10.0, 1e-12);
}

TEST(Mobility, BouncesAtEnd)
{
    const auto street = default_street(100, 100);
    auto ue = start_on_path(street, 10.0, 99.5);
    ue = step_mobility(ue, 0.1, street, 10.0);
    EXPECT_NEAR(ue.position.y, 99.5, 1e-12);
    EXPECT_EQ(ue.direction, -1);
    EXPECT_NEAR(ue.velocity.y, -10.0, 1e-12);
    EXPECT_NEAR(std::hypot(ue.velocity.x, ue.velocity.y), 10.0, 1e-12);
}

TEST(Mobility, SixTraversalsInSixtySeconds)
{
    const auto street = default_street(100, 100);
    auto ue = start_on_path(street, 10.0);
    int reversals = 0;
    const int steps = 60000;
    for (int i = 0; i < steps; ++i) {
        const int dir = ue.direction;
        ue = step_mobility(ue, 0.001, street, 10.0);
        ASSERT_GE(ue.position.y, 0.0);
        ASSERT_LE(ue.position.y, 100.0);
        ASSERT_NEAR(std::hypot(ue.velocity.x, ue.velocity.y), 10.0, 1e-9);
        // Rounding may put the last step a hair past the start, turning the UE there.
        if (ue.direction != dir && i + 1 < steps)
            ++reversals;
    }
    // Six legs: five turns inside the run, back at the start when it ends.
    EXPECT_EQ(reversals, 5);
    EXPECT_NEAR(ue.path_offset, 0.0, 1e-6);
}

TEST(Mobility, PolylineStreet)
{
    const StreetPath path({{0, 0}, {10, 0}, {10, 10}});
    EXPECT_DOUBLE_EQ(path.length(), 20.0);
    EXPECT_EQ(path.at(15.0), (Point{10, 5}));
    auto ue = start_on_path(path, 1.0, 9.0);
    ue = step_mobility(ue, 2.0, path, 1.0);
    EXPECT_NEAR(ue.position.x, 10.0, 1e-12);
    EXPECT_NEAR(ue.position.y, 1.0, 1e-12);
    EXPECT_NEAR(ue.velocity.y, 1.0, 1e-12);
}

TEST(Attachment, HigherSinrServes)
{
    const auto sns = secondary_transmitters(build_topology(TopologySpec{}));
    const Point ue{50.0, 0.0};
    std::vector<double> sinr(sns.size(), 0.0);
    const auto [s0, i0] = initial_attachment(sns, ue, sinr);
    ASSERT_TRUE(i0);
    sinr[static_cast<std::size_t>(*i0)] = 30.0;
    const auto [s1, i1] = initial_attachment(sns, ue, sinr);
    EXPECT_EQ(s1, *i0);
    EXPECT_EQ(*i1, s0);
}
