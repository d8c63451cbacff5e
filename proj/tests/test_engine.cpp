#include <gtest/gtest.h>

#include <sstream>
#include <vector>

#include "mmdc/engine.hpp"

using namespace mmdc;

TEST(Scheduler, FiresAtScheduledTime)
{
    Scheduler s;
    s.schedule(0.2, EventKind::TrafficGen, [] {});
    s.run_until(0.2);
    ASSERT_DOUBLE_EQ(s.now(), 0.2);

    double fired_at = -1.0;
    s.schedule(0.5, EventKind::TrafficGen, [&] { fired_at = s.now(); });
    s.run_until(1.0);
    EXPECT_DOUBLE_EQ(fired_at, 0.5);
}

TEST(Scheduler, RejectsPastTime)
{
    Scheduler s;
    s.run_until(0.2);
    EXPECT_THROW(s.schedule(0.1, EventKind::TrafficGen, [] {}), ScheduleError);
    EXPECT_NO_THROW(s.schedule(0.2, EventKind::TrafficGen, [] {}));
}

TEST(Scheduler, SimultaneousEventsRunFifo)
{
    Scheduler s;
    std::vector<std::uint64_t> order;
    EventHandle a;
    EventHandle b;
    a = s.schedule(1.0, EventKind::SrsReport, [&] { order.push_back(a.seq()); });
    b = s.schedule(1.0, EventKind::SrsReport, [&] { order.push_back(b.seq()); });
    ASSERT_LT(a.seq(), b.seq());
    s.run_until(2.0);
    EXPECT_EQ(order, (std::vector<std::uint64_t>{a.seq(), b.seq()}));
}

TEST(Scheduler, CancelSemantics)
{
    Scheduler s;
    bool fired = false;
    auto h = s.schedule(0.02, EventKind::TttExpiry, [&] { fired = true; });
    EXPECT_TRUE(s.is_pending(h));
    EXPECT_TRUE(s.cancel(h));
    EXPECT_FALSE(s.cancel(h));
    s.run_until(1.0);
    EXPECT_FALSE(fired);

    auto g = s.schedule(1.5, EventKind::TttExpiry, [] {});
    s.run_until(2.0);
    EXPECT_FALSE(s.cancel(g));
    EXPECT_FALSE(s.cancel(EventHandle{}));
}

TEST(Scheduler, RunUntilStopsAtHorizon)
{
    Scheduler s;
    EXPECT_EQ(s.run_until(60.0), 0u);
    EXPECT_DOUBLE_EQ(s.now(), 60.0);

    Scheduler t;
    int count = 0;
    t.schedule(1.0, EventKind::SrsReport, [&] { ++count; });
    t.schedule(2.0, EventKind::SrsReport, [&] { ++count; });
    EXPECT_EQ(t.run_until(1.5), 1u);
    EXPECT_EQ(count, 1);
    EXPECT_DOUBLE_EQ(t.now(), 1.5);
}

TEST(Scheduler, OrderIsTotalUnderRandomLoad)
{
    Scheduler s;
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> slot(0, 49);
    struct Fired {
        double t;
        std::uint64_t seq;
    };
    std::vector<Fired> fired;
    for (int i = 0; i < 2000; ++i) {
        const double t = slot(rng) * 0.01;
        auto h = std::make_shared<EventHandle>();
        *h = s.schedule(t, EventKind::LinkService, [&, h] { fired.push_back({s.now(), h->seq()}); });
    }
    s.run_until(1.0);
    ASSERT_EQ(fired.size(), 2000u);
    for (std::size_t i = 1; i < fired.size(); ++i) {
        ASSERT_LE(fired[i - 1].t, fired[i].t);
        if (fired[i - 1].t == fired[i].t)
            ASSERT_LT(fired[i - 1].seq, fired[i].seq);
    }
}

TEST(Scheduler, NothingRunsAfterStop)
{
    Scheduler s;
    bool late = false;
    s.schedule(1.0, EventKind::RunEnd, [&] { s.stop(); });
    s.schedule(1.0, EventKind::SrsReport, [&] { late = true; });
    s.run_until(5.0);
    EXPECT_FALSE(late);
}

TEST(Scheduler, PreDispatchSeesAdvancedClock)
{
    Scheduler s;
    std::vector<double> seen;
    s.set_pre_dispatch([&](const SimEvent& ev) {
        EXPECT_DOUBLE_EQ(s.now(), ev.fire_time);
        seen.push_back(ev.fire_time);
    });
    s.schedule(0.3, EventKind::SrsReport, [] {});
    auto h = s.schedule(0.4, EventKind::SrsReport, [] {});
    s.cancel(h);
    s.run_until(1.0);
    EXPECT_EQ(seen, std::vector<double>{0.3});
}

TEST(TraceSink, HeaderAndRecords)
{
    std::ostringstream out;
    TraceSink sink(out);
    Scheduler s;
    s.set_trace(&sink);
    s.schedule(0.25, EventKind::X2Delivery, [] {}, [] { return std::string("dest=2"); });
    s.run_until(1.0);
    EXPECT_EQ(out.str(), "# mmdc-trace v1\n0.250000000\tX2_DELIVERY\tdest=2\n");
}

TEST(RngStreams, SameSeedSameDraws)
{
    RngStreams a(42);
    RngStreams b(42);
    for (int i = 0; i < 100; ++i)
        ASSERT_EQ(a.get(Stream::Blockage)(), b.get(Stream::Blockage)());
}

TEST(RngStreams, StreamsAreIndependentOfEachOther)
{
    RngStreams a(42);
    RngStreams b(42);
    // Heavy use of one stream must not shift another.
    for (int i = 0; i < 1000; ++i)
        b.get(Stream::Traffic)();
    for (int i = 0; i < 100; ++i)
        ASSERT_EQ(a.get(Stream::Blockage)(), b.get(Stream::Blockage)());
    EXPECT_NE(RngStreams(42).get(Stream::Blockage)(), RngStreams(42).get(Stream::Shadowing)());
    EXPECT_NE(RngStreams(42).get(Stream::Blockage)(), RngStreams(43).get(Stream::Blockage)());
}

TEST(RngStreams, DerivedEnginesDifferByIndex)
{
    const RngStreams r(9);
    auto e0 = r.derive(Stream::Shadowing, 0);
    auto e0_again = r.derive(Stream::Shadowing, 0);
    auto e1 = r.derive(Stream::Shadowing, 1);
    const auto x = e0();
    EXPECT_EQ(x, e0_again());
    EXPECT_NE(x, e1());
}
