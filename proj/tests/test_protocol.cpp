#include <gtest/gtest.h>

#include <functional>
#include <vector>

#include "mmdc/protocol.hpp"

using namespace mmdc;

namespace {

LinkReport report(int id, double sinr, double outage = -5.0)
{
    return {id, sinr, classify(sinr, true, outage), 0.0};
}

DcControllerState dc_state(double hysteresis = 0.0)
{
    DcControllerState s;
    s.serving_sn = 0;
    s.idle_sn = 1;
    s.sinr_th_db = 20.0;
    s.hysteresis_db = hysteresis;
    s.forward_on_switch = true;
    return s;
}

TargetSet targets(double serving_target, double idle_target)
{
    return {Candidate{2, serving_target}, Candidate{3, idle_target}};
}

// The decision rule written out case by case, independently of dc_decide.
ControlAction oracle(double s, double i, double st, double it, bool ttt, double hysteresis)
{
    const double th = 20.0;
    enum Region { BothLow, ServingLow, BothHigh, IdleLow };
    Region region = IdleLow;
    if (s <= th && i <= th)
        region = BothLow;
    else if (s <= th && i > th)
        region = ServingLow;
    else if (s > th && i > th)
        region = BothHigh;

    switch (region) {
    case BothLow:
        if (!ttt)
            return NoAction{};
        if (st <= it)
            return StartHandover{Leg::Idle, 3, true, true};
        return StartHandover{Leg::Serving, 2, true, true};
    case ServingLow:
        return SwitchPath{1, true};
    case BothHigh:
        if (i > s + hysteresis)
            return SwitchPath{1, true};
        return NoAction{};
    case IdleLow:
        return NoAction{};
    }
    return NoAction{};
}

struct Recorder : ControllerObserver {
    std::vector<ActionRecord> records;
    std::vector<Transition> transitions;
    void on_record(const ActionRecord& r) override { records.push_back(r); }
    void on_transition(const Transition& t) override { transitions.push_back(t); }

    [[nodiscard]] std::vector<ActionRecord> of(RecordKind kind) const
    {
        std::vector<ActionRecord> out;
        for (const auto& r : records)
            if (r.kind == kind)
                out.push_back(r);
        return out;
    }
};

// SNs 0 and 2 on carrier 0, SNs 1 and 3 on carrier 1; node 4 is the MN.
std::vector<Transmitter> four_sns()
{
    return {{{0, 0}, 0}, {{0, 50}, 1}, {{50, 0}, 0}, {{50, 50}, 1}};
}

ChannelSnapshot snapshot(double t, std::vector<double> sinr)
{
    ChannelSnapshot snap;
    snap.time = t;
    for (std::size_t k = 0; k < sinr.size(); ++k) {
        auto r = report(static_cast<int>(k), sinr[k]);
        r.report_time = t;
        snap.sn.push_back(r);
    }
    return snap;
}

ControllerParams params(double ttt)
{
    ControllerParams p;
    p.ttt = ttt;
    p.mn_id = 4;
    return p;
}

// Feeds one snapshot every 5 ms from the generator until t_end.
void drive(Scheduler& sched, MobilityController& ctl, double t_end,
           const std::function<std::vector<double>(double)>& sinr_at)
{
    for (int k = 0; k * 0.005 <= t_end + 1e-12; ++k) {
        const double t = k * 0.005;
        sched.schedule(t, EventKind::SrsReport, [&ctl, t, sinr_at] { ctl.on_report(snapshot(t, sinr_at(t))); });
    }
    sched.run_until(t_end);
}

} // namespace

TEST(DcDecide, PathSwitchWhenBothAbove)
{
    EXPECT_EQ(dc_decide(dc_state(), report(0, 25), report(1, 30), targets(10, 10)), ControlAction(SwitchPath{1, true}));
    EXPECT_EQ(dc_decide(dc_state(), report(0, 30), report(1, 25), targets(10, 10)), ControlAction(NoAction{}));
}

TEST(DcDecide, ForwardingSwitchWhenServingLow)
{
    EXPECT_EQ(dc_decide(dc_state(), report(0, 15), report(1, 25), targets(10, 10)), ControlAction(SwitchPath{1, true}));
}

TEST(DcDecide, HandoverToIdleTarget)
{
    auto st = dc_state();
    st.ttt_satisfied = true;
    EXPECT_EQ(dc_decide(st, report(0, 10), report(1, 12), targets(18, 22)),
              ControlAction(StartHandover{Leg::Idle, 3, true, true}));
}

TEST(DcDecide, HandoverToServingTarget)
{
    auto st = dc_state();
    st.ttt_satisfied = true;
    EXPECT_EQ(dc_decide(st, report(0, 10), report(1, 12), targets(22, 18)),
              ControlAction(StartHandover{Leg::Serving, 2, true, true}));
}

TEST(DcDecide, NothingBeforeTriggerTime)
{
    EXPECT_EQ(dc_decide(dc_state(), report(0, 10), report(1, 12), targets(22, 18)), ControlAction(NoAction{}));
}

TEST(DcDecide, SingleMissingTargetUsesTheOther)
{
    auto st = dc_state();
    st.ttt_satisfied = true;
    const TargetSet only_serving{Candidate{2, 15}, std::nullopt};
    EXPECT_EQ(dc_decide(st, report(0, 10), report(1, 12), only_serving),
              ControlAction(StartHandover{Leg::Serving, 2, true, true}));
    const TargetSet only_idle{std::nullopt, Candidate{3, 15}};
    EXPECT_EQ(dc_decide(st, report(0, 10), report(1, 12), only_idle),
              ControlAction(StartHandover{Leg::Idle, 3, true, true}));
    EXPECT_EQ(dc_decide(st, report(0, 10), report(1, 12), TargetSet{}), ControlAction(NoAction{}));
}

TEST(DcDecide, ExhaustiveGridMatchesOracle)
{
    for (double hysteresis : {0.0, 3.0}) {
        std::size_t cases = 0;
        for (int s = 5; s <= 40; s += 5)
            for (int i = 5; i <= 40; i += 5)
                for (int st = 5; st <= 40; st += 5)
                    for (int it = 5; it <= 40; it += 5)
                        for (bool ttt : {false, true}) {
                            auto state = dc_state(hysteresis);
                            state.ttt_satisfied = ttt;
                            const auto got = dc_decide(state, report(0, s), report(1, i), targets(st, it));
                            ASSERT_EQ(got, oracle(s, i, st, it, ttt, hysteresis))
                                << "s=" << s << " i=" << i << " st=" << st << " it=" << it << " ttt=" << ttt
                                << " got " << describe(got);
                            ++cases;
                        }
        EXPECT_EQ(cases, 8192u);
    }
}

TEST(DcDecide, NeverHandsOverWithALegAboveThreshold)
{
    for (int s = 0; s <= 40; ++s)
        for (int i = 0; i <= 40; ++i) {
            if (s <= 20 && i <= 20)
                continue;
            auto state = dc_state();
            state.ttt_satisfied = true;
            const auto a = dc_decide(state, report(0, s), report(1, i), targets(30, 30));
            ASSERT_FALSE(std::holds_alternative<StartHandover>(a));
        }
}

TEST(Targets, BestConnectablePerCarrier)
{
    const auto sns = four_sns();
    const std::vector<LinkReport> reports{report(0, 10), report(1, 10), report(2, 18), report(3, -10)};
    const auto t = select_targets(reports, sns, 0, 1);
    ASSERT_TRUE(t.serving_target);
    EXPECT_EQ(*t.serving_target, (Candidate{2, 18}));
    EXPECT_FALSE(t.idle_target); // SN 3 is in outage
}

TEST(Fallback, OnlyWithoutCandidates)
{
    const auto out = report(0, -10);
    const auto out2 = report(1, -10);
    EXPECT_FALSE(dc_fallback_check(out, out2, TargetSet{Candidate{2, 0.0}, std::nullopt}));
    EXPECT_TRUE(dc_fallback_check(out, out2, TargetSet{}));
    EXPECT_FALSE(dc_fallback_check(report(0, 3), out2, TargetSet{}));
}

TEST(Ttt, HandoverExactlyAfterTriggerTime)
{
    Scheduler sched;
    Recorder rec;
    DualConnectivityController ctl(sched, rec, four_sns(), params(0.020));
    ctl.attach(snapshot(0, {30, 30, 25, 22}), 0, 1);
    const double t0 = 0.010;
    drive(sched, ctl, 0.035, [&](double t) {
        return t >= t0 - 1e-12 ? std::vector<double>{10, 12, 25, 22} : std::vector<double>{30, 30, 25, 22};
    });
    const auto ho = rec.of(RecordKind::HandoverStart);
    ASSERT_EQ(ho.size(), 1u);
    EXPECT_NEAR(ho[0].time, t0 + 0.020, 1e-12);
    EXPECT_EQ(ho[0].to, 2);
    EXPECT_TRUE(ho[0].counts_as_trial);
}

TEST(Ttt, InterruptionRestartsTimer)
{
    Scheduler sched;
    Recorder rec;
    DualConnectivityController ctl(sched, rec, four_sns(), params(0.020));
    ctl.attach(snapshot(0, {30, 30, 25, 22}), 0, 1);
    // Low on [0, 10 ms), high at 10 ms, low again from 15 ms.
    auto sinr = [](double t) {
        const bool low = t < 0.010 - 1e-12 || t >= 0.015 - 1e-12;
        return low ? std::vector<double>{10, 12, 25, 22} : std::vector<double>{30, 30, 25, 22};
    };
    drive(sched, ctl, 0.030, sinr);
    EXPECT_TRUE(rec.of(RecordKind::HandoverStart).empty());

    Scheduler sched2;
    Recorder rec2;
    DualConnectivityController ctl2(sched2, rec2, four_sns(), params(0.020));
    ctl2.attach(snapshot(0, {30, 30, 25, 22}), 0, 1);
    drive(sched2, ctl2, 0.050, sinr);
    const auto ho = rec2.of(RecordKind::HandoverStart);
    ASSERT_EQ(ho.size(), 1u);
    EXPECT_NEAR(ho[0].time, 0.035, 1e-12);
}

TEST(Ttt, ZeroTriggersOnFirstReport)
{
    Scheduler sched;
    Recorder rec;
    DualConnectivityController ctl(sched, rec, four_sns(), params(0.0));
    ctl.attach(snapshot(0, {30, 30, 25, 22}), 0, 1);
    drive(sched, ctl, 0.020, [](double t) {
        return t >= 0.010 - 1e-12 ? std::vector<double>{10, 12, 25, 22} : std::vector<double>{30, 30, 25, 22};
    });
    const auto ho = rec.of(RecordKind::HandoverStart);
    ASSERT_EQ(ho.size(), 1u);
    EXPECT_NEAR(ho[0].time, 0.010, 1e-12);
}

TEST(TttTimer, OnsetAndCancel)
{
    Scheduler sched;
    int fired = 0;
    TttTimer timer(sched, 0.02, [&] { ++fired; });
    timer.update(true);
    EXPECT_TRUE(timer.running());
    EXPECT_EQ(timer.onset(), 0.0);
    timer.update(false);
    EXPECT_FALSE(timer.running());
    EXPECT_FALSE(timer.onset());
    sched.run_until(1.0);
    EXPECT_EQ(fired, 0);
    timer.update(true);
    sched.run_until(2.0);
    EXPECT_EQ(fired, 1);
    EXPECT_TRUE(timer.satisfied());
}

TEST(DualController, HandoverLifecycle)
{
    Scheduler sched;
    Recorder rec;
    DualConnectivityController ctl(sched, rec, four_sns(), params(0.020));
    ctl.attach(snapshot(0, {30, 30, 25, 22}), 0, 1);
    drive(sched, ctl, 0.021, [](double) { return std::vector<double>{10, 12, 25, 22}; });
    ASSERT_EQ(ctl.mode(), ConnectionMode::HandoverInProgress);
    EXPECT_TRUE(ctl.state().pd_active);
    // Serving leg is replaced by SN 2; the idle leg keeps transmitting while the
    // new node receives and the old data is duplicated towards it.
    const auto plan = ctl.plan();
    EXPECT_EQ(plan.push_primary, 2);
    ASSERT_TRUE(plan.push_duplicate);
    EXPECT_EQ(*plan.push_duplicate, 1);
    ASSERT_FALSE(rec.transitions.empty());
    ASSERT_EQ(rec.transitions.back().replications.size(), 1u);
    EXPECT_EQ(rec.transitions.back().replications[0].copy_to, 2);

    sched.run_until(0.030);
    const auto done = rec.of(RecordKind::HandoverComplete);
    ASSERT_EQ(done.size(), 1u);
    EXPECT_NEAR(done[0].time, 0.030, 1e-12);
    EXPECT_EQ(ctl.mode(), ConnectionMode::Dual);
    EXPECT_FALSE(ctl.state().pd_active);
    EXPECT_EQ(ctl.state().serving_sn, 2);
    EXPECT_EQ(ctl.state().idle_sn, 1); // retained leg unchanged
}

TEST(DualController, AbortFallsBackToMn)
{
    Scheduler sched;
    Recorder rec;
    DualConnectivityController ctl(sched, rec, four_sns(), params(0.0));
    ctl.attach(snapshot(0, {30, 30, 25, 22}), 0, 1);
    // Handover starts at t=0, then everything drops into outage before completion.
    drive(sched, ctl, 0.030, [](double t) {
        return t < 0.001 ? std::vector<double>{10, 12, 25, 22} : std::vector<double>{-10, -10, -10, -10};
    });
    ASSERT_EQ(rec.of(RecordKind::HandoverAbort).size(), 1u);
    ASSERT_EQ(rec.of(RecordKind::Fallback).size(), 1u);
    EXPECT_EQ(ctl.mode(), ConnectionMode::MnFallback);
    EXPECT_EQ(ctl.plan().push_primary, 4);
}

TEST(DualController, RecoversFromFallback)
{
    Scheduler sched;
    Recorder rec;
    DualConnectivityController ctl(sched, rec, four_sns(), params(0.020));
    ctl.attach(snapshot(0, {-10, -10, -10, -10}), 0, 1);
    drive(sched, ctl, 0.050, [](double t) {
        return t < 0.020 ? std::vector<double>{-10, -10, -10, -10} : std::vector<double>{-10, 15, -10, -10};
    });
    const auto fb = rec.of(RecordKind::Fallback);
    ASSERT_EQ(fb.size(), 1u);
    EXPECT_NEAR(fb[0].time, 0.0, 1e-12);
    const auto rec_events = rec.of(RecordKind::Recovery);
    ASSERT_EQ(rec_events.size(), 1u);
    EXPECT_NEAR(rec_events[0].time, 0.020, 1e-12);
    EXPECT_EQ(rec_events[0].to, 1);
    EXPECT_TRUE(rec_events[0].counts_as_trial);
    EXPECT_EQ(ctl.mode(), ConnectionMode::Dual);
    EXPECT_EQ(ctl.state().serving_sn, 1);
}

TEST(Baseline, DecideExamples)
{
    const std::vector<LinkReport> reports{report(0, 20), report(1, 25), report(2, 10)};
    EXPECT_EQ(baseline_decide(true, reports[0], reports), ControlAction(StartHandover{Leg::Serving, 1, false, true}));
    EXPECT_EQ(baseline_decide(false, reports[0], reports), ControlAction(NoAction{}));
    const std::vector<LinkReport> dead{report(0, -20), report(1, -20), report(2, -20)};
    EXPECT_EQ(baseline_decide(false, dead[0], dead), ControlAction(FallbackToMn{}));
}

TEST(Baseline, TriggerTimeAndLapse)
{
    const std::vector<Transmitter> sns{{{0, 0}, 0}, {{50, 0}, 1}, {{100, 0}, 0}};
    {
        Scheduler sched;
        Recorder rec;
        SingleConnectivityController ctl(sched, rec, sns, params(0.020));
        ctl.attach(snapshot(0, {20, 10, 10}), 0, std::nullopt);
        drive(sched, ctl, 0.040, [](double) { return std::vector<double>{20, 25, 10}; });
        const auto ho = rec.of(RecordKind::HandoverStart);
        ASSERT_EQ(ho.size(), 1u);
        EXPECT_NEAR(ho[0].time, 0.020, 1e-12);
        EXPECT_EQ(ho[0].to, 1);
        sched.run_until(0.031);
        EXPECT_EQ(ctl.serving(), 1);
    }
    {
        Scheduler sched;
        Recorder rec;
        SingleConnectivityController ctl(sched, rec, sns, params(0.020));
        ctl.attach(snapshot(0, {20, 10, 10}), 0, std::nullopt);
        drive(sched, ctl, 0.100, [](double t) {
            return t < 0.010 ? std::vector<double>{20, 25, 10} : std::vector<double>{20, 15, 10};
        });
        EXPECT_TRUE(rec.of(RecordKind::HandoverStart).empty());
    }
}

TEST(Controllers, InterchangeableBehindInterface)
{
    Scheduler sched;
    Recorder rec;
    std::vector<std::unique_ptr<MobilityController>> ctls;
    ctls.push_back(std::make_unique<DualConnectivityController>(sched, rec, four_sns(), params(0.02)));
    ctls.push_back(std::make_unique<SingleConnectivityController>(sched, rec, four_sns(), params(0.02)));
    for (auto& c : ctls) {
        c->attach(snapshot(0, {30, 25, 10, 10}), 0, 1);
        EXPECT_EQ(c->plan().push_primary, 0);
        EXPECT_EQ(c->mode(), ConnectionMode::Dual);
    }
    EXPECT_EQ(ctls[0]->scheme(), "dual");
    EXPECT_EQ(ctls[1]->scheme(), "single");
}
