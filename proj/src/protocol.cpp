#include "mmdc/protocol.hpp"

#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace mmdc {

std::string_view to_string(ConnectionMode mode)
{
    switch (mode) {
    case ConnectionMode::Dual:
        return "DUAL";
    case ConnectionMode::HandoverInProgress:
        return "HO_IN_PROGRESS";
    case ConnectionMode::MnFallback:
        return "MN_FALLBACK";
    }
    return "?";
}

std::string_view to_string(RecordKind kind)
{
    switch (kind) {
    case RecordKind::PathSwitch:
        return "SWITCH_PATH";
    case RecordKind::HandoverStart:
        return "START_HANDOVER";
    case RecordKind::HandoverComplete:
        return "HANDOVER_COMPLETE";
    case RecordKind::HandoverAbort:
        return "HANDOVER_ABORT";
    case RecordKind::Fallback:
        return "FALLBACK_TO_MN";
    case RecordKind::Recovery:
        return "REESTABLISH";
    }
    return "?";
}

std::string describe(const ControlAction& action)
{
    struct Visitor {
        std::string operator()(const NoAction&) const { return "NONE"; }
        std::string operator()(const SwitchPath& a) const
        {
            return fmt::format("SWITCH_PATH to={} forward={}", a.to, a.forward_buffer);
        }
        std::string operator()(const StartHandover& a) const
        {
            return fmt::format("START_HANDOVER replace={} target={} duplicate={} forward={}",
                               a.replace == Leg::Serving ? "serving" : "idle", a.target, a.duplicate,
                               a.forward_buffer);
        }
        std::string operator()(const FallbackToMn&) const { return "FALLBACK_TO_MN"; }
    };
    return std::visit(Visitor{}, action);
}

ControlAction dc_decide(const DcControllerState& state, const LinkReport& serving, const LinkReport& idle,
                        const TargetSet& targets)
{
    const double th = state.sinr_th_db;
    const bool serving_low = serving.sinr_db <= th;
    const bool idle_low = idle.sinr_db <= th;

    if (serving_low && idle_low) {
        if (!state.ttt_satisfied)
            return NoAction{};
        if (!targets.serving_target && !targets.idle_target)
            return NoAction{};
        constexpr double none = -std::numeric_limits<double>::infinity();
        const double serving_target = targets.serving_target ? targets.serving_target->sinr_db : none;
        const double idle_target = targets.idle_target ? targets.idle_target->sinr_db : none;
        const bool to_idle_target = serving_target <= idle_target;
        const Candidate& chosen = to_idle_target ? *targets.idle_target : *targets.serving_target;
        return StartHandover{to_idle_target ? Leg::Idle : Leg::Serving, chosen.sn_id, true, true};
    }
    if (serving_low)
        return SwitchPath{state.idle_sn, true};
    if (!idle_low && idle.sinr_db > serving.sinr_db + state.hysteresis_db)
        return SwitchPath{state.idle_sn, state.forward_on_switch};
    return NoAction{};
}

TargetSet select_targets(std::span<const LinkReport> reports, std::span<const Transmitter> sns, int serving_sn,
                         int idle_sn)
{
    TargetSet out;
    const int serving_channel = sns[static_cast<std::size_t>(serving_sn)].channel;
    const int idle_channel = idle_sn >= 0 ? sns[static_cast<std::size_t>(idle_sn)].channel : -1;
    for (std::size_t k = 0; k < sns.size(); ++k) {
        const int id = static_cast<int>(k);
        if (id == serving_sn || id == idle_sn)
            continue;
        const auto& r = reports[k];
        if (!connectable(r.link_class))
            continue;
        auto consider = [&](std::optional<Candidate>& slot) {
            if (!slot || r.sinr_db > slot->sinr_db)
                slot = Candidate{id, r.sinr_db};
        };
        if (sns[k].channel == serving_channel)
            consider(out.serving_target);
        else if (sns[k].channel == idle_channel)
            consider(out.idle_target);
    }
    return out;
}

bool dc_fallback_check(const LinkReport& serving, const LinkReport& idle, const TargetSet& targets)
{
    return serving.link_class == LinkClass::Outage && idle.link_class == LinkClass::Outage &&
           !targets.serving_target && !targets.idle_target;
}

// ---------------------------------------------------------------------------

TttTimer::TttTimer(Scheduler& scheduler, double ttt, std::function<void()> on_expire)
    : scheduler_(scheduler), ttt_(ttt), on_expire_(std::move(on_expire))
{
}

TttTimer::~TttTimer()
{
    scheduler_.cancel(handle_);
}

void TttTimer::update(bool condition)
{
    if (!condition) {
        reset();
        return;
    }
    if (satisfied_ || running())
        return;
    onset_ = scheduler_.now();
    if (ttt_ <= 0.0) {
        satisfied_ = true;
        return;
    }
    handle_ = scheduler_.schedule_in(
        ttt_, EventKind::TttExpiry,
        [this] {
            handle_ = {};
            satisfied_ = true;
            if (on_expire_)
                on_expire_();
        },
        [] { return std::string("expired"); });
}

void TttTimer::reset()
{
    scheduler_.cancel(handle_);
    handle_ = {};
    satisfied_ = false;
    onset_.reset();
}

// ---------------------------------------------------------------------------

namespace {

const LinkReport& report_of(const ChannelSnapshot& snap, int sn)
{
    return snap.sn.at(static_cast<std::size_t>(sn));
}

} // namespace

DualConnectivityController::DualConnectivityController(Scheduler& scheduler, ControllerObserver& observer,
                                                       std::vector<Transmitter> sns, ControllerParams params)
    : scheduler_(scheduler), observer_(observer), sns_(std::move(sns)), params_(params),
      ttt_(scheduler, params.ttt, [this] {
          if (state_.mode == ConnectionMode::Dual)
              evaluate();
      })
{
    state_.sinr_th_db = params_.sinr_th_db;
    state_.hysteresis_db = params_.hysteresis_db;
    state_.forward_on_switch = params_.forward_on_switch;
}

void DualConnectivityController::attach(const ChannelSnapshot& snapshot, int serving, std::optional<int> idle)
{
    if (!idle)
        throw std::invalid_argument("dual connectivity needs SNs on two carriers");
    latest_ = snapshot;
    state_.serving_sn = serving;
    state_.idle_sn = *idle;
    state_.mode = ConnectionMode::Dual;
}

void DualConnectivityController::on_report(const ChannelSnapshot& snapshot)
{
    latest_ = snapshot;
    switch (state_.mode) {
    case ConnectionMode::Dual: {
        const auto& s = report_of(latest_, state_.serving_sn);
        const auto& i = report_of(latest_, state_.idle_sn);
        ttt_.update(s.sinr_db <= state_.sinr_th_db && i.sinr_db <= state_.sinr_th_db);
        evaluate();
        break;
    }
    case ConnectionMode::HandoverInProgress:
        break;
    case ConnectionMode::MnFallback:
        try_recover();
        break;
    }
}

void DualConnectivityController::evaluate()
{
    const auto& s = report_of(latest_, state_.serving_sn);
    const auto& i = report_of(latest_, state_.idle_sn);
    const auto targets = select_targets(latest_.sn, sns_, state_.serving_sn, state_.idle_sn);
    if (dc_fallback_check(s, i, targets)) {
        enter_fallback();
        return;
    }
    state_.ttt_satisfied = ttt_.satisfied();
    apply(dc_decide(state_, s, i, targets));
}

void DualConnectivityController::apply(const ControlAction& action)
{
    if (const auto* sw = std::get_if<SwitchPath>(&action)) {
        const int from = state_.serving_sn;
        observer_.on_record({scheduler_.now(), RecordKind::PathSwitch, from, sw->to,
                             report_of(latest_, from).sinr_db, report_of(latest_, sw->to).sinr_db, false});
        state_.idle_sn = from;
        state_.serving_sn = sw->to;
        Transition t;
        if (sw->forward_buffer)
            t.forwards.emplace_back(from, sw->to);
        observer_.on_transition(t);
    } else if (const auto* ho = std::get_if<StartHandover>(&action)) {
        start_handover(*ho);
    } else if (std::holds_alternative<FallbackToMn>(action)) {
        enter_fallback();
    }
}

void DualConnectivityController::start_handover(const StartHandover& ho)
{
    const int serving = state_.serving_sn;
    const int idle = state_.idle_sn;
    Pending p;
    p.target = ho.target;
    p.retained = ho.replace == Leg::Idle ? serving : idle;
    p.other = ho.replace == Leg::Idle ? idle : serving;

    observer_.on_record({scheduler_.now(), RecordKind::HandoverStart, p.other, p.target,
                         report_of(latest_, p.other).sinr_db, report_of(latest_, p.target).sinr_db, true});

    Transition t;
    if (ho.duplicate) {
        t.replications.push_back({serving, p.retained, p.target});
        if (p.other != serving)
            t.forwards.emplace_back(p.other, p.target);
    } else {
        if (ho.forward_buffer && p.retained == serving)
            t.forwards.emplace_back(serving, p.target);
        // The released leg's buffer always follows the new SN.
        t.forwards.emplace_back(p.other, p.target);
    }

    state_.mode = ConnectionMode::HandoverInProgress;
    state_.pd_active = ho.duplicate;
    state_.ttt_satisfied = false;
    ttt_.reset();
    pending_ = p;
    observer_.on_transition(t);

    const int target = p.target;
    scheduler_.schedule_in(
        params_.control_delay, EventKind::HoComplete, [this] { complete_handover(); },
        [target] { return fmt::format("target={}", target); });
}

void DualConnectivityController::complete_handover()
{
    if (!pending_)
        return;
    const Pending p = *pending_;
    pending_.reset();
    state_.pd_active = false;
    const auto& target_report = report_of(latest_, p.target);
    const bool ok = connectable(target_report.link_class);

    if (p.from_anchor) {
        if (ok) {
            state_.serving_sn = p.target;
            state_.idle_sn = *p.new_idle;
            state_.mode = ConnectionMode::Dual;
            observer_.on_record({scheduler_.now(), RecordKind::HandoverComplete, params_.mn_id, p.target, 0.0,
                                 target_report.sinr_db, false});
            Transition t;
            t.forwards.emplace_back(params_.mn_id, p.target);
            observer_.on_transition(t);
        } else {
            state_.mode = ConnectionMode::MnFallback;
            observer_.on_record({scheduler_.now(), RecordKind::HandoverAbort, params_.mn_id, p.target, 0.0,
                                 target_report.sinr_db, false});
        }
        return;
    }

    if (ok) {
        state_.serving_sn = p.target;
        state_.idle_sn = p.retained;
        state_.mode = ConnectionMode::Dual;
        observer_.on_record({scheduler_.now(), RecordKind::HandoverComplete, p.other, p.target,
                             report_of(latest_, p.other).sinr_db, target_report.sinr_db, false});
        Transition t;
        t.purges.push_back(p.retained);
        observer_.on_transition(t);
        return;
    }

    state_.serving_sn = p.retained;
    state_.idle_sn = p.other;
    state_.mode = ConnectionMode::Dual;
    observer_.on_record({scheduler_.now(), RecordKind::HandoverAbort, p.other, p.target,
                         report_of(latest_, p.other).sinr_db, target_report.sinr_db, false});
    Transition t;
    t.purges.push_back(p.target);
    observer_.on_transition(t);

    const auto& s = report_of(latest_, state_.serving_sn);
    const auto& i = report_of(latest_, state_.idle_sn);
    if (dc_fallback_check(s, i, select_targets(latest_.sn, sns_, state_.serving_sn, state_.idle_sn)))
        enter_fallback();
}

void DualConnectivityController::enter_fallback()
{
    observer_.on_record({scheduler_.now(), RecordKind::Fallback, state_.serving_sn, params_.mn_id,
                         report_of(latest_, state_.serving_sn).sinr_db, 0.0, false});
    Transition t;
    t.forwards.emplace_back(state_.serving_sn, params_.mn_id);
    t.forwards.emplace_back(state_.idle_sn, params_.mn_id);
    state_.mode = ConnectionMode::MnFallback;
    state_.ttt_satisfied = false;
    ttt_.reset();
    observer_.on_transition(t);
}

void DualConnectivityController::try_recover()
{
    int best = -1;
    for (std::size_t k = 0; k < latest_.sn.size(); ++k) {
        const auto& r = latest_.sn[k];
        if (connectable(r.link_class) && (best < 0 || r.sinr_db > latest_.sn[static_cast<std::size_t>(best)].sinr_db))
            best = static_cast<int>(k);
    }
    if (best < 0)
        return;
    const int best_channel = sns_[static_cast<std::size_t>(best)].channel;
    // Second leg: best SN on another carrier, preferring connectable ones.
    int second = -1;
    auto rank = [&](int k) {
        const auto& r = latest_.sn[static_cast<std::size_t>(k)];
        return std::pair{connectable(r.link_class) ? 1 : 0, r.sinr_db};
    };
    for (std::size_t k = 0; k < sns_.size(); ++k) {
        if (sns_[k].channel == best_channel)
            continue;
        if (second < 0 || rank(static_cast<int>(k)) > rank(second))
            second = static_cast<int>(k);
    }
    if (second < 0)
        return;

    observer_.on_record({scheduler_.now(), RecordKind::Recovery, params_.mn_id, best, 0.0,
                         latest_.sn[static_cast<std::size_t>(best)].sinr_db, true});
    Pending p;
    p.target = best;
    p.retained = params_.mn_id;
    p.from_anchor = true;
    p.new_idle = second;
    pending_ = p;
    state_.mode = ConnectionMode::HandoverInProgress;
    scheduler_.schedule_in(
        params_.control_delay, EventKind::HoComplete, [this] { complete_handover(); },
        [best] { return fmt::format("target={} reestablish", best); });
}

ServicePlan DualConnectivityController::plan() const
{
    switch (state_.mode) {
    case ConnectionMode::Dual:
        return {{state_.serving_sn}, state_.serving_sn, std::nullopt};
    case ConnectionMode::HandoverInProgress:
        if (pending_ && pending_->from_anchor)
            return {{params_.mn_id}, params_.mn_id, std::nullopt};
        if (pending_) {
            ServicePlan plan{{pending_->retained}, pending_->target, std::nullopt};
            if (state_.pd_active)
                plan.push_duplicate = pending_->retained;
            return plan;
        }
        break;
    case ConnectionMode::MnFallback:
        break;
    }
    return {{params_.mn_id}, params_.mn_id, std::nullopt};
}

std::vector<int> DualConnectivityController::connected_sns() const
{
    switch (state_.mode) {
    case ConnectionMode::Dual:
        return {state_.serving_sn, state_.idle_sn};
    case ConnectionMode::HandoverInProgress:
        if (pending_ && !pending_->from_anchor)
            return {pending_->retained, pending_->other, pending_->target};
        return {};
    case ConnectionMode::MnFallback:
        return {};
    }
    return {};
}

// ---------------------------------------------------------------------------

std::optional<Candidate> best_neighbor(std::span<const LinkReport> reports, int serving_sn)
{
    std::optional<Candidate> best;
    for (std::size_t k = 0; k < reports.size(); ++k) {
        if (static_cast<int>(k) == serving_sn || !connectable(reports[k].link_class))
            continue;
        if (!best || reports[k].sinr_db > best->sinr_db)
            best = Candidate{static_cast<int>(k), reports[k].sinr_db};
    }
    return best;
}

ControlAction baseline_decide(bool ttt_satisfied, const LinkReport& serving, std::span<const LinkReport> reports)
{
    const auto nb = best_neighbor(reports, serving.sn_id);
    if (!connectable(serving.link_class) && !nb)
        return FallbackToMn{};
    if (ttt_satisfied && nb && nb->sinr_db > serving.sinr_db)
        return StartHandover{Leg::Serving, nb->sn_id, false, true};
    return NoAction{};
}

SingleConnectivityController::SingleConnectivityController(Scheduler& scheduler, ControllerObserver& observer,
                                                           std::vector<Transmitter> sns, ControllerParams params)
    : scheduler_(scheduler), observer_(observer), sns_(std::move(sns)), params_(params),
      ttt_(scheduler, params.ttt, [this] {
          if (mode_ == ConnectionMode::Dual)
              evaluate();
      })
{
}

void SingleConnectivityController::attach(const ChannelSnapshot& snapshot, int serving, std::optional<int>)
{
    latest_ = snapshot;
    serving_ = serving;
    mode_ = ConnectionMode::Dual;
}

void SingleConnectivityController::on_report(const ChannelSnapshot& snapshot)
{
    latest_ = snapshot;
    switch (mode_) {
    case ConnectionMode::Dual: {
        const auto& s = report_of(latest_, serving_);
        const auto nb = best_neighbor(latest_.sn, serving_);
        ttt_.update(nb && nb->sinr_db > s.sinr_db);
        evaluate();
        break;
    }
    case ConnectionMode::HandoverInProgress:
        break;
    case ConnectionMode::MnFallback: {
        const auto nb = best_neighbor(latest_.sn, -1);
        if (nb)
            start_handover(nb->sn_id, RecordKind::Recovery);
        break;
    }
    }
}

void SingleConnectivityController::evaluate()
{
    const auto& s = report_of(latest_, serving_);
    const auto action = baseline_decide(ttt_.satisfied(), s, latest_.sn);
    if (std::holds_alternative<FallbackToMn>(action))
        enter_fallback();
    else if (const auto* ho = std::get_if<StartHandover>(&action))
        start_handover(ho->target, RecordKind::HandoverStart);
}

void SingleConnectivityController::start_handover(int target, RecordKind kind)
{
    const bool from_anchor = kind == RecordKind::Recovery;
    const int source = from_anchor ? params_.mn_id : serving_;
    const double sinr_from = from_anchor ? 0.0 : report_of(latest_, serving_).sinr_db;
    observer_.on_record(
        {scheduler_.now(), kind, source, target, sinr_from, report_of(latest_, target).sinr_db, true});
    pending_ = Pending{target, source, from_anchor};
    mode_ = ConnectionMode::HandoverInProgress;
    ttt_.reset();
    if (!from_anchor) {
        Transition t;
        t.forwards.emplace_back(serving_, target);
        observer_.on_transition(t);
    }
    scheduler_.schedule_in(
        params_.control_delay, EventKind::HoComplete, [this] { complete_handover(); },
        [target] { return fmt::format("target={}", target); });
}

void SingleConnectivityController::complete_handover()
{
    if (!pending_)
        return;
    const Pending p = *pending_;
    pending_.reset();
    const auto& target_report = report_of(latest_, p.target);
    const bool ok = connectable(target_report.link_class);

    if (p.from_anchor) {
        if (ok) {
            serving_ = p.target;
            mode_ = ConnectionMode::Dual;
            observer_.on_record({scheduler_.now(), RecordKind::HandoverComplete, params_.mn_id, p.target, 0.0,
                                 target_report.sinr_db, false});
            Transition t;
            t.forwards.emplace_back(params_.mn_id, p.target);
            observer_.on_transition(t);
        } else {
            mode_ = ConnectionMode::MnFallback;
            observer_.on_record({scheduler_.now(), RecordKind::HandoverAbort, params_.mn_id, p.target, 0.0,
                                 target_report.sinr_db, false});
        }
        return;
    }

    mode_ = ConnectionMode::Dual;
    if (ok) {
        serving_ = p.target;
        observer_.on_record({scheduler_.now(), RecordKind::HandoverComplete, p.source, p.target,
                             report_of(latest_, p.source).sinr_db, target_report.sinr_db, false});
        return;
    }
    serving_ = p.source;
    observer_.on_record({scheduler_.now(), RecordKind::HandoverAbort, p.source, p.target,
                         report_of(latest_, p.source).sinr_db, target_report.sinr_db, false});
    Transition t;
    t.forwards.emplace_back(p.target, p.source);
    observer_.on_transition(t);
    if (std::holds_alternative<FallbackToMn>(baseline_decide(false, report_of(latest_, serving_), latest_.sn)))
        enter_fallback();
}

void SingleConnectivityController::enter_fallback()
{
    observer_.on_record({scheduler_.now(), RecordKind::Fallback, serving_, params_.mn_id,
                         report_of(latest_, serving_).sinr_db, 0.0, false});
    Transition t;
    t.forwards.emplace_back(serving_, params_.mn_id);
    mode_ = ConnectionMode::MnFallback;
    ttt_.reset();
    observer_.on_transition(t);
}

ServicePlan SingleConnectivityController::plan() const
{
    switch (mode_) {
    case ConnectionMode::Dual:
        return {{serving_}, serving_, std::nullopt};
    case ConnectionMode::HandoverInProgress:
        if (pending_ && pending_->from_anchor)
            return {{params_.mn_id}, params_.mn_id, std::nullopt};
        if (pending_)
            return {{}, pending_->target, std::nullopt};
        break;
    case ConnectionMode::MnFallback:
        break;
    }
    return {{params_.mn_id}, params_.mn_id, std::nullopt};
}

std::vector<int> SingleConnectivityController::connected_sns() const
{
    if (mode_ == ConnectionMode::Dual)
        return {serving_};
    if (mode_ == ConnectionMode::HandoverInProgress && pending_ && !pending_->from_anchor)
        return {pending_->source, pending_->target};
    return {};
}

} // namespace mmdc
