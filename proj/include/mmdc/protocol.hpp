#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mmdc/channel.hpp"
#include "mmdc/engine.hpp"

namespace mmdc {

enum class ConnectionMode { Dual, HandoverInProgress, MnFallback };

std::string_view to_string(ConnectionMode mode);

enum class Leg { Serving, Idle };

// ---------------------------------------------------------------------------
// Control actions

struct NoAction {
    friend bool operator==(const NoAction&, const NoAction&) = default;
};

struct SwitchPath {
    int to = -1;
    bool forward_buffer = false;
    friend bool operator==(const SwitchPath&, const SwitchPath&) = default;
};

struct StartHandover {
    Leg replace = Leg::Idle;
    int target = -1;
    bool duplicate = true;
    bool forward_buffer = true;
    friend bool operator==(const StartHandover&, const StartHandover&) = default;
};

struct FallbackToMn {
    friend bool operator==(const FallbackToMn&, const FallbackToMn&) = default;
};

using ControlAction = std::variant<NoAction, SwitchPath, StartHandover, FallbackToMn>;

std::string describe(const ControlAction& action);

/// Best connectable, currently unattached SN on a carrier.
struct Candidate {
    int sn_id = -1;
    double sinr_db = 0.0;
    friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct TargetSet {
    std::optional<Candidate> serving_target; // on the serving leg's carrier
    std::optional<Candidate> idle_target;    // on the idle leg's carrier
};

/// Everything the handover decision reads. Timer bookkeeping lives in the
/// controller; only its outcome (ttt_satisfied) enters the decision.
struct DcControllerState {
    int serving_sn = -1;
    int idle_sn = -1;
    double sinr_th_db = 20.0;
    double hysteresis_db = 3.0;
    bool forward_on_switch = true; // forward the serving buffer on SINR-comparison switches too
    bool ttt_satisfied = false;
    bool pd_active = false;
    ConnectionMode mode = ConnectionMode::Dual;
};

/// The per-report handover/path-switch rule for two connected legs.
///
/// Both legs at or below the threshold: once the trigger time has elapsed, hand
/// over towards the better of the two carrier targets (the idle-carrier target
/// wins ties). Only the serving leg below: move the data path to the
/// idle leg and forward the buffer. Both above: move the data path when the idle
/// leg is better by the hysteresis margin.
ControlAction dc_decide(const DcControllerState& state, const LinkReport& serving, const LinkReport& idle,
                        const TargetSet& targets);

/// Per-carrier candidates among SNs other than the attached ones.
TargetSet select_targets(std::span<const LinkReport> reports, std::span<const Transmitter> sns, int serving_sn,
                         int idle_sn);

/// Both legs in outage with nothing to hand over to.
bool dc_fallback_check(const LinkReport& serving, const LinkReport& idle, const TargetSet& targets);

// ---------------------------------------------------------------------------
// Time-to-trigger

/// Tracks how long a trigger condition has held. With a zero trigger time the
/// condition is satisfied on the first report that asserts it.
class TttTimer {
  public:
    TttTimer(Scheduler& scheduler, double ttt, std::function<void()> on_expire);
    ~TttTimer();
    TttTimer(const TttTimer&) = delete;
    TttTimer& operator=(const TttTimer&) = delete;

    void update(bool condition);
    void reset();

    [[nodiscard]] bool satisfied() const { return satisfied_; }
    [[nodiscard]] bool running() const { return scheduler_.is_pending(handle_); }
    [[nodiscard]] std::optional<double> onset() const { return onset_; }

  private:
    Scheduler& scheduler_;
    double ttt_;
    std::function<void()> on_expire_;
    EventHandle handle_;
    bool satisfied_ = false;
    std::optional<double> onset_;
};

// ---------------------------------------------------------------------------
// Controllers

/// Channel state seen by the MN at one reporting instant; reports are indexed by SN id.
struct ChannelSnapshot {
    double time = 0.0;
    std::vector<LinkReport> sn;
};

/// Which nodes transmit to the UE and where the MN sends new data.
struct ServicePlan {
    std::vector<int> transmitters;
    int push_primary = -1;
    std::optional<int> push_duplicate;
};

/// A data-plane consequence of a control decision.
/// Packet duplication of one buffer: its data stays at keep and a copy goes to copy_to.
struct Replication {
    int from = -1;
    int keep = -1;
    int copy_to = -1;
};

struct Transition {
    std::vector<Replication> replications;     // applied first
    std::vector<std::pair<int, int>> forwards; // X2 buffer moves, applied in order
    std::vector<int> purges;                   // buffers emptied; unique data moves to the primary
};

enum class RecordKind { PathSwitch, HandoverStart, HandoverComplete, HandoverAbort, Fallback, Recovery };

std::string_view to_string(RecordKind kind);

struct ActionRecord {
    double time = 0.0;
    RecordKind kind = RecordKind::PathSwitch;
    int from = -1;
    int to = -1;
    double sinr_from = 0.0;
    double sinr_to = 0.0;
    bool counts_as_trial = false;
};

class ControllerObserver {
  public:
    virtual ~ControllerObserver() = default;
    virtual void on_record(const ActionRecord& record) = 0;
    virtual void on_transition(const Transition& transition) = 0;
};

struct ControllerParams {
    double sinr_th_db = 20.0;
    double ttt = 0.020;
    double hysteresis_db = 3.0;
    bool forward_on_switch = true;
    double control_delay = 0.010; // RRC reconfiguration round trip over the MN
    int mn_id = -1;
};

/// Common surface of the two mobility schemes; the run loop only sees this.
class MobilityController {
  public:
    virtual ~MobilityController() = default;

    virtual void attach(const ChannelSnapshot& snapshot, int serving, std::optional<int> idle) = 0;
    virtual void on_report(const ChannelSnapshot& snapshot) = 0;

    [[nodiscard]] virtual ServicePlan plan() const = 0;
    [[nodiscard]] virtual ConnectionMode mode() const = 0;
    [[nodiscard]] virtual std::string_view scheme() const = 0;
    [[nodiscard]] virtual std::vector<int> connected_sns() const = 0;
};

/// Two SN legs plus the MN anchor, driven by dc_decide.
class DualConnectivityController final : public MobilityController {
  public:
    DualConnectivityController(Scheduler& scheduler, ControllerObserver& observer, std::vector<Transmitter> sns,
                               ControllerParams params);

    void attach(const ChannelSnapshot& snapshot, int serving, std::optional<int> idle) override;
    void on_report(const ChannelSnapshot& snapshot) override;

    [[nodiscard]] ServicePlan plan() const override;
    [[nodiscard]] ConnectionMode mode() const override { return state_.mode; }
    [[nodiscard]] std::string_view scheme() const override { return "dual"; }
    [[nodiscard]] std::vector<int> connected_sns() const override;

    [[nodiscard]] const DcControllerState& state() const { return state_; }
    [[nodiscard]] const TttTimer& ttt() const { return ttt_; }

  private:
    struct Pending {
        int target = -1;
        int retained = -1;       // node that keeps serving during execution
        int other = -1;          // the leg being replaced (restored on abort)
        bool from_anchor = false; // re-establishment from MN fallback
        std::optional<int> new_idle;
    };

    void evaluate();
    void apply(const ControlAction& action);
    void start_handover(const StartHandover& ho);
    void complete_handover();
    void enter_fallback();
    void try_recover();

    Scheduler& scheduler_;
    ControllerObserver& observer_;
    std::vector<Transmitter> sns_;
    ControllerParams params_;
    DcControllerState state_;
    TttTimer ttt_;
    ChannelSnapshot latest_;
    std::optional<Pending> pending_;
};

/// Single SN leg; hands over when a neighbour beats the serving SN for the trigger time.
class SingleConnectivityController final : public MobilityController {
  public:
    SingleConnectivityController(Scheduler& scheduler, ControllerObserver& observer, std::vector<Transmitter> sns,
                                 ControllerParams params);

    void attach(const ChannelSnapshot& snapshot, int serving, std::optional<int> idle) override;
    void on_report(const ChannelSnapshot& snapshot) override;

    [[nodiscard]] ServicePlan plan() const override;
    [[nodiscard]] ConnectionMode mode() const override { return mode_; }
    [[nodiscard]] std::string_view scheme() const override { return "single"; }
    [[nodiscard]] std::vector<int> connected_sns() const override;

    [[nodiscard]] int serving() const { return serving_; }

  private:
    void evaluate();
    void start_handover(int target, RecordKind kind);
    void complete_handover();
    void enter_fallback();

    Scheduler& scheduler_;
    ControllerObserver& observer_;
    std::vector<Transmitter> sns_;
    ControllerParams params_;
    int serving_ = -1;
    ConnectionMode mode_ = ConnectionMode::Dual;
    TttTimer ttt_;
    ChannelSnapshot latest_;
    struct Pending {
        int target = -1;
        int source = -1;
        bool from_anchor = false;
    };
    std::optional<Pending> pending_;
};

/// Baseline decision: the best connectable neighbour, if any beats the serving SN.
std::optional<Candidate> best_neighbor(std::span<const LinkReport> reports, int serving_sn);

ControlAction baseline_decide(bool ttt_satisfied, const LinkReport& serving, std::span<const LinkReport> reports);

} // namespace mmdc
