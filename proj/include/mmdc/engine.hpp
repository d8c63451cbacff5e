#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace mmdc {

enum class EventKind : std::uint8_t {
    SrsReport,
    TrafficGen,
    LinkService,
    X2Delivery,
    HoComplete,
    TttExpiry,
    MobilityStep,
    RunEnd,
    ReorderTimer,
    Deadline,
};

std::string_view to_string(EventKind kind);

/// Opaque reference to a scheduled event. A default-constructed handle refers to nothing.
class EventHandle {
  public:
    EventHandle() = default;
    explicit EventHandle(std::uint64_t seq) : seq_(seq) {}

    [[nodiscard]] bool valid() const { return seq_ != 0; }
    [[nodiscard]] std::uint64_t seq() const { return seq_; }

  private:
    std::uint64_t seq_ = 0;
};

struct SimEvent {
    double fire_time = 0.0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::RunEnd;
    std::function<void()> action;
    // Rendered lazily, only when a trace sink is attached.
    std::function<std::string()> describe;
};

class ScheduleError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Line-delimited event trace. The first line is a versioned header.
class TraceSink {
  public:
    explicit TraceSink(std::ostream& out);
    void record(double time, EventKind kind, std::string_view payload);
    /// A line that is not an event, e.g. a control decision.
    void note(double time, std::string_view tag, std::string_view payload);

  private:
    std::ostream& out_;
};

/// Discrete-event core. Events are processed in (fire_time, seq) order; seq is the
/// insertion counter, so simultaneous events run FIFO.
class Scheduler {
  public:
    Scheduler() = default;
    Scheduler(const Scheduler&) = delete;
    Scheduler& operator=(const Scheduler&) = delete;

    [[nodiscard]] double now() const { return clock_; }

    EventHandle schedule(double fire_time, EventKind kind, std::function<void()> action,
                         std::function<std::string()> describe = {});
    EventHandle schedule_in(double delay, EventKind kind, std::function<void()> action,
                            std::function<std::string()> describe = {})
    {
        return schedule(clock_ + delay, kind, std::move(action), std::move(describe));
    }

    /// True iff the event was still pending; it will never fire afterwards.
    bool cancel(EventHandle handle);

    [[nodiscard]] bool is_pending(EventHandle handle) const;

    /// Processes every event with fire_time <= t_end, then leaves the clock at t_end.
    /// Returns the number of events processed.
    std::uint64_t run_until(double t_end);

    /// Stops the current run_until after the event being processed.
    void stop() { stopped_ = true; }

    void set_trace(TraceSink* sink) { trace_ = sink; }

    /// Runs before each live event's action, with the clock already at its fire time.
    void set_pre_dispatch(std::function<void(const SimEvent&)> hook) { pre_dispatch_ = std::move(hook); }

    [[nodiscard]] std::size_t pending_count() const { return pending_.size(); }

  private:
    struct Later {
        bool operator()(const std::shared_ptr<SimEvent>& a, const std::shared_ptr<SimEvent>& b) const
        {
            if (a->fire_time != b->fire_time)
                return a->fire_time > b->fire_time;
            return a->seq > b->seq;
        }
    };

    double clock_ = 0.0;
    std::uint64_t next_seq_ = 1;
    bool stopped_ = false;
    std::priority_queue<std::shared_ptr<SimEvent>, std::vector<std::shared_ptr<SimEvent>>, Later> queue_;
    std::unordered_set<std::uint64_t> pending_;
    TraceSink* trace_ = nullptr;
    std::function<void(const SimEvent&)> pre_dispatch_;
};

enum class Stream : std::uint8_t { Topology, Blockage, Shadowing, Traffic };

/// Independent pseudorandom streams derived from one master seed. Draws on one
/// stream never perturb another.
class RngStreams {
  public:
    using Engine = std::mt19937_64;

    explicit RngStreams(std::uint64_t master_seed);

    Engine& get(Stream stream) { return engines_[static_cast<std::size_t>(stream)]; }

    /// A further independent engine keyed by (stream, index), e.g. one per radio link.
    [[nodiscard]] Engine derive(Stream stream, std::uint64_t index) const;

    [[nodiscard]] std::uint64_t master_seed() const { return master_; }

  private:
    std::uint64_t master_;
    std::vector<Engine> engines_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value);
std::uint64_t hash_string(std::string_view text);

} // namespace mmdc
