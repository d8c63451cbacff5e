#include "mmdc/engine.hpp"

#include <array>
#include <ostream>

#include <fmt/format.h>

namespace mmdc {

std::string_view to_string(EventKind kind)
{
    switch (kind) {
    case EventKind::SrsReport:
        return "SRS_REPORT";
    case EventKind::TrafficGen:
        return "TRAFFIC_GEN";
    case EventKind::LinkService:
        return "LINK_SERVICE";
    case EventKind::X2Delivery:
        return "X2_DELIVERY";
    case EventKind::HoComplete:
        return "HO_COMPLETE";
    case EventKind::TttExpiry:
        return "TTT_EXPIRY";
    case EventKind::MobilityStep:
        return "MOBILITY_STEP";
    case EventKind::RunEnd:
        return "RUN_END";
    case EventKind::ReorderTimer:
        return "REORDER_TIMER";
    case EventKind::Deadline:
        return "DEADLINE";
    }
    return "UNKNOWN";
}

TraceSink::TraceSink(std::ostream& out) : out_(out)
{
    out_ << "# mmdc-trace v1\n";
}

void TraceSink::record(double time, EventKind kind, std::string_view payload)
{
    out_ << fmt::format("{:.9f}\t{}", time, to_string(kind));
    if (!payload.empty())
        out_ << '\t' << payload;
    out_ << '\n';
}

void TraceSink::note(double time, std::string_view tag, std::string_view payload)
{
    out_ << fmt::format("{:.9f}\t{}\t{}\n", time, tag, payload);
}

EventHandle Scheduler::schedule(double fire_time, EventKind kind, std::function<void()> action,
                                std::function<std::string()> describe)
{
    if (!(fire_time >= clock_))
        throw ScheduleError(fmt::format("cannot schedule {} at t={} before clock t={}", to_string(kind),
                                        fire_time, clock_));
    auto ev = std::make_shared<SimEvent>();
    ev->fire_time = fire_time;
    ev->seq = next_seq_++;
    ev->kind = kind;
    ev->action = std::move(action);
    ev->describe = std::move(describe);
    pending_.insert(ev->seq);
    EventHandle handle(ev->seq);
    queue_.push(std::move(ev));
    return handle;
}

bool Scheduler::cancel(EventHandle handle)
{
    if (!handle.valid())
        return false;
    return pending_.erase(handle.seq()) > 0;
}

bool Scheduler::is_pending(EventHandle handle) const
{
    return handle.valid() && pending_.count(handle.seq()) > 0;
}

std::uint64_t Scheduler::run_until(double t_end)
{
    std::uint64_t processed = 0;
    stopped_ = false;
    while (!queue_.empty() && !stopped_) {
        const auto& top = queue_.top();
        if (top->fire_time > t_end)
            break;
        auto ev = top;
        queue_.pop();
        // Cancelled events stay in the heap and are skipped here.
        if (pending_.erase(ev->seq) == 0)
            continue;
        clock_ = ev->fire_time;
        if (pre_dispatch_)
            pre_dispatch_(*ev);
        if (trace_ != nullptr)
            trace_->record(clock_, ev->kind, ev->describe ? ev->describe() : std::string{});
        if (ev->action)
            ev->action();
        ++processed;
    }
    if (!stopped_ && t_end > clock_)
        clock_ = t_end;
    return processed;
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value)
{
    return splitmix64(seed ^ splitmix64(value + 0x632be59bd9b4e019ULL));
}

std::uint64_t hash_string(std::string_view text)
{
    // FNV-1a, then mixed.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(h);
}

namespace {

RngStreams::Engine make_engine(std::uint64_t seed)
{
    std::array<std::uint32_t, 4> words{};
    std::uint64_t a = splitmix64(seed);
    std::uint64_t b = splitmix64(a);
    words[0] = static_cast<std::uint32_t>(a);
    words[1] = static_cast<std::uint32_t>(a >> 32);
    words[2] = static_cast<std::uint32_t>(b);
    words[3] = static_cast<std::uint32_t>(b >> 32);
    std::seed_seq seq(words.begin(), words.end());
    return RngStreams::Engine(seq);
}

} // namespace

RngStreams::RngStreams(std::uint64_t master_seed) : master_(master_seed)
{
    for (std::uint64_t s = 0; s < 4; ++s)
        engines_.push_back(make_engine(hash_combine(master_, s + 1)));
}

RngStreams::Engine RngStreams::derive(Stream stream, std::uint64_t index) const
{
    const auto base = hash_combine(master_, static_cast<std::uint64_t>(stream) + 1);
    return make_engine(hash_combine(base, index + 0x1000));
}

} // namespace mmdc
