#include "mmdc/dataplane.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <iterator>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace mmdc {

// ---------------------------------------------------------------------------
// IntervalSet

void IntervalSet::insert(SeqRange r)
{
    if (r.empty())
        return;
    auto it = ranges_.upper_bound(r.begin);
    if (it != ranges_.begin()) {
        auto prev = std::prev(it);
        if (prev->second >= r.begin) {
            r.begin = prev->first;
            r.end = std::max(r.end, prev->second);
            it = ranges_.erase(prev);
        }
    }
    while (it != ranges_.end() && it->first <= r.end) {
        r.end = std::max(r.end, it->second);
        it = ranges_.erase(it);
    }
    ranges_.emplace(r.begin, r.end);
}

std::vector<SeqRange> IntervalSet::uncovered(SeqRange r) const
{
    std::vector<SeqRange> out;
    if (r.empty())
        return out;
    Seq cur = r.begin;
    auto it = ranges_.upper_bound(cur);
    if (it != ranges_.begin()) {
        auto prev = std::prev(it);
        if (prev->second > cur)
            cur = prev->second;
    }
    for (; it != ranges_.end() && it->first < r.end && cur < r.end; ++it) {
        if (it->first > cur)
            out.push_back({cur, std::min(it->first, r.end)});
        cur = std::max(cur, it->second);
    }
    if (cur < r.end)
        out.push_back({cur, r.end});
    return out;
}

bool IntervalSet::contains(Seq s) const
{
    auto it = ranges_.upper_bound(s);
    if (it == ranges_.begin())
        return false;
    return s < std::prev(it)->second;
}

std::optional<SeqRange> IntervalSet::first() const
{
    if (ranges_.empty())
        return std::nullopt;
    return SeqRange{ranges_.begin()->first, ranges_.begin()->second};
}

void IntervalSet::erase_first()
{
    if (!ranges_.empty())
        ranges_.erase(ranges_.begin());
}

// ---------------------------------------------------------------------------
// FileTable

FileJob& FileTable::add(Bytes size, double created, double deadline)
{
    if (size == 0)
        throw std::invalid_argument("file size must be positive");
    FileJob f;
    f.file_id = files_.size();
    f.size = size;
    f.created = created;
    f.deadline = deadline;
    f.first_seq = next_seq_;
    f.pdu_count = (size + pdu_size_ - 1) / pdu_size_;
    next_seq_ += f.pdu_count;
    files_.push_back(f);
    return files_.back();
}

std::size_t FileTable::file_index(Seq s) const
{
    auto it = std::partition_point(files_.begin(), files_.end(), [s](const FileJob& f) { return f.first_seq <= s; });
    assert(it != files_.begin());
    return static_cast<std::size_t>(std::distance(files_.begin(), it)) - 1;
}

Bytes FileTable::pdu_bytes(Seq s) const
{
    const auto& f = files_[file_index(s)];
    if (s + 1 == f.first_seq + f.pdu_count)
        return f.size - (f.pdu_count - 1) * pdu_size_;
    return pdu_size_;
}

namespace {

template <typename Fn>
void for_each_file_part(const std::vector<FileJob>& files, std::size_t first_index, SeqRange r, Fn&& fn)
{
    for (std::size_t i = first_index; i < files.size() && r.begin < r.end; ++i) {
        const auto& f = files[i];
        const Seq file_end = f.first_seq + f.pdu_count;
        const Seq part_end = std::min(r.end, file_end);
        if (part_end > r.begin)
            fn(i, SeqRange{r.begin, part_end}, part_end == file_end);
        r.begin = part_end;
    }
}

} // namespace

Bytes FileTable::bytes_of(SeqRange r) const
{
    if (r.empty())
        return 0;
    Bytes total = 0;
    for_each_file_part(files_, file_index(r.begin), r, [&](std::size_t i, SeqRange part, bool has_last) {
        const auto& f = files_[i];
        total += part.size() * pdu_size_;
        if (has_last)
            total -= pdu_size_ - (f.size - (f.pdu_count - 1) * pdu_size_);
    });
    return total;
}

std::vector<std::size_t> FileTable::credit(SeqRange r, double now)
{
    std::vector<std::size_t> done;
    if (r.empty())
        return done;
    for_each_file_part(files_, file_index(r.begin), r, [&](std::size_t i, SeqRange part, bool has_last) {
        auto& f = files_[i];
        Bytes b = part.size() * pdu_size_;
        if (has_last)
            b -= pdu_size_ - (f.size - (f.pdu_count - 1) * pdu_size_);
        f.delivered_bytes += b;
        assert(f.delivered_bytes <= f.size);
        if (f.delivered_bytes == f.size && !f.completed) {
            f.completed = now;
            done.push_back(i);
        }
    });
    return done;
}

// ---------------------------------------------------------------------------
// Chunk / RlcBuffer

std::pair<Chunk, Chunk> Chunk::split(Seq n) const
{
    assert(n <= count());
    Chunk head = *this;
    Chunk rest = *this;
    head.end = begin + n;
    if (n < count())
        head.tail_size = pdu_size;
    rest.begin = begin + n;
    rest.head_sent = 0;
    if (n == 0) {
        head.head_sent = 0;
        rest.head_sent = head_sent;
    }
    return {head, rest};
}

Chunk make_chunk(const FileTable& files, SeqRange r)
{
    assert(!r.empty());
    assert(files.file_index(r.begin) == files.file_index(r.end - 1));
    Chunk c;
    c.begin = r.begin;
    c.end = r.end;
    c.pdu_size = files.pdu_size();
    c.tail_size = files.pdu_bytes(r.end - 1);
    return c;
}

void RlcBuffer::insert_ordered(const Chunk& chunk)
{
    if (queue_.empty() || queue_.back().begin < chunk.begin) {
        queue_.push_back(chunk);
        return;
    }
    // Late (forwarded) data goes ahead of newer data, but never in front of a
    // PDU that is partly on the air.
    auto it = std::upper_bound(queue_.begin(), queue_.end(), chunk.begin,
                               [](Seq s, const Chunk& c) { return s < c.begin; });
    if (it == queue_.begin() && queue_.front().head_sent > 0)
        ++it;
    queue_.insert(it, chunk);
}

std::optional<Chunk> RlcBuffer::enqueue(Chunk chunk)
{
    if (chunk.count() == 0)
        return std::nullopt;
    const Bytes free = capacity_ - queued_;
    if (chunk.remaining() <= free) {
        queued_ += chunk.remaining();
        insert_ordered(chunk);
        return std::nullopt;
    }
    // Only chunks that overflow reach here, so at most count-1 full PDUs fit.
    Seq fit = (free + chunk.head_sent) / chunk.pdu_size;
    fit = std::min<Seq>(fit, chunk.count() - 1);
    auto [head, rest] = chunk.split(fit);
    if (fit > 0) {
        queued_ += head.remaining();
        insert_ordered(head);
    }
    dropped_ += rest.bytes();
    return rest;
}

ServeResult RlcBuffer::serve(Bytes budget, std::size_t max_runs)
{
    ServeResult res;
    while (budget > 0 && !queue_.empty() && res.completed.size() < max_runs) {
        Chunk& c = queue_.front();
        const Bytes first_left = c.pdu_at(c.begin) - c.head_sent;
        if (budget < first_left) {
            c.head_sent += budget;
            res.bytes_sent += budget;
            queued_ -= budget;
            budget = 0;
            break;
        }
        Bytes sent = first_left;
        budget -= first_left;
        Seq done = 1;
        if (c.count() >= 2) {
            const Seq middle = c.count() - 2;
            const Seq take = std::min<Seq>(budget / c.pdu_size, middle);
            done += take;
            budget -= take * c.pdu_size;
            sent += take * c.pdu_size;
            if (take == middle && budget >= c.tail_size) {
                done += 1;
                budget -= c.tail_size;
                sent += c.tail_size;
            }
        }
        res.bytes_sent += sent;
        queued_ -= sent;
        if (done == c.count()) {
            Chunk finished = c;
            finished.head_sent = 0;
            res.completed.push_back(finished);
            res.sent_at.push_back(res.bytes_sent);
            queue_.pop_front();
            continue;
        }
        auto [head, rest] = c.split(done);
        head.head_sent = 0;
        res.completed.push_back(head);
        res.sent_at.push_back(res.bytes_sent);
        c = rest;
        // The loop above stops with less than one PDU of budget left.
        c.head_sent = budget;
        res.bytes_sent += budget;
        queued_ -= budget;
        budget = 0;
    }
    return res;
}

std::optional<Chunk> RlcBuffer::drop_head(Seq n)
{
    if (queue_.empty() || queue_.front().head_sent > 0 || n == 0)
        return std::nullopt;
    Chunk& c = queue_.front();
    if (n >= c.count()) {
        Chunk out = c;
        queued_ -= out.bytes();
        queue_.pop_front();
        return out;
    }
    auto [head, rest] = c.split(n);
    queued_ -= head.bytes();
    c = rest;
    return head;
}

std::deque<Chunk> RlcBuffer::take_all()
{
    std::deque<Chunk> out;
    out.swap(queue_);
    for (auto& c : out)
        c.head_sent = 0;
    queued_ = 0;
    return out;
}

std::vector<Chunk> RlcBuffer::remove_range(SeqRange r)
{
    std::vector<Chunk> removed;
    std::deque<Chunk> kept;
    for (auto& c : queue_) {
        if (c.begin >= r.begin && c.end <= r.end) {
            queued_ -= c.remaining();
            removed.push_back(c);
        } else {
            kept.push_back(c);
        }
    }
    queue_.swap(kept);
    return removed;
}

// ---------------------------------------------------------------------------
// CopyLedger

void CopyLedger::split_at(Seq s)
{
    auto it = segments_.upper_bound(s);
    if (it == segments_.begin())
        return;
    auto prev = std::prev(it);
    if (prev->first < s && s < prev->second.end) {
        const Segment tail{prev->second.end, prev->second.count};
        prev->second.end = s;
        segments_.emplace(s, tail);
    }
}

void CopyLedger::coalesce(SeqRange r)
{
    auto it = segments_.lower_bound(r.begin);
    if (it != segments_.begin())
        it = std::prev(it);
    while (it != segments_.end() && it->first <= r.end) {
        auto next = std::next(it);
        if (next != segments_.end() && it->second.end == next->first && it->second.count == next->second.count) {
            it->second.end = next->second.end;
            segments_.erase(next);
            continue;
        }
        it = next;
    }
}

void CopyLedger::add(SeqRange r)
{
    if (r.empty())
        return;
    split_at(r.begin);
    split_at(r.end);
    Seq cur = r.begin;
    auto it = segments_.lower_bound(r.begin);
    while (cur < r.end) {
        if (it == segments_.end() || it->first >= r.end) {
            segments_.emplace(cur, Segment{r.end, 1});
            break;
        }
        if (it->first > cur)
            segments_.emplace(cur, Segment{it->first, 1});
        it->second.count += 1;
        cur = it->second.end;
        ++it;
    }
    coalesce(r);
}

std::vector<SeqRange> CopyLedger::remove(SeqRange r)
{
    std::vector<SeqRange> zeroed;
    if (r.empty())
        return zeroed;
    split_at(r.begin);
    split_at(r.end);
    auto it = segments_.lower_bound(r.begin);
    Seq cur = r.begin;
    while (it != segments_.end() && it->first < r.end) {
        if (it->first != cur)
            throw std::logic_error("copy ledger: removing a copy that does not exist");
        cur = it->second.end;
        if (--it->second.count == 0) {
            const SeqRange z{it->first, it->second.end};
            if (!zeroed.empty() && zeroed.back().end == z.begin)
                zeroed.back().end = z.end;
            else
                zeroed.push_back(z);
            it = segments_.erase(it);
        } else {
            ++it;
        }
    }
    if (cur != r.end)
        throw std::logic_error("copy ledger: removing a copy that does not exist");
    coalesce(r);
    return zeroed;
}

std::vector<SeqRange> CopyLedger::live_parts(SeqRange r) const
{
    std::vector<SeqRange> out;
    auto it = segments_.upper_bound(r.begin);
    if (it != segments_.begin())
        it = std::prev(it);
    for (; it != segments_.end() && it->first < r.end; ++it) {
        const Seq b = std::max(it->first, r.begin);
        const Seq e = std::min(it->second.end, r.end);
        if (b < e)
            out.push_back({b, e});
    }
    return out;
}

int CopyLedger::min_count(SeqRange r) const
{
    if (r.empty())
        return 0;
    auto it = segments_.upper_bound(r.begin);
    if (it != segments_.begin())
        it = std::prev(it);
    Seq cur = r.begin;
    int best = std::numeric_limits<int>::max();
    for (; it != segments_.end() && it->first < r.end; ++it) {
        if (it->second.end <= cur)
            continue;
        if (it->first > cur)
            return 0;
        best = std::min(best, it->second.count);
        cur = it->second.end;
        if (cur >= r.end)
            break;
    }
    return cur >= r.end ? best : 0;
}

std::vector<SeqRange> CopyLedger::live() const
{
    std::vector<SeqRange> out;
    for (const auto& [b, seg] : segments_)
        out.push_back({b, seg.end});
    return out;
}

// ---------------------------------------------------------------------------
// PdcpReceiver

PdcpOutcome PdcpReceiver::receive(SeqRange r)
{
    PdcpOutcome out;
    Seq fresh = 0;
    if (reordering_) {
        for (const auto& p : done_.uncovered(r)) {
            for (const auto& q : held_.uncovered(p)) {
                out.accepted.push_back(q);
                fresh += q.size();
            }
        }
        for (const auto& q : out.accepted)
            held_.insert(q);
        out.released = release_in_order();
    } else {
        out.accepted = done_.uncovered(r);
        for (const auto& q : out.accepted) {
            done_.insert(q);
            fresh += q.size();
        }
        out.released = out.accepted;
    }
    out.duplicates = r.size() - fresh;
    return out;
}

std::vector<SeqRange> PdcpReceiver::release_in_order()
{
    std::vector<SeqRange> released;
    while (auto f = held_.first()) {
        if (f->begin != next_expected_)
            break;
        released.push_back(*f);
        done_.insert(*f);
        next_expected_ = f->end;
        held_.erase_first();
    }
    return released;
}

bool PdcpReceiver::has_gap() const
{
    return reordering_ && !held_.empty();
}

std::pair<SeqRange, std::vector<SeqRange>> PdcpReceiver::skip_gap()
{
    if (!has_gap())
        return {};
    const SeqRange skipped{next_expected_, held_.first()->begin};
    done_.insert(skipped);
    next_expected_ = skipped.end;
    return {skipped, release_in_order()};
}

std::vector<SeqRange> PdcpReceiver::unhandled(SeqRange r) const
{
    std::vector<SeqRange> out;
    for (const auto& p : done_.uncovered(r))
        for (const auto& q : held_.uncovered(p))
            out.push_back(q);
    return out;
}

double link_rate_bps(const LinkReport& report, double bandwidth_hz, const RateParams& params)
{
    if (report.link_class == LinkClass::Outage)
        return 0.0;
    const double se = std::log2(1.0 + db_to_linear(report.sinr_db));
    return params.efficiency * bandwidth_hz * std::min(se, params.max_spectral_eff);
}

// ---------------------------------------------------------------------------
// DataPlane

DataPlane::DataPlane(Scheduler& scheduler, DataPlaneParams params, int node_count, int anchor_id)
    : scheduler_(scheduler), params_(params), anchor_id_(anchor_id), files_(params.pdu_size),
      inbound_(static_cast<std::size_t>(node_count), 0), pdcp_(params.reordering)
{
    for (int i = 0; i < node_count; ++i)
        buffers_.emplace_back(i, params_.rlc_capacity);
}

std::size_t DataPlane::generate_file(Bytes size, double deadline_offset)
{
    const double now = scheduler_.now();
    const auto& f = files_.add(size, now, now + deadline_offset);
    const std::size_t index = files_.files().size() - 1;
    const SeqRange r{f.first_seq, f.first_seq + f.pdu_count};
    backlog_.push_back(make_chunk(files_, r));
    ledger_.add(r);
    counters_.generated += size;
    if (params_.abort_on_deadline)
        scheduler_.schedule(
            f.deadline, EventKind::Deadline, [this, index] { on_deadline(index); },
            [index] { return fmt::format("file={}", index); });
    return index;
}

void DataPlane::serve(const std::vector<int>& transmitters, const std::vector<double>& rate_bps, double dt)
{
    if (dt <= 0.0)
        return;
    const double start = scheduler_.now() - dt;
    for (int node : transmitters) {
        const double rate = rate_bps.at(static_cast<std::size_t>(node));
        if (rate <= 0.0)
            continue;
        auto& buf = buffers_.at(static_cast<std::size_t>(node));
        auto budget = static_cast<Bytes>(std::floor(rate * dt / 8.0));
        Bytes used = 0;
        while (budget > 0 && buf.queued_bytes() > 0) {
            prune_head(node);
            auto res = buf.serve(budget, 1);
            if (res.bytes_sent == 0)
                break;
            budget -= res.bytes_sent;
            counters_.transmitted += res.bytes_sent;
            for (std::size_t k = 0; k < res.completed.size(); ++k)
                on_receive(res.completed[k].range(),
                           start + static_cast<double>(used + res.sent_at[k]) * 8.0 / rate);
            used += res.bytes_sent;
        }
    }
}

// The UE's PDCP status reports tell the SN what it no longer needs to send.
void DataPlane::prune_head(int node)
{
    auto& buf = buffers_.at(static_cast<std::size_t>(node));
    while (!buf.queue().empty() && buf.queue().front().head_sent == 0) {
        const Chunk& head = buf.queue().front();
        const auto missing = pdcp_.unhandled(head.range());
        const Seq n = missing.empty() ? head.count() : missing.front().begin - head.begin;
        if (n == 0)
            return;
        if (auto dropped = buf.drop_head(n))
            drop_copy(dropped->range());
        if (!missing.empty())
            return;
    }
}

void DataPlane::forward(int from, int to)
{
    if (from == to || from < 0 || to < 0)
        return;
    auto chunks = buffers_.at(static_cast<std::size_t>(from)).take_all();
    if (chunks.empty())
        return;
    std::vector<Chunk> batch(chunks.begin(), chunks.end());
    for (const auto& c : batch)
        counters_.x2_forwarded += c.bytes();
    send_x2(to, std::move(batch));
}

bool DataPlane::held_elsewhere(SeqRange r) const
{
    return ledger_.min_count(r) >= 2;
}

void DataPlane::purge(int node)
{
    std::vector<Chunk> keep;
    for (const auto& c : buffers_.at(static_cast<std::size_t>(node)).take_all()) {
        if (held_elsewhere(c.range()) || primary_ < 0 || primary_ == node)
            drop_copy(c.range());
        else
            keep.push_back(c);
    }
    if (!keep.empty()) {
        for (const auto& c : keep)
            counters_.x2_forwarded += c.bytes();
        send_x2(primary_, std::move(keep));
    }
}

void DataPlane::replicate(int from, int keep, int copy_to)
{
    auto queued = buffers_.at(static_cast<std::size_t>(from)).take_all();
    if (queued.empty())
        return;
    std::vector<Chunk> chunks(queued.begin(), queued.end());
    for (const auto& c : chunks) {
        ledger_.add(c.range());
        counters_.pd_copies += c.bytes();
        counters_.x2_forwarded += c.bytes();
    }
    if (keep == from) {
        for (const auto& c : chunks)
            enqueue_at(from, c);
    } else {
        for (const auto& c : chunks)
            counters_.x2_forwarded += c.bytes();
        send_x2(keep, chunks);
    }
    send_x2(copy_to, std::move(chunks));
}

void DataPlane::top_up(int primary, std::optional<int> duplicate)
{
    if (primary < 0)
        return;
    const auto& buf = buffers_.at(static_cast<std::size_t>(primary));
    // Original data in flight to nodes that left the plan will be rerouted here too.
    Bytes rerouted = 0;
    for (const auto& [id, flight] : flights_) {
        if (flight.dest == primary || is_active(flight.dest))
            continue;
        for (const auto& c : flight.chunks)
            if (!held_elsewhere(c.range()))
                rerouted += c.remaining();
    }
    const Bytes committed = buf.queued_bytes() + inbound_[static_cast<std::size_t>(primary)] + rerouted;
    Bytes room = committed < buf.capacity() ? buf.capacity() - committed : 0;

    std::vector<Chunk> batch;
    while (room > 0 && !backlog_.empty()) {
        Chunk& c = backlog_.front();
        if (c.remaining() <= room) {
            room -= c.remaining();
            batch.push_back(c);
            backlog_.pop_front();
            continue;
        }
        const Seq n = std::min<Seq>(room / c.pdu_size, c.count() - 1);
        if (n == 0)
            break;
        auto [head, rest] = c.split(n);
        batch.push_back(head);
        c = rest;
        break;
    }
    if (batch.empty())
        return;

    std::vector<Chunk> copies;
    if (duplicate && *duplicate != primary) {
        for (const auto& c : batch) {
            ledger_.add(c.range());
            counters_.pd_copies += c.bytes();
            copies.push_back(c);
        }
    }
    auto push = [this](int node, std::vector<Chunk> chunks) {
        if (node == anchor_id_) {
            for (const auto& c : chunks)
                enqueue_at(node, c);
        } else {
            send_x2(node, std::move(chunks));
        }
    };
    push(primary, std::move(batch));
    if (!copies.empty())
        push(*duplicate, std::move(copies));
}

void DataPlane::set_active(std::vector<int> nodes, int primary)
{
    active_ = std::move(nodes);
    primary_ = primary;
}

bool DataPlane::is_active(int node) const
{
    return node == primary_ || std::find(active_.begin(), active_.end(), node) != active_.end();
}

void DataPlane::send_x2(int dest, std::vector<Chunk> chunks)
{
    Bytes total = 0;
    for (const auto& c : chunks)
        total += c.remaining();
    inbound_[static_cast<std::size_t>(dest)] += total;
    const auto id = next_flight_++;
    flights_.emplace(id, Flight{dest, std::move(chunks)});
    scheduler_.schedule_in(
        params_.x2_delay, EventKind::X2Delivery, [this, id] { deliver_flight(id); },
        [dest, total] { return fmt::format("dest={} bytes={}", dest, total); });
}

void DataPlane::deliver_flight(std::uint64_t flight_id)
{
    auto node = flights_.extract(flight_id);
    if (node.empty())
        return;
    Flight flight = std::move(node.mapped());
    const auto dest = static_cast<std::size_t>(flight.dest);
    std::vector<Chunk> reroute;
    for (const auto& c : flight.chunks) {
        inbound_[dest] -= c.remaining();
        const bool abandoned = files_.files()[files_.file_index(c.begin)].abandoned;
        // The MN knows the PDCP status; data the UE already has is not queued again.
        if (abandoned || pdcp_.unhandled(c.range()).empty()) {
            drop_copy(c.range());
            continue;
        }
        if (!is_active(flight.dest)) {
            if (held_elsewhere(c.range()) || primary_ < 0 || primary_ == flight.dest)
                drop_copy(c.range());
            else
                reroute.push_back(c);
            continue;
        }
        enqueue_at(flight.dest, c);
    }
    if (!reroute.empty()) {
        for (const auto& c : reroute)
            counters_.x2_forwarded += c.bytes();
        send_x2(primary_, std::move(reroute));
    }
}

void DataPlane::enqueue_at(int node, Chunk chunk)
{
    auto dropped = buffers_.at(static_cast<std::size_t>(node)).enqueue(chunk);
    if (dropped) {
        counters_.tail_dropped += dropped->bytes();
        drop_copy(dropped->range());
    }
}

void DataPlane::drop_copy(SeqRange r)
{
    for (const auto& z : ledger_.remove(r))
        for (const auto& u : pdcp_.unhandled(z))
            counters_.lost += files_.bytes_of(u);
}

void DataPlane::on_receive(SeqRange r, double at)
{
    auto out = pdcp_.receive(r);
    counters_.duplicate_pdus += out.duplicates;
    drop_copy(r);
    release(out.released, at);
    arm_reorder_timer();
}

void DataPlane::release(const std::vector<SeqRange>& ranges, double at)
{
    for (const auto& r : ranges) {
        const auto fresh = app_seen_.uncovered(r);
        if (fresh.size() != 1 || fresh.front() != r)
            ++counters_.delivered_twice;
        app_seen_.insert(r);
        counters_.delivered += files_.bytes_of(r);
        for (auto idx : files_.credit(r, at))
            completions_.push_back(idx);
    }
}

void DataPlane::arm_reorder_timer()
{
    if (!pdcp_.reordering())
        return;
    if (!pdcp_.has_gap()) {
        scheduler_.cancel(reorder_timer_);
        reorder_timer_ = {};
        return;
    }
    if (scheduler_.is_pending(reorder_timer_))
        return;
    reorder_timer_ = scheduler_.schedule_in(
        params_.reorder_window, EventKind::ReorderTimer,
        [this] {
            reorder_timer_ = {};
            if (!pdcp_.has_gap())
                return;
            auto [skipped, released] = pdcp_.skip_gap();
            // Bytes still queued somewhere will be discarded on arrival; bytes
            // without copies were counted when their last copy went away.
            for (const auto& part : ledger_.live_parts(skipped)) {
                counters_.lost += files_.bytes_of(part);
                counters_.reorder_skipped += files_.bytes_of(part);
            }
            release(released, scheduler_.now());
            arm_reorder_timer();
        },
        [this] { return fmt::format("next_expected={}", pdcp_.next_expected()); });
}

void DataPlane::on_deadline(std::size_t file_index)
{
    auto& f = files_.files()[file_index];
    if (f.completed)
        return;
    f.abandoned = true;
    const SeqRange r{f.first_seq, f.first_seq + f.pdu_count};
    std::deque<Chunk> kept;
    std::vector<Chunk> removed;
    for (const auto& c : backlog_) {
        if (c.begin >= r.begin && c.end <= r.end)
            removed.push_back(c);
        else
            kept.push_back(c);
    }
    backlog_.swap(kept);
    for (auto& buf : buffers_)
        for (const auto& c : buf.remove_range(r))
            removed.push_back(c);
    for (const auto& c : removed)
        drop_copy(c.range());
}

Bytes DataPlane::residual_bytes() const
{
    Bytes total = 0;
    for (const auto& [b, e] : pdcp_.held().ranges())
        total += files_.bytes_of({b, e});
    for (const auto& seg : ledger_.live())
        for (const auto& u : pdcp_.unhandled(seg))
            total += files_.bytes_of(u);
    return total;
}

Bytes DataPlane::backlog_bytes() const
{
    Bytes total = 0;
    for (const auto& c : backlog_)
        total += c.remaining();
    return total;
}

std::vector<std::size_t> DataPlane::take_completions()
{
    std::vector<std::size_t> out;
    out.swap(completions_);
    return out;
}

} // namespace mmdc
