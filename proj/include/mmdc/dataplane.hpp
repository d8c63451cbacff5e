#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "mmdc/channel.hpp"
#include "mmdc/engine.hpp"

namespace mmdc {

using Seq = std::uint64_t;
using Bytes = std::uint64_t;

/// Half-open range of PDCP sequence numbers.
struct SeqRange {
    Seq begin = 0;
    Seq end = 0;

    [[nodiscard]] Seq size() const { return end - begin; }
    [[nodiscard]] bool empty() const { return end <= begin; }
    friend bool operator==(const SeqRange&, const SeqRange&) = default;
};

/// Sorted, coalesced set of disjoint sequence ranges.
class IntervalSet {
  public:
    void insert(SeqRange r);
    /// Parts of r not covered by this set.
    [[nodiscard]] std::vector<SeqRange> uncovered(SeqRange r) const;
    [[nodiscard]] bool contains(Seq s) const;
    [[nodiscard]] bool empty() const { return ranges_.empty(); }
    [[nodiscard]] std::optional<SeqRange> first() const;
    void erase_first();
    [[nodiscard]] const std::map<Seq, Seq>& ranges() const { return ranges_; }

  private:
    std::map<Seq, Seq> ranges_;
};

struct FileJob {
    std::uint64_t file_id = 0;
    Bytes size = 0;
    double created = 0.0;
    double deadline = 0.0;
    Bytes delivered_bytes = 0;
    std::optional<double> completed;
    Seq first_seq = 0;
    Seq pdu_count = 0;
    bool abandoned = false;
};

/// Maps the global PDCP sequence space onto files. Every PDU is pdu_size bytes
/// except the last PDU of each file.
class FileTable {
  public:
    explicit FileTable(Bytes pdu_size) : pdu_size_(pdu_size) {}

    FileJob& add(Bytes size, double created, double deadline);

    [[nodiscard]] Bytes pdu_size() const { return pdu_size_; }
    [[nodiscard]] Seq next_seq() const { return next_seq_; }
    [[nodiscard]] const std::vector<FileJob>& files() const { return files_; }
    [[nodiscard]] std::vector<FileJob>& files() { return files_; }

    [[nodiscard]] std::size_t file_index(Seq s) const;
    [[nodiscard]] Bytes pdu_bytes(Seq s) const;
    [[nodiscard]] Bytes bytes_of(SeqRange r) const;

    /// Credits released bytes to their files; returns indices of files completed now.
    std::vector<std::size_t> credit(SeqRange r, double now);

  private:
    Bytes pdu_size_;
    Seq next_seq_ = 0;
    std::vector<FileJob> files_;
};

/// A run of whole PDUs of one file. head_sent counts bytes of the first PDU
/// already transmitted.
struct Chunk {
    Seq begin = 0;
    Seq end = 0;
    Bytes pdu_size = 0;
    Bytes tail_size = 0; // size of the PDU end-1
    Bytes head_sent = 0;

    [[nodiscard]] Seq count() const { return end - begin; }
    [[nodiscard]] Bytes pdu_at(Seq s) const { return s + 1 == end ? tail_size : pdu_size; }
    [[nodiscard]] Bytes bytes() const { return count() == 0 ? 0 : (count() - 1) * pdu_size + tail_size; }
    [[nodiscard]] Bytes remaining() const { return bytes() - head_sent; }
    [[nodiscard]] SeqRange range() const { return {begin, end}; }
    /// Splits off the first n PDUs.
    [[nodiscard]] std::pair<Chunk, Chunk> split(Seq n) const;
};

Chunk make_chunk(const FileTable& files, SeqRange r);

struct ServeResult {
    Bytes bytes_sent = 0;
    std::vector<Chunk> completed; // PDUs fully transmitted, as runs
    std::vector<Bytes> sent_at;   // bytes_sent when each completed run finished
};

/// RLC-AM-lite transmit buffer with tail drop at capacity.
class RlcBuffer {
  public:
    RlcBuffer(int sn_id, Bytes capacity) : sn_id_(sn_id), capacity_(capacity) {}

    /// Admits the whole PDUs that fit, in sequence order; returns the dropped
    /// remainder, if any.
    std::optional<Chunk> enqueue(Chunk chunk);

    /// Transmits up to budget bytes in order; partial PDUs carry over. Stops
    /// after max_runs queued runs have been finished.
    ServeResult serve(Bytes budget, std::size_t max_runs = SIZE_MAX);

    /// Drops the head run, or its first n PDUs, provided nothing of it is on the air.
    std::optional<Chunk> drop_head(Seq n);

    /// Empties the buffer. Partly sent PDUs are handed over whole.
    std::deque<Chunk> take_all();

    /// Removes every chunk that belongs to seq range r.
    std::vector<Chunk> remove_range(SeqRange r);

    [[nodiscard]] int sn_id() const { return sn_id_; }
    [[nodiscard]] Bytes capacity() const { return capacity_; }
    [[nodiscard]] Bytes queued_bytes() const { return queued_; }
    [[nodiscard]] Bytes bytes_dropped() const { return dropped_; }
    [[nodiscard]] const std::deque<Chunk>& queue() const { return queue_; }

  private:
    void insert_ordered(const Chunk& chunk);

    int sn_id_;
    Bytes capacity_;
    Bytes queued_ = 0; // unsent bytes
    Bytes dropped_ = 0;
    std::deque<Chunk> queue_;
};

/// Counts live copies of every sequence number (MN backlog, X2 in flight, RLC
/// queues). Returns the ranges whose count reaches zero.
class CopyLedger {
  public:
    void add(SeqRange r);
    std::vector<SeqRange> remove(SeqRange r);
    [[nodiscard]] std::vector<SeqRange> live_parts(SeqRange r) const;
    /// Smallest copy count over r (zero if any part has no copy).
    [[nodiscard]] int min_count(SeqRange r) const;
    /// All ranges with at least one copy.
    [[nodiscard]] std::vector<SeqRange> live() const;

  private:
    struct Segment {
        Seq end;
        int count;
    };
    void split_at(Seq s);
    void coalesce(SeqRange r);
    std::map<Seq, Segment> segments_;
};

struct PdcpOutcome {
    std::vector<SeqRange> accepted;   // new sequence numbers
    std::vector<SeqRange> released;   // handed to the application, in order
    Seq duplicates = 0;
};

/// UE-side PDCP: duplicate suppression and optional in-order delivery.
class PdcpReceiver {
  public:
    explicit PdcpReceiver(bool reordering) : reordering_(reordering) {}

    PdcpOutcome receive(SeqRange r);

    [[nodiscard]] bool has_gap() const;
    /// Gives up on the missing head of the window; returns the skipped range and
    /// whatever becomes releasable.
    std::pair<SeqRange, std::vector<SeqRange>> skip_gap();

    /// Parts of r neither delivered, skipped, nor held for reordering.
    [[nodiscard]] std::vector<SeqRange> unhandled(SeqRange r) const;

    [[nodiscard]] const IntervalSet& held() const { return held_; }
    [[nodiscard]] Seq next_expected() const { return next_expected_; }
    [[nodiscard]] bool reordering() const { return reordering_; }

  private:
    std::vector<SeqRange> release_in_order();

    bool reordering_;
    Seq next_expected_ = 0;
    IntervalSet done_;
    IntervalSet held_;
};

struct RateParams {
    double efficiency = 0.6;         // eta
    double max_spectral_eff = 7.4;   // b/s/Hz
};

/// Shannon-type abstraction; zero in outage.
double link_rate_bps(const LinkReport& report, double bandwidth_hz, const RateParams& params);

struct DataPlaneParams {
    Bytes pdu_size = 1400;
    Bytes rlc_capacity = 100'000'000;
    double x2_delay = 0.001;
    bool reordering = true;
    double reorder_window = 0.050;
    bool abort_on_deadline = false;
};

struct ByteCounters {
    Bytes generated = 0;
    Bytes delivered = 0;     // released in order to the application
    Bytes lost = 0;          // unique bytes that can no longer reach the application
    Bytes pd_copies = 0;     // duplicate copies created for packet duplication
    Bytes tail_dropped = 0;  // raw RLC tail drops, duplicates included
    Bytes x2_forwarded = 0;
    Bytes reorder_skipped = 0; // given up by the reordering timer while still queued
    Bytes transmitted = 0;   // air-interface bytes, duplicates included
    Seq duplicate_pdus = 0;  // suppressed at PDCP
    Seq delivered_twice = 0; // must stay zero
};

/// Node set and plan supplied by the run loop; node ids index the buffers, the
/// anchor (MN) uses a local, zero-delay push.
class DataPlane {
  public:
    DataPlane(Scheduler& scheduler, DataPlaneParams params, int node_count, int anchor_id);

    /// New file at the core; returns its index.
    std::size_t generate_file(Bytes size, double deadline_offset);

    /// Transmits on each listed node over the dt seconds that end now.
    void serve(const std::vector<int>& transmitters, const std::vector<double>& rate_bps, double dt);

    /// Moves everything queued at `from` to `to` over X2.
    void forward(int from, int to);
    /// Empties node: data held elsewhere too is dropped, the rest moves to the primary.
    void purge(int node);

    /// Packet duplication at handover start: from's queue ends up at keep (in
    /// place when keep == from) and a copy goes to copy_to.
    void replicate(int from, int keep, int copy_to);

    /// Tops the push target up to capacity from the core backlog, copying to a
    /// second node when asked.
    void top_up(int primary, std::optional<int> duplicate);

    /// Nodes allowed to hold data; deliveries to other nodes are rerouted to primary.
    void set_active(std::vector<int> nodes, int primary);

    [[nodiscard]] Bytes residual_bytes() const;
    [[nodiscard]] const ByteCounters& counters() const { return counters_; }
    [[nodiscard]] const FileTable& files() const { return files_; }
    [[nodiscard]] const RlcBuffer& buffer(int node) const { return buffers_.at(static_cast<std::size_t>(node)); }
    [[nodiscard]] Bytes backlog_bytes() const;
    [[nodiscard]] const PdcpReceiver& pdcp() const { return pdcp_; }

    /// File indices completed since the last call.
    std::vector<std::size_t> take_completions();

  private:
    struct Flight {
        int dest;
        std::vector<Chunk> chunks;
    };

    void enqueue_at(int node, Chunk chunk);
    void prune_head(int node);
    /// True when another live copy of every PDU in r exists.
    [[nodiscard]] bool held_elsewhere(SeqRange r) const;
    void deliver_flight(std::uint64_t flight_id);
    void send_x2(int dest, std::vector<Chunk> chunks);
    void drop_copy(SeqRange r);
    void on_receive(SeqRange r, double at);
    void release(const std::vector<SeqRange>& ranges, double at);
    void arm_reorder_timer();
    void on_deadline(std::size_t file_index);
    [[nodiscard]] bool is_active(int node) const;

    Scheduler& scheduler_;
    DataPlaneParams params_;
    int anchor_id_;
    FileTable files_;
    std::vector<RlcBuffer> buffers_;
    std::vector<Bytes> inbound_; // bytes in flight towards each node
    std::deque<Chunk> backlog_;
    CopyLedger ledger_;
    PdcpReceiver pdcp_;
    ByteCounters counters_;
    std::map<std::uint64_t, Flight> flights_;
    std::uint64_t next_flight_ = 0;
    EventHandle reorder_timer_;
    std::vector<int> active_;
    int primary_ = -1;
    std::vector<std::size_t> completions_;
    IntervalSet app_seen_;
};

} // namespace mmdc
