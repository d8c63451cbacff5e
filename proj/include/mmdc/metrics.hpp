#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmdc/dataplane.hpp"

namespace mmdc {

enum class FileOutcome { Completed, Failed, InFlight };

struct FileRecord {
    std::uint64_t file_id = 0;
    Bytes size = 0;
    double created = 0.0;
    double deadline = 0.0;
    std::optional<double> completed;
    FileOutcome outcome = FileOutcome::InFlight;

    [[nodiscard]] std::optional<double> completion_time() const
    {
        if (!completed)
            return std::nullopt;
        return *completed - created;
    }
};

std::string_view to_string(FileOutcome outcome);

/// Classifies a file at the end of a run. A file fails iff it is not complete
/// by its deadline; files whose deadline lies beyond the run end and that are
/// still incomplete are in flight.
FileOutcome classify_file(const FileJob& job, double run_end);

struct RunMetrics {
    std::uint64_t handover_trials = 0;
    std::uint64_t path_switches = 0;
    std::uint64_t fallback_events = 0;
    std::uint64_t handover_aborts = 0;
    double sim_duration = 0.0;
    std::vector<FileRecord> files;
    ByteCounters bytes;
    Bytes residual_bytes = 0;
};

/// Handover trials per second.
double handover_rate(const RunMetrics& m);
double path_switch_rate(const RunMetrics& m);

/// Failed files over finished files. In-flight files are left out unless
/// count_in_flight is set, in which case they count as failures.
double download_failure_ratio(const RunMetrics& m, bool count_in_flight = false);

struct BoxStats {
    std::size_t count = 0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    std::size_t outliers = 0;
};

/// Five-number summary with linearly interpolated quartiles; outliers lie more
/// than 1.5 IQR outside [q1, q3]. Empty input gives a zero summary.
BoxStats box_stats(std::vector<double> values);

/// Box statistics of completion times (seconds) of completed files.
BoxStats completion_time_stats(const RunMetrics& m);

/// Fields of one summary CSV row besides the metrics themselves.
struct RunLabel {
    std::uint64_t seed = 0;
    std::string scheme;
    double density = 0.0;
    Bytes file_size = 0;
};

std::string summary_csv_header();
std::string summary_csv_row(const RunLabel& label, const RunMetrics& m, bool count_in_flight = false);
/// Row for a run that threw; metric columns carry the error marker.
std::string summary_csv_error_row(const RunLabel& label, std::string_view message);

std::string files_csv_header();
std::string files_csv_row(const FileRecord& f);

} // namespace mmdc
