#include "mmdc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace mmdc {

std::string_view to_string(FileOutcome outcome)
{
    switch (outcome) {
    case FileOutcome::Completed:
        return "completed";
    case FileOutcome::Failed:
        return "failed";
    case FileOutcome::InFlight:
        return "in_flight";
    }
    return "?";
}

FileOutcome classify_file(const FileJob& job, double run_end)
{
    if (job.completed && *job.completed <= job.deadline)
        return FileOutcome::Completed;
    if (job.completed || job.deadline <= run_end)
        return FileOutcome::Failed;
    return FileOutcome::InFlight;
}

double handover_rate(const RunMetrics& m)
{
    if (!(m.sim_duration > 0.0))
        throw std::invalid_argument("handover rate needs a positive simulation duration");
    return static_cast<double>(m.handover_trials) / m.sim_duration;
}

double path_switch_rate(const RunMetrics& m)
{
    if (!(m.sim_duration > 0.0))
        throw std::invalid_argument("path switch rate needs a positive simulation duration");
    return static_cast<double>(m.path_switches) / m.sim_duration;
}

double download_failure_ratio(const RunMetrics& m, bool count_in_flight)
{
    if (m.files.empty())
        throw std::invalid_argument("failure ratio needs at least one file");
    std::size_t failed = 0;
    std::size_t total = 0;
    for (const auto& f : m.files) {
        switch (f.outcome) {
        case FileOutcome::Completed:
            ++total;
            break;
        case FileOutcome::Failed:
            ++failed;
            ++total;
            break;
        case FileOutcome::InFlight:
            if (count_in_flight) {
                ++failed;
                ++total;
            }
            break;
        }
    }
    if (total == 0)
        return 0.0;
    return static_cast<double>(failed) / static_cast<double>(total);
}

namespace {

double quantile_sorted(const std::vector<double>& v, double p)
{
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

} // namespace

BoxStats box_stats(std::vector<double> values)
{
    BoxStats s;
    if (values.empty())
        return s;
    std::sort(values.begin(), values.end());
    s.count = values.size();
    s.min = values.front();
    s.max = values.back();
    s.q1 = quantile_sorted(values, 0.25);
    s.median = quantile_sorted(values, 0.5);
    s.q3 = quantile_sorted(values, 0.75);
    const double iqr = s.q3 - s.q1;
    const double lo = s.q1 - 1.5 * iqr;
    const double hi = s.q3 + 1.5 * iqr;
    s.outliers = static_cast<std::size_t>(
        std::count_if(values.begin(), values.end(), [&](double x) { return x < lo || x > hi; }));
    return s;
}

BoxStats completion_time_stats(const RunMetrics& m)
{
    std::vector<double> times;
    for (const auto& f : m.files)
        if (auto t = f.completion_time())
            times.push_back(*t);
    return box_stats(std::move(times));
}

std::string summary_csv_header()
{
    return "seed,scheme,density,file_size,handover_rate,path_switch_rate,fallback_count,failure_ratio,"
           "files_total,files_failed,ct_min,ct_q1,ct_median,ct_q3,ct_max,ct_outliers,status";
}

std::string summary_csv_row(const RunLabel& label, const RunMetrics& m, bool count_in_flight)
{
    std::size_t failed = 0;
    std::size_t total = 0;
    for (const auto& f : m.files) {
        const bool in_flight = f.outcome == FileOutcome::InFlight;
        if (in_flight && !count_in_flight)
            continue;
        ++total;
        if (f.outcome != FileOutcome::Completed)
            ++failed;
    }
    const auto ct = completion_time_stats(m);
    return fmt::format("{},{},{},{},{:.6f},{:.6f},{},{:.6f},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{},ok",
                       label.seed, label.scheme, label.density, label.file_size, handover_rate(m),
                       path_switch_rate(m), m.fallback_events,
                       m.files.empty() ? 0.0 : download_failure_ratio(m, count_in_flight), total, failed, ct.min,
                       ct.q1, ct.median, ct.q3, ct.max, ct.outliers);
}

std::string summary_csv_error_row(const RunLabel& label, std::string_view message)
{
    std::string clean(message);
    std::replace(clean.begin(), clean.end(), ',', ';');
    std::replace(clean.begin(), clean.end(), '\n', ' ');
    return fmt::format("{},{},{},{},,,,,,,,,,,,,error: {}", label.seed, label.scheme, label.density, label.file_size,
                       clean);
}

std::string files_csv_header()
{
    return "file_id,size,created,deadline,outcome,completion_time";
}

std::string files_csv_row(const FileRecord& f)
{
    const auto ct = f.completion_time();
    return fmt::format("{},{},{:.6f},{:.6f},{},{}", f.file_id, f.size, f.created, f.deadline, to_string(f.outcome),
                       ct ? fmt::format("{:.9f}", *ct) : std::string{});
}

} // namespace mmdc
