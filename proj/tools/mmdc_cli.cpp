// Command-line front end: single runs and parameter sweeps.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mmdc/config.hpp"
#include "mmdc/metrics.hpp"
#include "mmdc/simulation.hpp"

namespace fs = std::filesystem;

namespace {

// Write to a temporary sibling, then rename over the target.
void write_atomic(const fs::path& path, const std::string& content)
{
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
        out << content;
        out.flush();
        if (!out)
            throw std::runtime_error(fmt::format("write failed for '{}'", tmp.string()));
    }
    fs::rename(tmp, path);
}

fs::path resolve_output_dir(const std::string& flag, const std::string& fallback)
{
    if (!flag.empty())
        return flag;
    if (const char* env = std::getenv("MMDC_OUTPUT_DIR"); env != nullptr && *env != '\0')
        return env;
    return fallback;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<double> duration,
            std::optional<std::string> scheme, const std::string& out_flag, bool trace)
{
    auto config = mmdc::load_config(config_path);
    if (seed)
        config.seed = *seed;
    if (duration)
        config.duration = *duration;
    if (scheme)
        config.scheme = *scheme;
    mmdc::validate(config);

    const fs::path out_dir = resolve_output_dir(out_flag, "out");
    fs::create_directories(out_dir);

    std::ostringstream trace_buf;
    mmdc::Simulation sim(config, trace ? &trace_buf : nullptr);
    const auto metrics = sim.run();

    const mmdc::RunLabel label{config.seed, config.scheme, config.blockage_density, config.file_size};
    const auto row = mmdc::summary_csv_row(label, metrics, config.count_in_flight_as_failed);
    write_atomic(out_dir / "summary.csv", mmdc::summary_csv_header() + "\n" + row + "\n");

    std::string files = mmdc::files_csv_header() + "\n";
    for (const auto& f : metrics.files)
        files += mmdc::files_csv_row(f) + "\n";
    write_atomic(out_dir / "files.csv", files);

    std::ostringstream topo;
    mmdc::write_topology_csv(topo, sim.nodes());
    write_atomic(out_dir / "topology.csv", topo.str());
    std::ostringstream blocks;
    mmdc::write_field_csv(blocks, sim.field());
    write_atomic(out_dir / "blockages.csv", blocks.str());
    write_atomic(out_dir / "config.yaml", mmdc::serialize_config(config));
    if (trace)
        write_atomic(out_dir / "trace.tsv", trace_buf.str());

    std::cout << mmdc::summary_csv_header() << '\n' << row << '\n';
    return 0;
}

int cmd_sweep(const std::string& spec_path, std::optional<std::uint64_t> global_seed, std::optional<double> duration,
              std::optional<unsigned> threads, const std::string& out_flag)
{
    auto spec = mmdc::load_sweep(spec_path);
    if (global_seed)
        spec.global_seed = *global_seed;
    if (duration) {
        spec.base.duration = *duration;
        mmdc::validate(spec.base);
    }
    const fs::path out_dir = resolve_output_dir(out_flag, spec.output_dir);
    fs::create_directories(out_dir);

    const auto results = mmdc::run_sweep(spec, threads.value_or(spec.threads));
    std::string csv = mmdc::summary_csv_header() + "\n";
    std::size_t failed = 0;
    for (const auto& r : results) {
        csv += r.row + "\n";
        if (!r.error.empty()) {
            ++failed;
            std::cerr << fmt::format("run failed (scheme={} density={} size={} seed={}): {}\n", r.cell.scheme,
                                     r.cell.density, r.cell.file_size, r.cell.seed_index, r.error);
        }
    }
    write_atomic(out_dir / "summary.csv", csv);
    std::cout << fmt::format("{} runs, {} failed, summary written to {}\n", results.size(), failed,
                             (out_dir / "summary.csv").string());
    return failed == 0 ? 0 : 2;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"mmdc: mmWave dual-connectivity handover simulator"};
    app.require_subcommand(1);

    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> duration;

    auto* run = app.add_subcommand("run", "Execute one seeded run");
    std::string config_path;
    std::optional<std::string> scheme;
    bool trace = false;
    run->add_option("config", config_path, "Scenario config (YAML)")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Override the master seed");
    run->add_option("--duration", duration, "Override the simulated duration (s)");
    run->add_option("--scheme", scheme, "Override the scheme")->check(CLI::IsMember({"dual", "single"}));
    run->add_option("-o,--output-dir", out_dir, "Output directory (env MMDC_OUTPUT_DIR)");
    run->add_flag("--trace,!--no-trace", trace, "Write the event trace");

    auto* sweep = app.add_subcommand("sweep", "Execute every combination of a sweep spec");
    std::string spec_path;
    std::optional<unsigned> threads;
    sweep->add_option("spec", spec_path, "Sweep spec (YAML)")->required()->check(CLI::ExistingFile);
    sweep->add_option("--seed", seed, "Override the global seed");
    sweep->add_option("--duration", duration, "Override the simulated duration (s)");
    sweep->add_option("-j,--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    sweep->add_option("-o,--output-dir", out_dir, "Output directory (env MMDC_OUTPUT_DIR)");

    auto* defaults = app.add_subcommand("defaults", "Print the default config");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run)
            return cmd_run(config_path, seed, duration, scheme, out_dir, trace);
        if (*sweep)
            return cmd_sweep(spec_path, seed, duration, threads, out_dir);
        if (*defaults) {
            std::cout << mmdc::serialize_config(mmdc::ScenarioConfig{});
            return 0;
        }
    } catch (const mmdc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
