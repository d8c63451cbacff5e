#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmdc/geometry.hpp"

namespace mmdc {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Every knob of one run. Defaults reproduce the reference scenario.
struct ScenarioConfig {
    std::string scheme = "dual"; // dual | single
    std::uint64_t seed = 1;
    double duration = 60.0; // s

    // Radio
    double sn_tx_power_dbm = 30.0;
    double mn_tx_power_dbm = 46.0;
    double sn_bandwidth_hz = 1e9;
    double lte_bandwidth_hz = 20e6;
    double bs_antennas = 64;  // 8x8
    double ue_antennas = 16;  // 4x4
    double side_lobe_gain_db = 0.0;
    double noise_psd_dbm_hz = -174.0;
    double noise_figure_db = 5.0;
    bool all_bs_interference = false;

    // Propagation
    double los_alpha = 61.4;
    double los_beta = 2.0;
    double los_sigma = 5.8;
    double nlos_alpha = 72.0;
    double nlos_beta = 2.92;
    double nlos_sigma = 8.7;
    double decorrelation_distance = 10.0;
    double outage_threshold_db = -5.0;

    // Deployment and mobility
    double area_width = 100.0;
    double area_height = 100.0;
    double inter_bs_distance = 50.0;
    std::vector<Point> sn_positions; // empty: regular grid
    std::vector<Point> street;       // empty: vertical mid-line
    double ue_speed = 10.0;
    double mobility_step = 0.001;

    // Blockage
    double blockage_density = 4000.0; // per km^2
    double blockage_min = 1.0;
    double blockage_max = 2.0;
    bool blockage_random_orientation = false;

    // Control
    double srs_period = 0.005;
    double sinr_th_db = 20.0;
    double ttt = 0.020;
    double hysteresis_db = 3.0;
    bool forward_on_switch = true;
    double control_delay = 0.010;

    // Data plane
    double rate_efficiency = 0.6;
    double max_spectral_efficiency = 7.4;
    std::uint64_t pdu_size = 1400;
    std::uint64_t rlc_buffer_bytes = 100'000'000;
    double x2_delay = 0.001;
    std::uint64_t file_size = 1'000'000;
    double file_interval = 0.120;
    double first_file_time = 0.0;
    double delay_constraint = 0.120;
    bool pdcp_reordering = true;
    double reorder_window = 0.050;
    bool abort_on_deadline = false;
    bool count_in_flight_as_failed = false;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Throws ConfigError naming the first offending field.
void validate(const ScenarioConfig& config);

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ScenarioConfig& config);

/// Names of all config keys, in declaration order.
std::vector<std::string> config_keys();

struct SweepSpec {
    ScenarioConfig base;
    std::vector<std::string> schemes{"dual", "single"};
    std::vector<double> densities{1000, 2000, 4000, 6000};
    std::vector<std::uint64_t> file_sizes{1'000'000};
    std::vector<std::uint64_t> seeds{0};
    std::uint64_t global_seed = 1;
    std::string output_dir = "out";
    unsigned threads = 1;
};

SweepSpec parse_sweep(const std::string& text);
SweepSpec load_sweep(const std::filesystem::path& path);

} // namespace mmdc
