#include "mmdc/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace mmdc {

namespace {

enum class Check { Any, Positive, NonNegative, Scheme, Probability };

template <typename Config, typename F>
void for_each_field(Config& c, F&& f)
{
    f("scheme", c.scheme, Check::Scheme);
    f("seed", c.seed, Check::Any);
    f("duration", c.duration, Check::Positive);

    f("sn_tx_power_dbm", c.sn_tx_power_dbm, Check::Any);
    f("mn_tx_power_dbm", c.mn_tx_power_dbm, Check::Any);
    f("sn_bandwidth_hz", c.sn_bandwidth_hz, Check::Positive);
    f("lte_bandwidth_hz", c.lte_bandwidth_hz, Check::Positive);
    f("bs_antennas", c.bs_antennas, Check::Positive);
    f("ue_antennas", c.ue_antennas, Check::Positive);
    f("side_lobe_gain_db", c.side_lobe_gain_db, Check::Any);
    f("noise_psd_dbm_hz", c.noise_psd_dbm_hz, Check::Any);
    f("noise_figure_db", c.noise_figure_db, Check::NonNegative);
    f("all_bs_interference", c.all_bs_interference, Check::Any);

    f("los_alpha", c.los_alpha, Check::Any);
    f("los_beta", c.los_beta, Check::Positive);
    f("los_sigma", c.los_sigma, Check::NonNegative);
    f("nlos_alpha", c.nlos_alpha, Check::Any);
    f("nlos_beta", c.nlos_beta, Check::Positive);
    f("nlos_sigma", c.nlos_sigma, Check::NonNegative);
    f("decorrelation_distance", c.decorrelation_distance, Check::Positive);
    f("outage_threshold_db", c.outage_threshold_db, Check::Any);

    f("area_width", c.area_width, Check::Positive);
    f("area_height", c.area_height, Check::Positive);
    f("inter_bs_distance", c.inter_bs_distance, Check::Positive);
    f("sn_positions", c.sn_positions, Check::Any);
    f("street", c.street, Check::Any);
    f("ue_speed", c.ue_speed, Check::Positive);
    f("mobility_step", c.mobility_step, Check::Positive);

    f("blockage_density", c.blockage_density, Check::NonNegative);
    f("blockage_min", c.blockage_min, Check::Positive);
    f("blockage_max", c.blockage_max, Check::Positive);
    f("blockage_random_orientation", c.blockage_random_orientation, Check::Any);

    f("srs_period", c.srs_period, Check::Positive);
    f("sinr_th_db", c.sinr_th_db, Check::Any);
    f("ttt", c.ttt, Check::NonNegative);
    f("hysteresis_db", c.hysteresis_db, Check::NonNegative);
    f("forward_on_switch", c.forward_on_switch, Check::Any);
    f("control_delay", c.control_delay, Check::Positive);

    f("rate_efficiency", c.rate_efficiency, Check::Probability);
    f("max_spectral_efficiency", c.max_spectral_efficiency, Check::Positive);
    f("pdu_size", c.pdu_size, Check::Positive);
    f("rlc_buffer_bytes", c.rlc_buffer_bytes, Check::Positive);
    f("x2_delay", c.x2_delay, Check::Positive);
    f("file_size", c.file_size, Check::Positive);
    f("file_interval", c.file_interval, Check::Positive);
    f("first_file_time", c.first_file_time, Check::NonNegative);
    f("delay_constraint", c.delay_constraint, Check::Positive);
    f("pdcp_reordering", c.pdcp_reordering, Check::Any);
    f("reorder_window", c.reorder_window, Check::Positive);
    f("abort_on_deadline", c.abort_on_deadline, Check::Any);
    f("count_in_flight_as_failed", c.count_in_flight_as_failed, Check::Any);
}

[[noreturn]] void fail(std::string_view field, std::string_view what)
{
    throw ConfigError(fmt::format("invalid value for '{}': {}", field, what));
}

template <typename T>
void check_value(std::string_view name, const T& value, Check check)
{
    if constexpr (std::is_arithmetic_v<T> && !std::is_same_v<T, bool>) {
        const auto v = static_cast<double>(value);
        if (!std::isfinite(v))
            fail(name, "must be finite");
        if (check == Check::Positive && !(v > 0.0))
            fail(name, fmt::format("must be > 0, got {}", v));
        if (check == Check::NonNegative && !(v >= 0.0))
            fail(name, fmt::format("must be >= 0, got {}", v));
        if (check == Check::Probability && !(v > 0.0 && v <= 1.0))
            fail(name, fmt::format("must lie in (0, 1], got {}", v));
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (check == Check::Scheme && value != "dual" && value != "single")
            fail(name, fmt::format("expected 'dual' or 'single', got '{}'", value));
    }
}

template <typename T>
void read_value(const YAML::Node& node, std::string_view name, T& out)
{
    try {
        if constexpr (std::is_same_v<T, std::vector<Point>>) {
            if (!node.IsSequence())
                fail(name, "expected a list of [x, y] pairs");
            std::vector<Point> pts;
            for (const auto& item : node) {
                if (!item.IsSequence() || item.size() != 2)
                    fail(name, "expected a list of [x, y] pairs");
                pts.push_back({item[0].as<double>(), item[1].as<double>()});
            }
            out = std::move(pts);
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
            // Accept 1e6-style literals for byte counts.
            const double v = node.as<double>();
            if (!(v >= 0.0) || v != std::floor(v) || v > 1.8e19)
                fail(name, fmt::format("expected a non-negative integer, got '{}'", node.Scalar()));
            out = static_cast<std::uint64_t>(v);
        } else {
            out = node.as<T>();
        }
    } catch (const YAML::Exception& e) {
        fail(name, e.what());
    }
}

template <typename T>
void emit_value(YAML::Emitter& out, const T& value)
{
    if constexpr (std::is_same_v<T, std::vector<Point>>) {
        out << YAML::Flow << YAML::BeginSeq;
        for (const auto& p : value)
            out << YAML::Flow << YAML::BeginSeq << p.x << p.y << YAML::EndSeq;
        out << YAML::EndSeq;
    } else if constexpr (std::is_same_v<T, double>) {
        out << fmt::format("{}", value);
    } else {
        out << value;
    }
}

ScenarioConfig apply_overrides(ScenarioConfig config, const YAML::Node& root)
{
    if (!root || root.IsNull())
        return config;
    if (!root.IsMap())
        throw ConfigError("config must be a mapping of key: value pairs");
    std::set<std::string> known;
    for_each_field(config, [&](std::string_view name, auto&, Check) { known.emplace(name); });
    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        if (!known.count(key))
            throw ConfigError(fmt::format("unknown config key '{}'", key));
    }
    for_each_field(config, [&](std::string_view name, auto& field, Check) {
        if (const auto node = root[std::string(name)])
            read_value(node, name, field);
    });
    return config;
}

YAML::Node parse_yaml(const std::string& text)
{
    try {
        return YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(fmt::format("parse error: {}", e.what()));
    }
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

void validate(const ScenarioConfig& config)
{
    for_each_field(config, [](std::string_view name, const auto& field, Check check) {
        check_value(name, field, check);
    });
    if (config.blockage_min > config.blockage_max)
        fail("blockage_min", "must not exceed blockage_max");
    if (config.sn_positions.size() == 1)
        fail("sn_positions", "at least two SNs are needed");
    if (config.street.size() == 1)
        fail("street", "at least two waypoints are needed");
    if (config.pdu_size > config.rlc_buffer_bytes)
        fail("pdu_size", "must not exceed rlc_buffer_bytes");
}

ScenarioConfig parse_config(const std::string& text)
{
    auto config = apply_overrides(ScenarioConfig{}, parse_yaml(text));
    validate(config);
    return config;
}

ScenarioConfig load_config(const std::filesystem::path& path)
{
    return parse_config(read_file(path));
}

std::string serialize_config(const ScenarioConfig& config)
{
    YAML::Emitter out;
    out << YAML::BeginMap;
    for_each_field(config, [&](std::string_view name, const auto& field, Check) {
        out << YAML::Key << std::string(name) << YAML::Value;
        emit_value(out, field);
    });
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::vector<std::string> config_keys()
{
    std::vector<std::string> keys;
    ScenarioConfig c;
    for_each_field(c, [&](std::string_view name, auto&, Check) { keys.emplace_back(name); });
    return keys;
}

SweepSpec parse_sweep(const std::string& text)
{
    const auto root = parse_yaml(text);
    SweepSpec spec;
    if (!root || root.IsNull())
        return spec;
    if (!root.IsMap())
        throw ConfigError("sweep spec must be a mapping");
    static const std::set<std::string> known{"base",        "schemes",    "densities", "file_sizes",
                                             "seeds",       "seed_count", "global_seed", "output_dir",
                                             "threads"};
    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        if (!known.count(key))
            throw ConfigError(fmt::format("unknown sweep key '{}'", key));
    }
    auto list = [&](const char* key, auto& out) {
        if (const auto node = root[key]) {
            if (!node.IsSequence() || node.size() == 0)
                fail(key, "expected a non-empty list");
            out.clear();
            for (const auto& item : node) {
                typename std::decay_t<decltype(out)>::value_type v{};
                read_value(item, key, v);
                out.push_back(v);
            }
        }
    };
    spec.base = apply_overrides(ScenarioConfig{}, root["base"]);
    list("schemes", spec.schemes);
    list("densities", spec.densities);
    list("file_sizes", spec.file_sizes);
    list("seeds", spec.seeds);
    if (const auto node = root["seed_count"]) {
        if (root["seeds"])
            fail("seed_count", "give either seeds or seed_count");
        std::uint64_t n = 0;
        read_value(node, "seed_count", n);
        if (n == 0)
            fail("seed_count", "must be > 0");
        spec.seeds.clear();
        for (std::uint64_t i = 0; i < n; ++i)
            spec.seeds.push_back(i);
    }
    if (const auto node = root["global_seed"])
        read_value(node, "global_seed", spec.global_seed);
    if (const auto node = root["output_dir"])
        read_value(node, "output_dir", spec.output_dir);
    if (const auto node = root["threads"])
        read_value(node, "threads", spec.threads);

    validate(spec.base);
    for (const auto& s : spec.schemes)
        check_value("schemes", s, Check::Scheme);
    for (double d : spec.densities)
        check_value("densities", d, Check::NonNegative);
    for (auto size : spec.file_sizes)
        check_value("file_sizes", size, Check::Positive);
    return spec;
}

SweepSpec load_sweep(const std::filesystem::path& path)
{
    return parse_sweep(read_file(path));
}

} // namespace mmdc
