#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "mmdc/config.hpp"

using namespace mmdc;

namespace {

std::string error_of(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(Config, EmptyGivesDefaults)
{
    const auto c = parse_config("");
    EXPECT_EQ(c, ScenarioConfig{});
    EXPECT_EQ(c.blockage_density, 4000.0);
    EXPECT_EQ(c.ttt, 0.020);
    EXPECT_EQ(c.sinr_th_db, 20.0);
    EXPECT_EQ(c.rlc_buffer_bytes, 100'000'000u);
    EXPECT_EQ(c.x2_delay, 0.001);
    EXPECT_EQ(c.file_interval, 0.120);
    EXPECT_EQ(c.ue_speed, 10.0);
    EXPECT_EQ(c.inter_bs_distance, 50.0);
    EXPECT_EQ(c.sn_tx_power_dbm, 30.0);
    EXPECT_EQ(c.sn_bandwidth_hz, 1e9);
    EXPECT_EQ(c.lte_bandwidth_hz, 20e6);
    EXPECT_EQ(c.bs_antennas, 64.0);
    EXPECT_EQ(c.ue_antennas, 16.0);
    EXPECT_EQ(c.scheme, "dual");
}

TEST(Config, NegativeTttNamesField)
{
    const auto msg = error_of("ttt: -5\n");
    EXPECT_NE(msg.find("'ttt'"), std::string::npos) << msg;
}

TEST(Config, ZeroDurationRejected)
{
    EXPECT_NE(error_of("duration: 0\n").find("'duration'"), std::string::npos);
}

TEST(Config, SchemeSelection)
{
    EXPECT_EQ(parse_config("scheme: single\n").scheme, "single");
    EXPECT_NE(error_of("scheme: triple\n").find("'scheme'"), std::string::npos);
}

TEST(Config, UnknownKeyRejected)
{
    EXPECT_NE(error_of("tt: 0.02\n").find("unknown config key 'tt'"), std::string::npos);
}

TEST(Config, BadTypesAndRanges)
{
    EXPECT_NE(error_of("ttt: soon\n").find("'ttt'"), std::string::npos);
    EXPECT_NE(error_of("file_size: 1.5\n").find("'file_size'"), std::string::npos);
    EXPECT_NE(error_of("rate_efficiency: 1.5\n").find("'rate_efficiency'"), std::string::npos);
    EXPECT_NE(error_of("blockage_min: 3\n").find("'blockage_min'"), std::string::npos);
    EXPECT_NE(error_of("street: [[1, 2]]\n").find("'street'"), std::string::npos);
    EXPECT_NE(error_of("- 1\n- 2\n").find("mapping"), std::string::npos);
    EXPECT_NE(error_of("ttt: [1\n").find("parse error"), std::string::npos);
}

TEST(Config, ScientificByteCounts)
{
    const auto c = parse_config("file_size: 100e6\nrlc_buffer_bytes: 2e8\n");
    EXPECT_EQ(c.file_size, 100'000'000u);
    EXPECT_EQ(c.rlc_buffer_bytes, 200'000'000u);
}

TEST(Config, RoundTrip)
{
    ScenarioConfig c;
    c.scheme = "single";
    c.seed = 99;
    c.ttt = 0.0375;
    c.sinr_th_db = 17.25;
    c.sn_positions = {{1.5, 2.5}, {3.0, 4.0}};
    c.street = {{0, 0}, {10, 0}, {10, 10}};
    c.pdcp_reordering = false;
    c.file_size = 123'456'789;
    c.noise_psd_dbm_hz = -173.9;
    const auto text = serialize_config(c);
    EXPECT_EQ(parse_config(text), c);
    EXPECT_EQ(serialize_config(parse_config(text)), text);
    EXPECT_EQ(parse_config(serialize_config(ScenarioConfig{})), ScenarioConfig{});
}

TEST(Config, KeysCoverSerializedFields)
{
    const auto keys = config_keys();
    const auto text = serialize_config(ScenarioConfig{});
    for (const auto& k : keys)
        EXPECT_NE(text.find(k + ":"), std::string::npos) << k;
}

TEST(Config, CommittedFilesLoad)
{
    const std::filesystem::path dir = MMDC_CONFIG_DIR;
    EXPECT_EQ(load_config(dir / "default.yaml"), ScenarioConfig{});
    EXPECT_EQ(load_config(dir / "quick.yaml").duration, 5.0);
    for (const auto& entry : std::filesystem::directory_iterator(dir / "sweeps"))
        EXPECT_NO_THROW(load_sweep(entry.path())) << entry.path();
    EXPECT_THROW(load_config(dir / "missing.yaml"), ConfigError);
}

TEST(Sweep, Defaults)
{
    const auto s = parse_sweep("");
    EXPECT_EQ(s.densities, (std::vector<double>{1000, 2000, 4000, 6000}));
    EXPECT_EQ(s.schemes, (std::vector<std::string>{"dual", "single"}));
}

TEST(Sweep, ParsesLists)
{
    const auto s = parse_sweep("base:\n  duration: 2\nschemes: [single]\ndensities: [500]\n"
                               "file_sizes: [1e6, 10e6]\nseed_count: 3\nglobal_seed: 8\nthreads: 4\n");
    EXPECT_EQ(s.base.duration, 2.0);
    EXPECT_EQ(s.schemes, std::vector<std::string>{"single"});
    EXPECT_EQ(s.file_sizes, (std::vector<std::uint64_t>{1'000'000, 10'000'000}));
    EXPECT_EQ(s.seeds, (std::vector<std::uint64_t>{0, 1, 2}));
    EXPECT_EQ(s.global_seed, 8u);
    EXPECT_EQ(s.threads, 4u);
}

TEST(Sweep, Rejections)
{
    EXPECT_THROW(parse_sweep("bogus: 1\n"), ConfigError);
    EXPECT_THROW(parse_sweep("schemes: [dual, triple]\n"), ConfigError);
    EXPECT_THROW(parse_sweep("densities: []\n"), ConfigError);
    EXPECT_THROW(parse_sweep("seeds: [0]\nseed_count: 2\n"), ConfigError);
    EXPECT_THROW(parse_sweep("base:\n  ttt: -1\n"), ConfigError);
}
