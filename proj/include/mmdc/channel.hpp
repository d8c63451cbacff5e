#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

#include "mmdc/geometry.hpp"

namespace mmdc {

/// Log-distance pathloss parameters for one propagation condition.
struct PathlossParams {
    double alpha = 61.4; // dB
    double beta = 2.0;
    double sigma = 5.8; // shadowing std-dev, dB
};

struct PathlossModel {
    PathlossParams los{61.4, 2.0, 5.8};
    PathlossParams nlos{72.0, 2.92, 8.7};
    double min_distance = 1.0; // m

    [[nodiscard]] const PathlossParams& for_condition(bool los_clear) const { return los_clear ? los : nlos; }
};

struct RadioParams {
    double tx_power_dbm = 30.0;
    double bandwidth_hz = 1e9;
    double noise_psd_dbm_hz = -174.0;
    double noise_figure_db = 5.0;
    double g_main_db = 30.103; // 10*log10(64 * 16)
    double g_side_db = 0.0;
    // Interfere across carriers as well, instead of co-channel only.
    bool all_bs_interference = false;
};

/// Thermal noise power over the band, noise figure included.
inline double noise_dbm(const RadioParams& radio)
{
    return radio.noise_psd_dbm_hz + 10.0 * std::log10(radio.bandwidth_hz) + radio.noise_figure_db;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// PL(d) = alpha + beta * 10 log10(d) + xi.
double pathloss_db(double d, const PathlossParams& params, double xi_db);

/// Macro-cell model for the wide-area anchor link: 128.1 + 37.6 log10(d / 1 km).
double mn_pathloss_db(double d);

/// Spatially correlated shadowing for one link: first-order autoregression in
/// distance travelled.
struct ShadowingState {
    double xi_db = 0.0;
    double sigma_db = 1.0;
    double decorrelation_distance = 10.0;
    Point last_position{};
    bool initialized = false;
};

/// Advances the process to new_pos and returns the new xi. The first call draws
/// from the stationary distribution.
double update_shadowing(ShadowingState& state, Point new_pos, std::mt19937_64& rng);

/// A transmitting secondary node as seen by the channel.
struct Transmitter {
    Point position;
    int channel = 0;
};

struct SinrResult {
    double sinr_db = 0.0;
    bool los = true;
};

/// SINR of transmitter `serving` at the UE. Interference is summed over the other
/// transmitters on the same carrier (or all of them with all_bs_interference).
/// shadow_db holds the per-link shadowing value already scaled for its condition.
SinrResult evaluate_sinr(std::span<const Transmitter> all_bs, std::size_t serving, Point ue,
                         const BlockageField& field, std::span<const double> shadow_db,
                         const RadioParams& radio, const PathlossModel& model);

inline double sinr_db(std::span<const Transmitter> all_bs, std::size_t serving, Point ue,
                      const BlockageField& field, std::span<const double> shadow_db, const RadioParams& radio,
                      const PathlossModel& model)
{
    return evaluate_sinr(all_bs, serving, ue, field, shadow_db, radio, model).sinr_db;
}

enum class LinkClass : std::uint8_t { Los, Nlos, Outage };

std::string_view to_string(LinkClass c);

inline LinkClass classify(double sinr, bool los, double outage_threshold_db)
{
    if (sinr < outage_threshold_db)
        return LinkClass::Outage;
    return los ? LinkClass::Los : LinkClass::Nlos;
}

inline bool connectable(LinkClass c) { return c != LinkClass::Outage; }

struct LinkReport {
    int sn_id = -1;
    double sinr_db = 0.0;
    LinkClass link_class = LinkClass::Outage;
    double report_time = 0.0;
};

} // namespace mmdc
