#include "mmdc/channel.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace mmdc {

double pathloss_db(double d, const PathlossParams& params, double xi_db)
{
    assert(d > 0.0);
    return params.alpha + params.beta * 10.0 * std::log10(d) + xi_db;
}

double mn_pathloss_db(double d)
{
    return 128.1 + 37.6 * std::log10(d / 1000.0);
}

double update_shadowing(ShadowingState& state, Point new_pos, std::mt19937_64& rng)
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    if (!state.initialized) {
        state.xi_db = state.sigma_db * gauss(rng);
        state.last_position = new_pos;
        state.initialized = true;
        return state.xi_db;
    }
    const double moved = distance(state.last_position, new_pos);
    state.last_position = new_pos;
    if (moved == 0.0)
        return state.xi_db;
    const double rho = std::exp(-moved / state.decorrelation_distance);
    state.xi_db = rho * state.xi_db + std::sqrt(1.0 - rho * rho) * state.sigma_db * gauss(rng);
    return state.xi_db;
}

SinrResult evaluate_sinr(std::span<const Transmitter> all_bs, std::size_t serving, Point ue,
                         const BlockageField& field, std::span<const double> shadow_db,
                         const RadioParams& radio, const PathlossModel& model)
{
    auto received_dbm = [&](std::size_t k, double gain_db, bool& los_out) {
        const auto& bs = all_bs[k];
        const double d = std::max(distance(bs.position, ue), model.min_distance);
        los_out = is_los(bs.position, ue, field);
        const double pl = pathloss_db(d, model.for_condition(los_out), shadow_db[k]);
        return radio.tx_power_dbm + gain_db - pl;
    };

    SinrResult result;
    const double signal_mw = db_to_linear(received_dbm(serving, radio.g_main_db, result.los));
    double interference_mw = 0.0;
    for (std::size_t k = 0; k < all_bs.size(); ++k) {
        if (k == serving)
            continue;
        if (!radio.all_bs_interference && all_bs[k].channel != all_bs[serving].channel)
            continue;
        bool los = true;
        interference_mw += db_to_linear(received_dbm(k, radio.g_side_db, los));
    }
    const double noise_mw = db_to_linear(noise_dbm(radio));
    result.sinr_db = linear_to_db(signal_mw / (interference_mw + noise_mw));
    return result;
}

std::string_view to_string(LinkClass c)
{
    switch (c) {
    case LinkClass::Los:
        return "LOS";
    case LinkClass::Nlos:
        return "NLOS";
    case LinkClass::Outage:
        return "OUTAGE";
    }
    return "?";
}

} // namespace mmdc
