#include "mmdc/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <ostream>
#include <thread>

#include <fmt/format.h>

namespace mmdc {

RadioParams sn_radio(const ScenarioConfig& c)
{
    RadioParams r;
    r.tx_power_dbm = c.sn_tx_power_dbm;
    r.bandwidth_hz = c.sn_bandwidth_hz;
    r.noise_psd_dbm_hz = c.noise_psd_dbm_hz;
    r.noise_figure_db = c.noise_figure_db;
    r.g_main_db = linear_to_db(c.bs_antennas * c.ue_antennas);
    r.g_side_db = c.side_lobe_gain_db;
    r.all_bs_interference = c.all_bs_interference;
    return r;
}

PathlossModel pathloss_model(const ScenarioConfig& c)
{
    PathlossModel m;
    m.los = {c.los_alpha, c.los_beta, c.los_sigma};
    m.nlos = {c.nlos_alpha, c.nlos_beta, c.nlos_sigma};
    return m;
}

TopologySpec topology_spec(const ScenarioConfig& c)
{
    TopologySpec t;
    t.width = c.area_width;
    t.height = c.area_height;
    t.inter_bs_distance = c.inter_bs_distance;
    t.explicit_sn_positions = c.sn_positions;
    return t;
}

StreetPath street_path(const ScenarioConfig& c)
{
    if (c.street.empty())
        return default_street(c.area_width, c.area_height);
    return StreetPath(c.street);
}

namespace {

DataPlaneParams dataplane_params(const ScenarioConfig& c)
{
    DataPlaneParams p;
    p.pdu_size = c.pdu_size;
    p.rlc_capacity = c.rlc_buffer_bytes;
    p.x2_delay = c.x2_delay;
    p.reordering = c.pdcp_reordering;
    p.reorder_window = c.reorder_window;
    p.abort_on_deadline = c.abort_on_deadline;
    return p;
}

ControllerParams controller_params(const ScenarioConfig& c, int mn_id)
{
    ControllerParams p;
    p.sinr_th_db = c.sinr_th_db;
    p.ttt = c.ttt;
    p.hysteresis_db = c.hysteresis_db;
    p.forward_on_switch = c.forward_on_switch;
    p.control_delay = c.control_delay;
    p.mn_id = mn_id;
    return p;
}

bool same_plan(const ServicePlan& a, const ServicePlan& b)
{
    return a.transmitters == b.transmitters && a.push_primary == b.push_primary &&
           a.push_duplicate == b.push_duplicate;
}

} // namespace

Simulation::Simulation(ScenarioConfig config, std::ostream* trace)
    : config_(std::move(config)), rng_(config_.seed), path_(street_path(config_))
{
    validate(config_);
    if (trace != nullptr) {
        trace_ = std::make_unique<TraceSink>(*trace);
        scheduler_.set_trace(trace_.get());
    }

    nodes_ = build_topology(topology_spec(config_));
    sns_ = secondary_transmitters(nodes_);
    const auto& mn = master_node(nodes_);
    mn_id_ = mn.id;
    mn_position_ = mn.position;

    BlockageOptions opts;
    opts.min_dimension = config_.blockage_min;
    opts.max_dimension = config_.blockage_max;
    opts.random_orientation = config_.blockage_random_orientation;
    field_ = generate_field(config_.blockage_density, config_.area_width, config_.area_height,
                            rng_.get(Stream::Blockage), opts);

    ue0_ = start_on_path(path_, config_.ue_speed, 0.0, 1);
    ue_now_ = ue0_.position;
    radio_ = sn_radio(config_);
    model_ = pathloss_model(config_);
    rate_params_ = {config_.rate_efficiency, config_.max_spectral_efficiency};

    for (std::size_t k = 0; k < sns_.size(); ++k) {
        ShadowingState s;
        s.sigma_db = 1.0; // unit process, scaled by the current condition's sigma
        s.decorrelation_distance = config_.decorrelation_distance;
        shadowing_.push_back(s);
        shadow_rng_.push_back(rng_.derive(Stream::Shadowing, k));
    }
    rates_.assign(nodes_.size(), 0.0);

    dataplane_ = std::make_unique<DataPlane>(scheduler_, dataplane_params(config_), static_cast<int>(nodes_.size()),
                                             mn_id_);
    const auto params = controller_params(config_, mn_id_);
    ControllerObserver& observer = *this;
    if (config_.scheme == "single")
        controller_ = std::make_unique<SingleConnectivityController>(scheduler_, observer, sns_, params);
    else
        controller_ = std::make_unique<DualConnectivityController>(scheduler_, observer, sns_, params);

    metrics_.sim_duration = config_.duration;
    scheduler_.set_pre_dispatch([this](const SimEvent&) { flush(); });
}

Simulation::~Simulation()
{
    // Timers owned by the controller cancel through the scheduler; drop them first.
    controller_.reset();
}

Point Simulation::ue_position(double t) const
{
    return step_mobility(ue0_, t, path_, config_.ue_speed).position;
}

ChannelSnapshot Simulation::measure(Point ue)
{
    ChannelSnapshot snap;
    snap.time = scheduler_.now();
    std::vector<double> shadow(sns_.size());
    for (std::size_t k = 0; k < sns_.size(); ++k) {
        const double xi = update_shadowing(shadowing_[k], ue, shadow_rng_[k]);
        shadow[k] = xi * model_.for_condition(is_los(sns_[k].position, ue, field_)).sigma;
    }
    for (std::size_t k = 0; k < sns_.size(); ++k) {
        const auto r = evaluate_sinr(sns_, k, ue, field_, shadow, radio_, model_);
        snap.sn.push_back({static_cast<int>(k), r.sinr_db, classify(r.sinr_db, r.los, config_.outage_threshold_db),
                           snap.time});
    }
    return snap;
}

void Simulation::on_srs()
{
    const Point ue = ue_position(scheduler_.now());
    ue_now_ = ue;
    const auto snap = measure(ue);

    const double sn_bw = config_.sn_bandwidth_hz;
    for (const auto& r : snap.sn)
        rates_[static_cast<std::size_t>(r.sn_id)] = link_rate_bps(r, sn_bw, rate_params_);
    // Anchor link: macro pathloss, no blockage, noise only.
    const double d = std::max(distance(mn_position_, ue), 1.0);
    const double noise = config_.noise_psd_dbm_hz + 10.0 * std::log10(config_.lte_bandwidth_hz) +
                         config_.noise_figure_db;
    const double mn_sinr = config_.mn_tx_power_dbm - mn_pathloss_db(d) - noise;
    const LinkReport mn_report{mn_id_, mn_sinr, classify(mn_sinr, true, config_.outage_threshold_db),
                               snap.time};
    rates_[static_cast<std::size_t>(mn_id_)] = link_rate_bps(mn_report, config_.lte_bandwidth_hz, rate_params_);

    if (!attached_) {
        std::vector<double> sinr;
        for (const auto& r : snap.sn)
            sinr.push_back(r.sinr_db);
        const auto [serving, idle] = initial_attachment(sns_, ue, sinr);
        controller_->attach(snap, serving, idle);
        attached_ = true;
        if (trace_)
            trace_->note(scheduler_.now(), "CONTROL",
                         fmt::format("ATTACH serving={} idle={}", serving, idle ? *idle : -1));
        sync_plan();
    }
    controller_->on_report(snap);
    sync_plan();
}

void Simulation::flush()
{
    const double now = scheduler_.now();
    const double dt = now - last_service_;
    if (dt > 0.0) {
        dataplane_->serve(plan_.transmitters, rates_, dt);
        last_service_ = now;
    }
    if (attached_ && dataplane_->backlog_bytes() > 0)
        dataplane_->top_up(plan_.push_primary, plan_.push_duplicate);
}

void Simulation::sync_plan()
{
    if (!attached_)
        return;
    auto plan = controller_->plan();
    if (same_plan(plan, plan_))
        return;
    plan_ = std::move(plan);
    std::vector<int> active = plan_.transmitters;
    active.push_back(plan_.push_primary);
    if (plan_.push_duplicate)
        active.push_back(*plan_.push_duplicate);
    dataplane_->set_active(std::move(active), plan_.push_primary);
}

void Simulation::on_record(const ActionRecord& record)
{
    if (record.counts_as_trial)
        ++metrics_.handover_trials;
    switch (record.kind) {
    case RecordKind::PathSwitch:
        ++metrics_.path_switches;
        break;
    case RecordKind::Fallback:
        ++metrics_.fallback_events;
        break;
    case RecordKind::HandoverAbort:
        ++metrics_.handover_aborts;
        break;
    default:
        break;
    }
    records_.push_back(record);
    if (trace_)
        trace_->note(record.time, "CONTROL",
                     fmt::format("{} from={} to={} sinr_from={:.3f} sinr_to={:.3f}", to_string(record.kind),
                                 record.from, record.to, record.sinr_from, record.sinr_to));
    sync_plan();
}

void Simulation::on_transition(const Transition& transition)
{
    sync_plan();
    for (const auto& r : transition.replications)
        dataplane_->replicate(r.from, r.keep, r.copy_to);
    for (const auto& [from, to] : transition.forwards)
        dataplane_->forward(from, to);
    for (int node : transition.purges)
        dataplane_->purge(node);
    // After the forwards, so their bytes already count against the target's room.
    dataplane_->top_up(plan_.push_primary, plan_.push_duplicate);
}

void Simulation::schedule_report(std::uint64_t k)
{
    const double t = static_cast<double>(k) * config_.srs_period;
    if (t > config_.duration)
        return;
    scheduler_.schedule(
        t, EventKind::LinkService, [] {},
        [this] { return fmt::format("transmitted={}", dataplane_->counters().transmitted); });
    scheduler_.schedule(
        t, EventKind::SrsReport,
        [this, k] {
            on_srs();
            schedule_report(k + 1);
        },
        [this] { return fmt::format("mode={}", to_string(controller_->mode())); });
}

void Simulation::schedule_mobility(std::uint64_t k)
{
    const double t = static_cast<double>(k) * config_.mobility_step;
    if (t > config_.duration)
        return;
    scheduler_.schedule(
        t, EventKind::MobilityStep,
        [this, k] {
            ue_now_ = ue_position(scheduler_.now());
            schedule_mobility(k + 1);
        },
        [this] {
            const Point p = ue_position(scheduler_.now());
            return fmt::format("x={:.4f} y={:.4f}", p.x, p.y);
        });
}

void Simulation::schedule_traffic(std::uint64_t k)
{
    const double t = config_.first_file_time + static_cast<double>(k) * config_.file_interval;
    if (!(t < config_.duration - 1e-9))
        return;
    scheduler_.schedule(
        t, EventKind::TrafficGen,
        [this, k] {
            dataplane_->generate_file(config_.file_size, config_.delay_constraint);
            dataplane_->top_up(plan_.push_primary, plan_.push_duplicate);
            schedule_traffic(k + 1);
        },
        [this, k] { return fmt::format("file={} size={}", k, config_.file_size); });
}

RunMetrics Simulation::run()
{
    schedule_report(0);
    schedule_mobility(0);
    schedule_traffic(0);
    scheduler_.schedule(
        config_.duration, EventKind::RunEnd, [this] { scheduler_.stop(); },
        [this] {
            const auto& c = dataplane_->counters();
            return fmt::format("generated={} delivered={} lost={}", c.generated, c.delivered, c.lost);
        });
    scheduler_.run_until(config_.duration);

    metrics_.bytes = dataplane_->counters();
    metrics_.residual_bytes = dataplane_->residual_bytes();
    metrics_.files.clear();
    for (const auto& f : dataplane_->files().files()) {
        FileRecord r;
        r.file_id = f.file_id;
        r.size = f.size;
        r.created = f.created;
        r.deadline = f.deadline;
        r.completed = f.completed;
        r.outcome = classify_file(f, config_.duration);
        metrics_.files.push_back(r);
    }
    return metrics_;
}

RunMetrics run_simulation(const ScenarioConfig& config, std::ostream* trace)
{
    Simulation sim(config, trace);
    return sim.run();
}

std::uint64_t world_seed(std::uint64_t global_seed, double density, std::uint64_t file_size,
                         std::uint64_t seed_index)
{
    std::uint64_t h = hash_combine(global_seed, hash_string(fmt::format("{}", density)));
    h = hash_combine(h, file_size);
    return hash_combine(h, seed_index);
}

std::vector<SweepCell> enumerate_cells(const SweepSpec& spec)
{
    std::vector<SweepCell> cells;
    for (const auto& scheme : spec.schemes)
        for (double density : spec.densities)
            for (auto size : spec.file_sizes)
                for (auto index : spec.seeds)
                    cells.push_back({scheme, density, size, index, world_seed(spec.global_seed, density, size, index)});
    return cells;
}

ScenarioConfig cell_config(const SweepSpec& spec, const SweepCell& cell)
{
    ScenarioConfig c = spec.base;
    c.scheme = cell.scheme;
    c.blockage_density = cell.density;
    c.file_size = cell.file_size;
    c.seed = cell.seed;
    return c;
}

std::vector<SweepResult> run_sweep(const SweepSpec& spec, unsigned threads, bool keep_metrics)
{
    const auto cells = enumerate_cells(spec);
    std::vector<SweepResult> results(cells.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            const auto& cell = cells[i];
            auto& out = results[i];
            out.cell = cell;
            const RunLabel label{cell.seed, cell.scheme, cell.density, cell.file_size};
            try {
                const auto config = cell_config(spec, cell);
                auto m = run_simulation(config);
                out.row = summary_csv_row(label, m, config.count_in_flight_as_failed);
                if (keep_metrics)
                    out.metrics = std::move(m);
            } catch (const std::exception& e) {
                out.error = e.what();
                out.row = summary_csv_error_row(label, e.what());
            }
        }
    };

    threads = std::max(1u, threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    return results;
}

} // namespace mmdc
