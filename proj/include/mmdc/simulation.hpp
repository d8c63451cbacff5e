#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mmdc/channel.hpp"
#include "mmdc/config.hpp"
#include "mmdc/dataplane.hpp"
#include "mmdc/engine.hpp"
#include "mmdc/geometry.hpp"
#include "mmdc/metrics.hpp"
#include "mmdc/network.hpp"
#include "mmdc/protocol.hpp"

namespace mmdc {

RadioParams sn_radio(const ScenarioConfig& config);
PathlossModel pathloss_model(const ScenarioConfig& config);
TopologySpec topology_spec(const ScenarioConfig& config);
StreetPath street_path(const ScenarioConfig& config);

/// One seeded run: world, controller and data plane wired to a scheduler.
class Simulation final : private ControllerObserver {
  public:
    /// trace, when given, receives the event trace and must outlive the run.
    explicit Simulation(ScenarioConfig config, std::ostream* trace = nullptr);
    ~Simulation() override;

    RunMetrics run();

    [[nodiscard]] const ScenarioConfig& config() const { return config_; }
    [[nodiscard]] const std::vector<NodeDescriptor>& nodes() const { return nodes_; }
    [[nodiscard]] const BlockageField& field() const { return field_; }
    [[nodiscard]] const DataPlane& dataplane() const { return *dataplane_; }
    [[nodiscard]] const std::vector<ActionRecord>& records() const { return records_; }

  private:
    void on_record(const ActionRecord& record) override;
    void on_transition(const Transition& transition) override;

    void schedule_report(std::uint64_t k);
    void schedule_mobility(std::uint64_t k);
    void schedule_traffic(std::uint64_t k);
    void on_srs();
    ChannelSnapshot measure(Point ue);
    void flush();
    void sync_plan();
    [[nodiscard]] Point ue_position(double t) const;

    ScenarioConfig config_;
    Scheduler scheduler_;
    std::unique_ptr<TraceSink> trace_;
    RngStreams rng_;
    std::vector<NodeDescriptor> nodes_;
    std::vector<Transmitter> sns_;
    Point mn_position_{};
    int mn_id_ = -1;
    BlockageField field_;
    StreetPath path_;
    UeState ue0_;
    Point ue_now_{};
    RadioParams radio_;
    PathlossModel model_;
    RateParams rate_params_;
    std::vector<ShadowingState> shadowing_;
    std::vector<RngStreams::Engine> shadow_rng_;
    std::vector<double> rates_;
    std::unique_ptr<DataPlane> dataplane_;
    std::unique_ptr<MobilityController> controller_;
    bool attached_ = false;
    ServicePlan plan_;
    double last_service_ = 0.0;
    RunMetrics metrics_;
    std::vector<ActionRecord> records_;
};

/// Convenience wrapper around Simulation.
RunMetrics run_simulation(const ScenarioConfig& config, std::ostream* trace = nullptr);

/// Seed of the simulated world for one sweep cell. The scheme is left out on
/// purpose so both schemes run in the same world.
std::uint64_t world_seed(std::uint64_t global_seed, double density, std::uint64_t file_size,
                         std::uint64_t seed_index);

struct SweepCell {
    std::string scheme;
    double density = 0.0;
    std::uint64_t file_size = 0;
    std::uint64_t seed_index = 0;
    std::uint64_t seed = 0;
};

/// Cells in declaration order: scheme, then density, then file size, then seed.
std::vector<SweepCell> enumerate_cells(const SweepSpec& spec);

ScenarioConfig cell_config(const SweepSpec& spec, const SweepCell& cell);

struct SweepResult {
    SweepCell cell;
    std::string row; // summary CSV row
    std::optional<RunMetrics> metrics;
    std::string error;
};

/// Runs every cell; results come back in cell order whatever the thread count.
std::vector<SweepResult> run_sweep(const SweepSpec& spec, unsigned threads, bool keep_metrics = false);

} // namespace mmdc
