#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dodewalk/rng.hpp"
#include "dodewalk/spacefrac.hpp"
#include "dodewalk/summation.hpp"
#include "dodewalk/timefrac.hpp"
#include "dodewalk/transition.hpp"

namespace dodewalk {

enum class StepType { Markovian, NonMarkovian, Stay };
std::string_view to_string(StepType t) noexcept;

struct JumpRecord {
    std::int64_t step = 0;  // index n of the transition S_n -> S_{n+1}
    StepType type = StepType::Stay;
    Offset offset{};           // S_{n+1} - S_n
    std::int64_t revisit = -1;  // m for NonMarkovian records
    double jump_nm = 0.0;
};

struct Trajectory {
    int dim = 2;
    double h = 1.0;
    double tau = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t walker = 0;
    std::string config_hash;
    std::vector<Offset> positions;  // S_0 .. S_n in lattice units
    std::vector<JumpRecord> records;
};

/// Square grid of permeable lines aligned with the lattice.
struct BarrierOptions {
    double spacing_nm = 66.0;
    double p_escape = 0.01;
};

struct WalkConfig {
    SpectralMixture mixture;
    Derivative variant = Derivative::Caputo;
    int dim = 2;
    double h = 6.0;  // nm
    int K = 512;
    double tau = 0.0;       // s
    double duration = 0.0;  // s
    std::int64_t n_steps = 0;
    std::uint64_t seed = 0;
    std::size_t ensemble = 1;
    std::optional<BarrierOptions> barrier;
    std::string config_hash;
};

/// Immutable tables shared by every walker of a configuration.
class WalkModel {
public:
    explicit WalkModel(WalkConfig config);

    [[nodiscard]] const WalkConfig& config() const noexcept { return config_; }
    [[nodiscard]] const JumpKernel& kernel() const noexcept { return kernel_; }
    [[nodiscard]] const KernelRates& rates() const noexcept { return rates_; }
    [[nodiscard]] const MemoryCoefficients& coefficients() const noexcept { return coeffs_; }
    [[nodiscard]] StabilityReport stability() const noexcept { return stability_; }

private:
    WalkConfig config_;
    KernelRates rates_;
    StabilityReport stability_;
    JumpKernel kernel_;
    MemoryCoefficients coeffs_;
};

/// Running statistics over the steps of one or more walkers.
struct WalkTally {
    std::int64_t steps = 0;
    std::int64_t markovian = 0;
    std::int64_t nonmarkovian = 0;
    std::int64_t stays = 0;
    std::int64_t jumps = 0;  // steps with nonzero displacement
    CompensatedSum jump_nm;
    CompensatedSum jump_nm_sq;

    void record(StepType type, double length_nm) noexcept;
    WalkTally& operator+=(const WalkTally& other) noexcept;
};

Trajectory run_walk(const WalkModel& model, const DeviateStream& stream);

struct EnsembleOptions {
    std::size_t threads = 1;
    bool keep_trajectories = false;
    std::size_t msd_stride = 0;  // record <|S_n|^2> every msd_stride steps; 0 disables
};

struct EnsembleResult {
    std::vector<Offset> final_positions;
    std::vector<Trajectory> trajectories;  // only with keep_trajectories
    WalkTally tally;
    std::vector<std::int64_t> msd_steps;
    std::vector<double> msd_nm2;  // ensemble mean of |S_n|^2 in nm^2
};

/// Walker i uses derive_stream(seed, i); output is independent of `threads`.
EnsembleResult run_ensemble(const WalkModel& model, std::uint64_t seed, std::size_t ensemble,
                            const EnsembleOptions& options = {});

struct BarrierSummary {
    std::int64_t attempted_crossings = 0;
    std::int64_t escapes = 0;
    std::int64_t cells_visited = 0;
    std::int64_t cell_sites = 0;  // lattice sites per cell edge
};

/// Nearest-neighbour walk confined by the barrier grid; needs beta = 1 and alpha = {2}.
Trajectory barrier_walk(const WalkModel& model, const DeviateStream& stream,
                        const BarrierOptions& barrier, BarrierSummary* summary = nullptr);

/// Cell index along one axis for a barrier grid with `cell` sites per edge,
/// with the origin at a cell centre.
std::int64_t barrier_cell(std::int64_t x, std::int64_t cell) noexcept;

double offset_length(const Offset& k, int dim) noexcept;

}  // namespace dodewalk
