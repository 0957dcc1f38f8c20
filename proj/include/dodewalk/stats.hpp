#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dodewalk/fdsolve.hpp"
#include "dodewalk/transition.hpp"
#include "dodewalk/walk.hpp"

namespace dodewalk {

struct WalkSummary {
    double avg_jump_nm = 0.0;
    double jump_sd_nm = 0.0;
    std::int64_t n_jumps = 0;
    std::int64_t n_steps = 0;
    std::int64_t n_stays = 0;
    double nonmarkov_fraction = 0.0;
    std::vector<std::pair<double, double>> msd_series;  // (t_s, <|S|^2> nm^2)
    std::string config_hash;
};

/// Mean Euclidean length of all nonzero displacements (Markovian and revisit).
/// Throws std::domain_error when no step moved the walker.
double avg_jump_size(const Trajectory& trajectory);
double avg_jump_size(const WalkTally& tally);
double nonmarkov_fraction(const Trajectory& trajectory);
double nonmarkov_fraction(const WalkTally& tally);

WalkSummary summarize(const WalkTally& tally, double tau, std::span<const std::int64_t> msd_steps,
                      std::span<const double> msd_nm2, std::string config_hash = {});

/// Exact mean and standard deviation of the Markovian jump length (nm) over
/// the kernel entries, excluding the stay cell.
struct JumpMoments {
    double mean_nm = 0.0;
    double sd_nm = 0.0;
};
JumpMoments kernel_jump_moments(const JumpKernel& kernel);

/// Occupancy counts on the box |j_i| <= J plus the count outside it.
struct Histogram {
    int dim = 2;
    int J = 0;
    std::vector<std::uint64_t> counts;
    std::uint64_t outside = 0;
    std::uint64_t total = 0;
};

Histogram occupancy_histogram(std::span<const Offset> positions, int dim, int J);

/// 1/2 sum_j |hist_j / total - u_j| + 1/2 |outside / total - boundary_loss|.
double tv_distance(const Histogram& histogram, const DensityGrid& density);

/// Ensemble mean squared displacement; needs at least 100 walkers.
std::vector<std::pair<double, double>> msd(const EnsembleResult& ensemble, double tau,
                                           std::size_t ensemble_size);

/// Least-squares slope through the origin of <|S|^2> against t.
double msd_slope(std::span<const std::pair<double, double>> series);

}  // namespace dodewalk
