#include "dodewalk/stats.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "dodewalk/errors.hpp"
#include "dodewalk/summation.hpp"

namespace dodewalk {

double avg_jump_size(const WalkTally& tally) {
    if (tally.jumps == 0) throw std::domain_error("average jump size of a walk with no jumps");
    return tally.jump_nm.value() / static_cast<double>(tally.jumps);
}

double avg_jump_size(const Trajectory& trajectory) {
    WalkTally t;
    for (const auto& r : trajectory.records) t.record(r.type, r.jump_nm);
    return avg_jump_size(t);
}

double nonmarkov_fraction(const WalkTally& tally) {
    if (tally.steps == 0) return 0.0;
    return static_cast<double>(tally.nonmarkovian) / static_cast<double>(tally.steps);
}

double nonmarkov_fraction(const Trajectory& trajectory) {
    WalkTally t;
    for (const auto& r : trajectory.records) t.record(r.type, r.jump_nm);
    return nonmarkov_fraction(t);
}

WalkSummary summarize(const WalkTally& tally, double tau, std::span<const std::int64_t> msd_steps,
                      std::span<const double> msd_nm2, std::string config_hash) {
    WalkSummary s;
    s.n_jumps = tally.jumps;
    s.n_steps = tally.steps;
    s.n_stays = tally.stays;
    s.nonmarkov_fraction = nonmarkov_fraction(tally);
    if (tally.jumps > 0) {
        const double n = static_cast<double>(tally.jumps);
        s.avg_jump_nm = tally.jump_nm.value() / n;
        const double var = tally.jump_nm_sq.value() / n - s.avg_jump_nm * s.avg_jump_nm;
        s.jump_sd_nm = std::sqrt(std::max(0.0, var));
    }
    for (std::size_t i = 0; i < msd_steps.size() && i < msd_nm2.size(); ++i)
        s.msd_series.emplace_back(static_cast<double>(msd_steps[i]) * tau, msd_nm2[i]);
    s.config_hash = std::move(config_hash);
    return s;
}

JumpMoments kernel_jump_moments(const JumpKernel& kernel) {
    CompensatedSum mass, first, second;
    for (std::size_t e = 0; e < kernel.size(); ++e) {
        const double r = kernel.radius[e] * kernel.h;
        mass.add(kernel.prob[e]);
        first.add(kernel.prob[e] * r);
        second.add(kernel.prob[e] * r * r);
    }
    JumpMoments m;
    m.mean_nm = first.value() / mass.value();
    m.sd_nm = std::sqrt(std::max(0.0, second.value() / mass.value() - m.mean_nm * m.mean_nm));
    return m;
}

Histogram occupancy_histogram(std::span<const Offset> positions, int dim, int J) {
    Histogram h;
    h.dim = dim;
    h.J = J;
    DensityGrid shape;
    shape.dim = dim;
    shape.J = J;
    shape.side = 2 * static_cast<std::size_t>(J) + 1;
    h.counts.assign(shape.sites(), 0);
    for (const auto& p : positions) {
        ++h.total;
        if (shape.contains(p))
            ++h.counts[shape.index(p)];
        else
            ++h.outside;
    }
    return h;
}

double tv_distance(const Histogram& histogram, const DensityGrid& density) {
    if (histogram.dim != density.dim || histogram.J != density.J ||
        histogram.counts.size() != density.current().size())
        throw ConfigError(fmt::format("histogram (N={}, J={}) and density (N={}, J={}) differ",
                                      histogram.dim, histogram.J, density.dim, density.J));
    if (histogram.total == 0) throw std::domain_error("empty histogram");
    const double total = static_cast<double>(histogram.total);
    const auto& u = density.current();
    CompensatedSum acc;
    for (std::size_t s = 0; s < u.size(); ++s)
        acc.add(std::fabs(static_cast<double>(histogram.counts[s]) / total - u[s]));
    acc.add(std::fabs(static_cast<double>(histogram.outside) / total - density.boundary_loss));
    return 0.5 * acc.value();
}

std::vector<std::pair<double, double>> msd(const EnsembleResult& ensemble, double tau,
                                           std::size_t ensemble_size) {
    if (ensemble_size < 100) throw std::domain_error("mean squared displacement needs >= 100 walkers");
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < ensemble.msd_steps.size(); ++i)
        out.emplace_back(static_cast<double>(ensemble.msd_steps[i]) * tau, ensemble.msd_nm2[i]);
    return out;
}

double msd_slope(std::span<const std::pair<double, double>> series) {
    CompensatedSum xy, xx;
    for (const auto& [t, m] : series) {
        xy.add(t * m);
        xx.add(t * t);
    }
    return xx.value() > 0.0 ? xy.value() / xx.value() : 0.0;
}

}  // namespace dodewalk
