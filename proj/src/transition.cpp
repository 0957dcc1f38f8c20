#include "dodewalk/transition.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "dodewalk/errors.hpp"
#include "dodewalk/summation.hpp"

namespace dodewalk {

namespace {

constexpr double kClampTolerance = 1e-12;

std::ptrdiff_t locate(const std::vector<double>& cumulative, double x) {
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
    const auto idx = static_cast<std::ptrdiff_t>(it - cumulative.begin()) - 1;
    const auto last = static_cast<std::ptrdiff_t>(cumulative.size()) - 2;
    return std::clamp<std::ptrdiff_t>(idx, 0, last);
}

}  // namespace

JumpKernel build_kernel(const SpectralMixture& mixture, const LatticeGeometry& geometry, double tau,
                        Derivative variant) {
    mixture.validate();
    if (!(tau > 0.0)) throw ConfigError(fmt::format("tau must be positive, got {}", tau));
    const KernelRates rates = q_zero(mixture, geometry);
    const double nu = time_scale_factor(variant, mixture.beta);
    const double scale = nu * std::pow(tau, mixture.beta);

    JumpKernel k;
    k.dim = geometry.dim;
    k.h = geometry.h;
    k.tau = tau;
    k.markov_mass = markov_weight(variant, mixture.beta);
    k.tail_remainder = scale * rates.tail_rate;
    k.tail_bound = scale * rates.tail_bound_rate;

    std::size_t outer_first = 0;
    std::size_t outer_count = 0;
    for (const auto& shell : geometry.shells) {
        const double q = q_shell(shell, mixture, geometry);
        if (q <= 0.0) continue;
        outer_first = k.prob.size();
        outer_count = shell.count;
        for (std::size_t i = 0; i < shell.count; ++i) {
            k.offsets.push_back(geometry.offsets[shell.first + i]);
            k.prob.push_back(scale * q);
            k.radius.push_back(shell.radius);
        }
    }
    if (k.prob.empty()) throw ConfigError("kernel has no positive jump probabilities");
    if (k.tail_remainder > 0.0) {
        const double share = k.tail_remainder / static_cast<double>(outer_count);
        for (std::size_t i = 0; i < outer_count; ++i) k.prob[outer_first + i] += share;
    }

    k.cumulative.resize(k.prob.size() + 1);
    k.cumulative[0] = 0.0;
    CompensatedSum acc;
    for (std::size_t i = 0; i < k.prob.size(); ++i) {
        acc.add(k.prob[i]);
        k.cumulative[i + 1] = acc.value();
    }
    k.jump_mass = k.cumulative.back();
    k.p0 = k.markov_mass - k.jump_mass;
    if (k.p0 < -kClampTolerance) {
        const double tau_max = std::pow(k.markov_mass / (nu * rates.q0), 1.0 / mixture.beta);
        throw StabilityError(fmt::format(
            "unstable time step: tau = {} s exceeds tau_max = {} s "
            "(need nu tau^beta q_0 <= w_n, i.e. p_0 = {} >= 0)",
            tau, tau_max, k.p0));
    }
    if (k.p0 < 0.0) k.p0 = 0.0;
    return k;
}

JumpKernel build_kernel(const SpectralMixture& mixture, const LatticeGeometry& geometry, double tau,
                        const WeightTable& weights) {
    if (weights.beta != mixture.beta)
        throw ConfigError("weight table and mixture disagree on beta");
    return build_kernel(mixture, geometry, tau, weights.variant);
}

std::ptrdiff_t sample_jump_index(const JumpKernel& kernel, double u, double p0) {
    if (u < p0) return -1;
    return locate(kernel.cumulative, u - p0);
}

std::ptrdiff_t sample_jump_index(const JumpKernel& kernel, double u) {
    return sample_jump_index(kernel, u, kernel.p0);
}

Offset sample_jump(const JumpKernel& kernel, double u) {
    const auto idx = sample_jump_index(kernel, u);
    return idx < 0 ? Offset{} : kernel.offsets[static_cast<std::size_t>(idx)];
}

SamplerPartition build_partition(const WeightTable& weights, const JumpKernel& kernel) {
    SamplerPartition p;
    p.kernel = &kernel;
    p.n = weights.n;
    p.cuts.resize(weights.n + 1);
    p.cuts[0] = 0.0;
    CompensatedSum acc;
    for (std::size_t j = 0; j < weights.n; ++j) {
        acc.add(weights.w[j]);
        p.cuts[j + 1] = acc.value();
    }
    p.p1_width = p.cuts.back();
    p.markov_mass = weights.markov_mass();
    p.p0 = p.markov_mass - kernel.jump_mass;
    if (p.p0 < 0.0) p.p0 = 0.0;
    return p;
}

StepChoice sample_step(const SamplerPartition& partition, double u) {
    if (u < partition.p1_width) {
        const auto j = locate(partition.cuts, u);
        return Revisit{static_cast<std::size_t>(j)};
    }
    return Jump{sample_jump_index(*partition.kernel, u - partition.p1_width, partition.p0)};
}

StepChoice sample_step(const JumpKernel& kernel, const MemoryCoefficients& coeffs, std::size_t n,
                       double u) {
    if (n == 0) return Jump{sample_jump_index(kernel, u, kernel.p0_at(0))};
    const auto g = coeffs.gammas();
    const double p1 = g[1];
    if (u < p1) {
        // first l in [1, n] with gamma_l <= u; gamma is non-increasing.
        const auto first = g.begin() + 1;
        const auto last = g.begin() + static_cast<std::ptrdiff_t>(n) + 1;
        const auto it = std::partition_point(first, last, [u](double x) { return x > u; });
        const auto f = static_cast<std::size_t>(it - g.begin());
        return Revisit{n + 1 - f};
    }
    return Jump{sample_jump_index(kernel, u - p1, kernel.p0)};
}

}  // namespace dodewalk
