#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "dodewalk/spacefrac.hpp"
#include "dodewalk/timefrac.hpp"

namespace dodewalk {

/// Markovian block of the one-step transition law.
///
/// Entries carry p_k = nu tau^beta q_k for 0 < |k| <= K in shell order.
/// The cell layout over [0, w_n) is [p_0 | entry 0 | entry 1 | ...].
struct JumpKernel {
    int dim = 2;
    double h = 1.0;
    double tau = 0.0;
    double p0 = 0.0;           // staying probability for steps n >= 1
    double markov_mass = 1.0;  // w_n for n >= 1
    double jump_mass = 0.0;    // sum of all entries, nu tau^beta q_0
    double tail_remainder = 0.0;  // mass beyond K folded into the outermost shell
    double tail_bound = 0.0;      // rigorous bound on that mass
    std::vector<Offset> offsets;
    std::vector<double> prob;
    std::vector<double> radius;      // |k| per entry, lattice units
    std::vector<double> cumulative;  // size entries + 1; cumulative[0] = 0, back() = jump_mass

    [[nodiscard]] std::size_t size() const noexcept { return prob.size(); }
    /// Staying probability at step index n: w_n(n) - jump_mass.
    [[nodiscard]] double p0_at(std::size_t n) const noexcept {
        return n == 0 ? 1.0 - jump_mass : p0;
    }
};

/// Build the kernel. Throws StabilityError if p_0 < -1e-12; p_0 in [-1e-12, 0) is clamped to 0.
JumpKernel build_kernel(const SpectralMixture& mixture, const LatticeGeometry& geometry, double tau,
                        const WeightTable& weights);
JumpKernel build_kernel(const SpectralMixture& mixture, const LatticeGeometry& geometry, double tau,
                        Derivative variant = Derivative::Caputo);

/// Entry index for a deviate in Markovian coordinates, or -1 for "stay".
///
/// `u` lies in [0, w_n); `p0` is the staying probability for the current step.
std::ptrdiff_t sample_jump_index(const JumpKernel& kernel, double u, double p0);
std::ptrdiff_t sample_jump_index(const JumpKernel& kernel, double u);
/// Offset for a deviate in [0, w_n); the zero offset means stay.
Offset sample_jump(const JumpKernel& kernel, double u);

/// Refinement of [0, 1) into the revisit block [0, 1 - w_n) and the Markovian block.
struct SamplerPartition {
    const JumpKernel* kernel = nullptr;
    std::size_t n = 0;
    double p1_width = 0.0;     // 1 - w_n
    double markov_mass = 1.0;  // w_n
    double p0 = 0.0;
    std::vector<double> cuts;  // B_0 .. B_n, prefix sums of w_0 .. w_{n-1}
};

SamplerPartition build_partition(const WeightTable& weights, const JumpKernel& kernel);

struct Revisit {
    std::size_t m = 0;  // return to S_m
    bool operator==(const Revisit&) const = default;
};
struct Jump {
    std::ptrdiff_t entry = -1;  // kernel entry, -1 for stay
    bool operator==(const Jump&) const = default;
};
using StepChoice = std::variant<Revisit, Jump>;

/// Classify a deviate u in [0, 1) against an explicit partition.
StepChoice sample_step(const SamplerPartition& partition, double u);

/// Same classification without materializing the cuts: because
/// B_j = gamma_{n+1-j} for j >= 1, the revisit cell is found by searching the
/// shared gamma table. `coeffs` must cover index n.
StepChoice sample_step(const JumpKernel& kernel, const MemoryCoefficients& coeffs, std::size_t n,
                       double u);

}  // namespace dodewalk
