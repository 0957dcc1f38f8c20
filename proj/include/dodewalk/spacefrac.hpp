#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "dodewalk/timefrac.hpp"

namespace dodewalk {

inline constexpr int kMaxDim = 3;

/// Lattice offset or site in units of h; unused trailing axes are zero.
using Offset = std::array<std::int64_t, kMaxDim>;

/// One term a_m * delta(alpha - alpha_m) of the order distribution.
/// `a` is in nm^alpha / s^beta (internal units are nanometers and seconds).
struct MixtureTerm {
    double alpha = 2.0;
    double a = 0.0;
};

struct SpectralMixture {
    std::vector<MixtureTerm> terms;
    double beta = 1.0;

    /// Throws ConfigError unless 0 < alpha_1 < ... < alpha_M <= 2, a_m > 0, beta in (0, 1].
    void validate() const;
    [[nodiscard]] bool pure_laplacian() const noexcept;
};

/// All offsets k with |k|^2 equal to radius_sq (Euclidean norm).
struct Shell {
    std::int64_t radius_sq = 0;
    double radius = 0.0;
    std::size_t first = 0;  // index into LatticeGeometry::offsets
    std::size_t count = 0;
};

struct LatticeGeometry {
    int dim = 2;
    double h = 1.0;  // nm
    int K = 1;       // truncation radius, 0 < |k| <= K
    std::vector<Shell> shells;
    std::vector<Offset> offsets;  // ascending |k|^2, lexicographic within a shell
};

inline constexpr std::size_t kDefaultOffsetBudget = 20'000'000;

/// Enumerate every offset with 0 < |k| <= K grouped into exact-radius shells.
LatticeGeometry build_shells(int dim, int K, double h = 1.0,
                             std::size_t max_offsets = kDefaultOffsetBudget);

/// [Gamma(1 + alpha/2)]^2 sin(alpha pi / 2) / (pi^2 2^{N - alpha - 1}); exactly 0 at alpha = 2.
double b_coeff(double alpha, int dim);

/// Truncated lattice sum sum_{0<|k|<=K} |k|^{-(N+alpha)} and its tail sum_{|k|>K}.
struct LatticeSum {
    double value = 0.0;
    double tail_bound = 0.0;     // rigorous overestimate of the tail
    double tail_estimate = 0.0;  // best estimate of the tail (Euler-Maclaurin in 1D)
};

LatticeSum lattice_sum(double alpha, int dim, std::int64_t K);
/// Same sum accumulated over an existing shell table.
LatticeSum lattice_sum(double alpha, const LatticeGeometry& geometry);

/// q_k for an offset; depends on |k| only. Throws on k = 0.
double q_coefficient(const Offset& k, const SpectralMixture& mixture,
                     const LatticeGeometry& geometry);
/// q_k for every member of a shell.
double q_shell(const Shell& shell, const SpectralMixture& mixture, const LatticeGeometry& geometry);

struct TermRate {
    double alpha = 0.0;
    double a = 0.0;
    double b = 0.0;
    LatticeSum lattice;    // unset (zeros) for alpha = 2
    double rate = 0.0;     // contribution to q_0 including the tail estimate
    double tail_rate = 0.0;        // a b tail_estimate / h^alpha
    double tail_bound_rate = 0.0;  // a b tail_bound / h^alpha
};

/// q_0 = sum_{k != 0} q_k, split by term.
struct KernelRates {
    std::vector<TermRate> terms;
    double q0 = 0.0;            // truncated sum + tail estimate + Laplacian part
    double q0_truncated = 0.0;  // sum over 0 < |k| <= K only
    double tail_rate = 0.0;
    double tail_bound_rate = 0.0;
};

KernelRates q_zero(const SpectralMixture& mixture, const LatticeGeometry& geometry);

/// Time step giving staying probability p0 for n >= 1:
/// tau = ((w_n - p0) / (nu q_0))^{1/beta}. Throws InfeasibleError if p0 >= w_n.
double tau_for_p0(const SpectralMixture& mixture, const LatticeGeometry& geometry, double p0,
                  Derivative variant = Derivative::Caputo);
double tau_for_p0(const SpectralMixture& mixture, const KernelRates& rates, double p0,
                  Derivative variant = Derivative::Caputo);

struct StabilityReport {
    bool stable = false;
    double tau_max = 0.0;
    double margin = 0.0;  // tau_max - tau
};

/// tau <= tau_max = (w_n / (nu q_0))^{1/beta}, compared with 1e-12 relative slack.
StabilityReport stability_check(const SpectralMixture& mixture, const LatticeGeometry& geometry,
                                double tau, Derivative variant = Derivative::Caputo);
StabilityReport stability_check(const SpectralMixture& mixture, const KernelRates& rates,
                                double tau, Derivative variant = Derivative::Caputo);

}  // namespace dodewalk
