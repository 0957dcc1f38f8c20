#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "dodewalk/spacefrac.hpp"
#include "dodewalk/timefrac.hpp"
#include "dodewalk/transition.hpp"

namespace dodewalk {

struct MassLedgerEntry {
    std::size_t n = 0;
    double in_box = 0.0;
    double boundary_loss = 0.0;
    double defect = 0.0;  // in_box + boundary_loss - 1
};

/// Probability mass on the box |j_i| <= J together with its past.
///
/// Mass that leaves the box is kept as a scalar outside compartment that
/// takes part in the memory sum like any site, so in-box mass plus
/// boundary_loss stays 1 for every beta.
struct DensityGrid {
    int dim = 2;
    int J = 0;
    std::size_t side = 1;
    double tau = 0.0;
    double h = 1.0;
    std::size_t n = 0;
    bool full_history = true;
    std::vector<std::vector<double>> history;  // u^0..u^n, or only u^n without full history
    std::vector<double> loss_history;          // boundary_loss at each retained step
    double boundary_loss = 0.0;
    std::vector<MassLedgerEntry> ledger;

    [[nodiscard]] std::size_t sites() const noexcept;
    [[nodiscard]] const std::vector<double>& current() const { return history.back(); }
    [[nodiscard]] bool contains(const Offset& j) const noexcept;
    [[nodiscard]] std::size_t index(const Offset& j) const noexcept;
    [[nodiscard]] Offset site(std::size_t index) const noexcept;
    [[nodiscard]] double mass() const;
};

/// Unit mass at the origin.
DensityGrid delta_initial(int dim, int J, double tau, double h, bool full_history = true);

enum class ConvolutionMethod { Auto, Direct, Fft };

/// Markovian part of one step restricted to the box:
/// out_j = sum_{k != 0} p_k u_{j-k}, returning the mass carried outside.
class ConvolutionPlan {
public:
    ConvolutionPlan(const JumpKernel& kernel, int dim, int J,
                    ConvolutionMethod method = ConvolutionMethod::Auto);
    ~ConvolutionPlan();
    ConvolutionPlan(ConvolutionPlan&&) noexcept;
    ConvolutionPlan& operator=(ConvolutionPlan&&) noexcept;

    double apply(std::span<const double> u, std::span<double> out) const;
    [[nodiscard]] ConvolutionMethod method() const noexcept { return method_; }

private:
    struct FftState;
    int dim_;
    int J_;
    std::size_t side_;
    ConvolutionMethod method_;
    double far_mass_ = 0.0;  // entries with some |k_i| > 2J always leave the box
    std::vector<std::ptrdiff_t> near_shift_;
    std::vector<Offset> near_offset_;
    std::vector<double> near_prob_;
    std::unique_ptr<FftState> fft_;
};

struct FdOptions {
    double loss_threshold = 1e-3;
    ConvolutionMethod method = ConvolutionMethod::Auto;
};

/// One explicit step: u^{n+1} = sum_{m<n} w_m u^m + p_0 u^n + sum_{k!=0} p_k u^n_{j-k}.
/// `weights` must be the table for the grid's current n.
void fd_step(DensityGrid& grid, const ConvolutionPlan& plan, const JumpKernel& kernel,
             const WeightTable& weights, const FdOptions& options = {});
/// Convenience overload building a direct-convolution plan.
void fd_step(DensityGrid& grid, const JumpKernel& kernel, const WeightTable& weights,
             const FdOptions& options = {});

using SnapshotFn = std::function<void(const DensityGrid&)>;

/// Iterate fd_step n_steps times with per-step weight tables.
DensityGrid fd_run(const JumpKernel& kernel, MemoryCoefficients& coeffs, DensityGrid initial,
                   std::size_t n_steps, const FdOptions& options = {},
                   const SnapshotFn& snapshot = {});

}  // namespace dodewalk
