#include "dodewalk/fdsolve.hpp"

#include <cstring>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fftw3.h>
#include <fmt/format.h>

#include "dodewalk/errors.hpp"
#include "dodewalk/summation.hpp"

namespace dodewalk {

namespace {

constexpr std::size_t kDirectEntryLimit = 64;

std::size_t pow_size(std::size_t base, int exp) {
    std::size_t r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

std::size_t smooth_size(std::size_t min) {
    for (std::size_t n = min;; ++n) {
        std::size_t m = n;
        for (std::size_t p : {2, 3, 5, 7})
            while (m % p == 0) m /= p;
        if (m == 1) return n;
    }
}

std::size_t wrap(std::int64_t x, std::size_t L) {
    const auto l = static_cast<std::int64_t>(L);
    return static_cast<std::size_t>(((x % l) + l) % l);
}

}  // namespace

std::size_t DensityGrid::sites() const noexcept { return pow_size(side, dim); }

bool DensityGrid::contains(const Offset& j) const noexcept {
    for (int i = 0; i < dim; ++i)
        if (j[i] < -J || j[i] > J) return false;
    return true;
}

std::size_t DensityGrid::index(const Offset& j) const noexcept {
    std::size_t idx = 0;
    for (int i = 0; i < dim; ++i) idx = idx * side + static_cast<std::size_t>(j[i] + J);
    return idx;
}

Offset DensityGrid::site(std::size_t index) const noexcept {
    Offset j{};
    for (int i = dim - 1; i >= 0; --i) {
        j[i] = static_cast<std::int64_t>(index % side) - J;
        index /= side;
    }
    return j;
}

double DensityGrid::mass() const { return compensated_sum(current()); }

DensityGrid delta_initial(int dim, int J, double tau, double h, bool full_history) {
    if (dim < 1 || dim > 2) throw ConfigError("density solver supports dimensions 1 and 2");
    if (J < 1) throw ConfigError(fmt::format("box radius J must be >= 1, got {}", J));
    DensityGrid g;
    g.dim = dim;
    g.J = J;
    g.side = 2 * static_cast<std::size_t>(J) + 1;
    g.tau = tau;
    g.h = h;
    g.full_history = full_history;
    g.history.emplace_back(g.sites(), 0.0);
    g.history[0][g.index(Offset{})] = 1.0;
    g.loss_history.push_back(0.0);
    g.ledger.push_back({0, 1.0, 0.0, 0.0});
    return g;
}

struct ConvolutionPlan::FftState {
    std::size_t L = 0;
    std::size_t real_size = 0;
    std::size_t complex_size = 0;
    double* in = nullptr;
    fftw_complex* spec = nullptr;
    fftw_complex* kernel_spec = nullptr;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    std::vector<std::size_t> box_to_padded;
    std::vector<double> escape;

    ~FftState() {
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
        fftw_free(in);
        fftw_free(spec);
        fftw_free(kernel_spec);
    }

    // in <- in (*) kernel, circular.
    void convolve_in_place() {
        fftw_execute(forward);
        for (std::size_t i = 0; i < complex_size; ++i) {
            const double re = spec[i][0] * kernel_spec[i][0] - spec[i][1] * kernel_spec[i][1];
            const double im = spec[i][0] * kernel_spec[i][1] + spec[i][1] * kernel_spec[i][0];
            spec[i][0] = re;
            spec[i][1] = im;
        }
        fftw_execute(backward);
        const double scale = 1.0 / static_cast<double>(real_size);
        for (std::size_t i = 0; i < real_size; ++i) in[i] *= scale;
    }
};

ConvolutionPlan::ConvolutionPlan(const JumpKernel& kernel, int dim, int J, ConvolutionMethod method)
    : dim_(dim), J_(J), side_(2 * static_cast<std::size_t>(J) + 1), method_(method) {
    if (dim != kernel.dim) throw ConfigError("kernel and grid dimensions differ");
    if (dim < 1 || dim > 2) throw ConfigError("density solver supports dimensions 1 and 2");
    const std::int64_t reach = 2 * static_cast<std::int64_t>(J);
    CompensatedSum far;
    for (std::size_t e = 0; e < kernel.size(); ++e) {
        const Offset& k = kernel.offsets[e];
        bool near = true;
        std::ptrdiff_t shift = 0;
        for (int i = 0; i < dim; ++i) {
            if (k[i] < -reach || k[i] > reach) near = false;
            shift = shift * static_cast<std::ptrdiff_t>(side_) + static_cast<std::ptrdiff_t>(k[i]);
        }
        if (!near) {
            far.add(kernel.prob[e]);
            continue;
        }
        near_offset_.push_back(k);
        near_prob_.push_back(kernel.prob[e]);
        near_shift_.push_back(shift);
    }
    far_mass_ = far.value();
    if (method_ == ConvolutionMethod::Auto)
        method_ = near_prob_.size() <= kDirectEntryLimit ? ConvolutionMethod::Direct
                                                         : ConvolutionMethod::Fft;
    if (method_ != ConvolutionMethod::Fft) return;

    fft_ = std::make_unique<FftState>();
    auto& f = *fft_;
    f.L = smooth_size(4 * static_cast<std::size_t>(J) + 1);
    f.real_size = pow_size(f.L, dim);
    f.complex_size = pow_size(f.L, dim - 1) * (f.L / 2 + 1);
    f.in = fftw_alloc_real(f.real_size);
    f.spec = fftw_alloc_complex(f.complex_size);
    f.kernel_spec = fftw_alloc_complex(f.complex_size);
    const int dims[2] = {static_cast<int>(f.L), static_cast<int>(f.L)};
    // FFTW_ESTIMATE keeps plan choice, and therefore results, reproducible.
    f.forward = fftw_plan_dft_r2c(dim, dims, f.in, f.spec, FFTW_ESTIMATE);
    f.backward = fftw_plan_dft_c2r(dim, dims, f.spec, f.in, FFTW_ESTIMATE);

    auto padded = [&](const Offset& k) {
        std::size_t idx = 0;
        for (int i = 0; i < dim; ++i) idx = idx * f.L + wrap(k[i], f.L);
        return idx;
    };

    std::fill(f.in, f.in + f.real_size, 0.0);
    for (std::size_t e = 0; e < near_prob_.size(); ++e) f.in[padded(near_offset_[e])] += near_prob_[e];
    fftw_execute(f.forward);
    std::memcpy(f.kernel_spec, f.spec, sizeof(fftw_complex) * f.complex_size);

    const std::size_t sites = pow_size(side_, dim);
    f.box_to_padded.resize(sites);
    DensityGrid shape;
    shape.dim = dim;
    shape.J = J;
    shape.side = side_;
    for (std::size_t s = 0; s < sites; ++s) f.box_to_padded[s] = padded(shape.site(s));

    // Mass retained in the box from each site; the kernel is symmetric under k -> -k.
    std::fill(f.in, f.in + f.real_size, 0.0);
    for (std::size_t s = 0; s < sites; ++s) f.in[f.box_to_padded[s]] = 1.0;
    f.convolve_in_place();
    const double jump_mass = compensated_sum(near_prob_) + far_mass_;
    f.escape.resize(sites);
    for (std::size_t s = 0; s < sites; ++s)
        f.escape[s] = std::max(0.0, jump_mass - f.in[f.box_to_padded[s]]);
}

ConvolutionPlan::~ConvolutionPlan() = default;
ConvolutionPlan::ConvolutionPlan(ConvolutionPlan&&) noexcept = default;
ConvolutionPlan& ConvolutionPlan::operator=(ConvolutionPlan&&) noexcept = default;

double ConvolutionPlan::apply(std::span<const double> u, std::span<double> out) const {
    const std::size_t sites = pow_size(side_, dim_);
    if (u.size() != sites || out.size() != sites) throw std::invalid_argument("grid size mismatch");
    std::fill(out.begin(), out.end(), 0.0);
    CompensatedSum loss;

    if (method_ == ConvolutionMethod::Fft) {
        auto& f = *fft_;
        std::fill(f.in, f.in + f.real_size, 0.0);
        for (std::size_t s = 0; s < sites; ++s) {
            f.in[f.box_to_padded[s]] = u[s];
            if (u[s] != 0.0) loss.add(u[s] * f.escape[s]);
        }
        f.convolve_in_place();
        // Round-off can leave values of order 1e-18 below zero.
        for (std::size_t s = 0; s < sites; ++s) out[s] = std::max(0.0, f.in[f.box_to_padded[s]]);
        return loss.value();
    }

    DensityGrid shape;
    shape.dim = dim_;
    shape.J = J_;
    shape.side = side_;
    for (std::size_t s = 0; s < sites; ++s) {
        const double us = u[s];
        if (us == 0.0) continue;
        const Offset j = shape.site(s);
        if (far_mass_ > 0.0) loss.add(us * far_mass_);
        for (std::size_t e = 0; e < near_prob_.size(); ++e) {
            const Offset& k = near_offset_[e];
            bool inside = true;
            for (int i = 0; i < dim_; ++i) {
                const std::int64_t t = j[i] + k[i];
                if (t < -J_ || t > J_) inside = false;
            }
            if (inside)
                out[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(s) + near_shift_[e])] +=
                    us * near_prob_[e];
            else
                loss.add(us * near_prob_[e]);
        }
    }
    return loss.value();
}

void fd_step(DensityGrid& grid, const ConvolutionPlan& plan, const JumpKernel& kernel,
             const WeightTable& weights, const FdOptions& options) {
    if (weights.n != grid.n)
        throw std::invalid_argument(
            fmt::format("weight table is for n = {} but the grid is at n = {}", weights.n, grid.n));
    const std::size_t n = grid.n;
    const double p0 = weights.markov_mass() - kernel.jump_mass;
    if (p0 < -1e-12) throw StabilityError("negative staying probability: time step is unstable");

    const auto& un = grid.current();
    std::vector<double> next(un.size(), 0.0);
    const double step_loss = plan.apply(un, next);
    const double stay = std::max(0.0, p0);
    for (std::size_t s = 0; s < un.size(); ++s) next[s] += stay * un[s];

    // Memory sum over u^0..u^{n-1}, and the same recursion for the outside compartment.
    CompensatedSum outside;
    outside.add(weights.markov_mass() * grid.loss_history.back());
    outside.add(step_loss);
    bool memory = false;
    for (std::size_t m = 0; m < n; ++m) memory = memory || weights.w[m] != 0.0;
    if (memory) {
        if (!grid.full_history)
            throw std::logic_error("memory terms need the full density history");
        for (std::size_t m = 0; m < n; ++m) {
            const double wm = weights.w[m];
            if (wm == 0.0) continue;
            const auto& um = grid.history[m];
            for (std::size_t s = 0; s < un.size(); ++s) next[s] += wm * um[s];
            outside.add(wm * grid.loss_history[m]);
        }
    }

    grid.boundary_loss = outside.value();
    if (grid.full_history) {
        grid.history.push_back(std::move(next));
        grid.loss_history.push_back(grid.boundary_loss);
    } else {
        grid.history.back() = std::move(next);
        grid.loss_history.back() = grid.boundary_loss;
    }
    grid.n = n + 1;
    const double in_box = grid.mass();
    grid.ledger.push_back({grid.n, in_box, grid.boundary_loss, in_box + grid.boundary_loss - 1.0});
    if (grid.boundary_loss > options.loss_threshold)
        throw BoundaryLossError(fmt::format(
            "boundary loss {} exceeds the threshold {} at step {}: enlarge the box (J = {})",
            grid.boundary_loss, options.loss_threshold, grid.n, grid.J));
}

void fd_step(DensityGrid& grid, const JumpKernel& kernel, const WeightTable& weights,
             const FdOptions& options) {
    const ConvolutionPlan plan(kernel, grid.dim, grid.J, ConvolutionMethod::Direct);
    fd_step(grid, plan, kernel, weights, options);
}

DensityGrid fd_run(const JumpKernel& kernel, MemoryCoefficients& coeffs, DensityGrid initial,
                   std::size_t n_steps, const FdOptions& options, const SnapshotFn& snapshot) {
    if (kernel.markov_mass != markov_weight(coeffs.variant(), coeffs.beta()))
        throw ConfigError("kernel and memory coefficients disagree on the derivative variant");
    DensityGrid grid = std::move(initial);
    if (grid.n == 0 && coeffs.beta() == 1.0) grid.full_history = false;
    if (!grid.full_history && grid.history.size() > 1) {
        grid.history.erase(grid.history.begin(), grid.history.end() - 1);
        grid.loss_history.erase(grid.loss_history.begin(), grid.loss_history.end() - 1);
    }
    const ConvolutionPlan plan(kernel, grid.dim, grid.J, options.method);
    coeffs.extend_to(grid.n + n_steps);
    for (std::size_t i = 0; i < n_steps; ++i) {
        fd_step(grid, plan, kernel, coeffs.table(grid.n), options);
        if (snapshot) snapshot(grid);
    }
    return grid;
}

}  // namespace dodewalk
