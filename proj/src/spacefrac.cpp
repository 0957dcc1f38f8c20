#include "dodewalk/spacefrac.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "dodewalk/errors.hpp"
#include "dodewalk/summation.hpp"

namespace dodewalk {

namespace {

void check_dim(int dim) {
    if (dim < 1 || dim > kMaxDim)
        throw ConfigError(fmt::format("dimension must be in [1, {}], got {}", kMaxDim, dim));
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha <= 2.0))
        throw ConfigError(fmt::format("alpha must lie in (0, 2], got {}", alpha));
}

// Visit every k in the closed positive orthant with 0 < |k|^2 <= K^2, passing
// |k|^2 and the number of sign-symmetric images of k.
template <typename Visit>
void for_each_orthant_point(int dim, std::int64_t K, Visit&& visit) {
    const std::int64_t K2 = K * K;
    auto mult = [](std::int64_t x) { return x > 0 ? 2 : 1; };
    switch (dim) {
    case 1:
        for (std::int64_t x = K; x >= 1; --x) visit(x * x, 2);
        break;
    case 2:
        for (std::int64_t x = K; x >= 0; --x) {
            const std::int64_t rem = K2 - x * x;
            for (std::int64_t y = static_cast<std::int64_t>(std::sqrt(static_cast<double>(rem))) + 1;
                 y >= 0; --y) {
                const std::int64_t r2 = x * x + y * y;
                if (r2 == 0 || r2 > K2) continue;
                visit(r2, mult(x) * mult(y));
            }
        }
        break;
    default:
        for (std::int64_t x = K; x >= 0; --x)
            for (std::int64_t y = K; y >= 0; --y) {
                const std::int64_t xy = x * x + y * y;
                if (xy > K2) continue;
                for (std::int64_t z = K; z >= 0; --z) {
                    const std::int64_t r2 = xy + z * z;
                    if (r2 == 0 || r2 > K2) continue;
                    visit(r2, mult(x) * mult(y) * mult(z));
                }
            }
        break;
    }
}

double surface_measure(int dim) {
    return 2.0 * std::pow(std::numbers::pi, dim / 2.0) / std::tgamma(dim / 2.0);
}

double truncated_sum(double alpha, int dim, std::int64_t K) {
    const double s = dim + alpha;
    CompensatedSum acc;
    for_each_orthant_point(dim, K, [&](std::int64_t r2, int m) {
        acc.add(m * std::pow(static_cast<double>(r2), -0.5 * s));
    });
    return acc.value();
}

// Rigorous tail bound. Each unit cube around a lattice point k with |k| > K
// lies in |x| > K - d (d = sqrt(N)/2) and f(|x| - d) >= f(|k|) on it.
double tail_bound(double alpha, int dim, std::int64_t K) {
    const double s = dim + alpha;
    if (dim == 1) return 2.0 * std::pow(static_cast<double>(K), -alpha) / alpha;
    const double d = std::sqrt(static_cast<double>(dim)) / 2.0;
    if (static_cast<double>(K) <= 2.0 * d) {
        const auto K2 = static_cast<std::int64_t>(std::ceil(2.0 * d)) + 1;
        return truncated_sum(alpha, dim, K2) - truncated_sum(alpha, dim, K) +
               tail_bound(alpha, dim, K2);
    }
    const double lower = static_cast<double>(K) - 2.0 * d;
    double integral = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= dim - 1; ++j) {
        integral += binom * std::pow(d, dim - 1 - j) * std::pow(lower, j + 1 - s) / (s - j - 1);
        binom = binom * (dim - 1 - j) / (j + 1);
    }
    return surface_measure(dim) * integral;
}

double tail_estimate(double alpha, int dim, std::int64_t K) {
    const double s = dim + alpha;
    const double k = static_cast<double>(K);
    if (dim == 1) {
        // Euler-Maclaurin for sum_{j>K} j^{-s}, both signs.
        const double em = std::pow(k, 1.0 - s) / (s - 1.0) - 0.5 * std::pow(k, -s) +
                          s * std::pow(k, -s - 1.0) / 12.0 -
                          s * (s + 1.0) * (s + 2.0) * std::pow(k, -s - 3.0) / 720.0;
        return 2.0 * em;
    }
    return surface_measure(dim) * std::pow(k, -alpha) / alpha;
}

bool is_laplacian(double alpha) { return alpha == 2.0; }

}  // namespace

void SpectralMixture::validate() const {
    if (terms.empty()) throw ConfigError("mixture needs at least one (alpha, a) term");
    if (!(beta > 0.0 && beta <= 1.0))
        throw ConfigError(fmt::format("beta must lie in (0, 1], got {}", beta));
    for (std::size_t m = 0; m < terms.size(); ++m) {
        check_alpha(terms[m].alpha);
        if (!(terms[m].a > 0.0))
            throw ConfigError(fmt::format("diffusion coefficient a_{} must be positive, got {}",
                                          m + 1, terms[m].a));
        if (m > 0 && !(terms[m].alpha > terms[m - 1].alpha))
            throw ConfigError("alpha values must be strictly increasing");
    }
}

bool SpectralMixture::pure_laplacian() const noexcept {
    return std::all_of(terms.begin(), terms.end(),
                       [](const MixtureTerm& t) { return is_laplacian(t.alpha); });
}

LatticeGeometry build_shells(int dim, int K, double h, std::size_t max_offsets) {
    check_dim(dim);
    if (K < 1) throw ConfigError(fmt::format("truncation radius K must be >= 1, got {}", K));
    if (!(h > 0.0)) throw ConfigError(fmt::format("lattice spacing h must be positive, got {}", h));
    const double side = 2.0 * K + 1.0;
    const double box = std::pow(side, dim);
    if (box > static_cast<double>(max_offsets) * 4.0)
        throw ConfigError(fmt::format(
            "shell enumeration for N={} K={} exceeds the budget of {} offsets", dim, K, max_offsets));

    LatticeGeometry g;
    g.dim = dim;
    g.h = h;
    g.K = K;
    const std::int64_t K2 = static_cast<std::int64_t>(K) * K;
    std::vector<std::pair<std::int64_t, Offset>> items;
    Offset k{};
    auto recurse = [&](auto&& self, int axis, std::int64_t r2) -> void {
        if (axis == dim) {
            if (r2 > 0 && r2 <= K2) items.emplace_back(r2, k);
            return;
        }
        for (std::int64_t x = -K; x <= K; ++x) {
            const std::int64_t next = r2 + x * x;
            if (next > K2) continue;
            k[axis] = x;
            self(self, axis + 1, next);
        }
        k[axis] = 0;
    };
    recurse(recurse, 0, 0);
    if (items.size() > max_offsets)
        throw ConfigError(fmt::format(
            "shell enumeration for N={} K={} exceeds the budget of {} offsets", dim, K, max_offsets));
    // Enumeration is already lexicographic; a stable sort by radius keeps that within a shell.
    std::stable_sort(items.begin(), items.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });

    g.offsets.reserve(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i == 0 || items[i].first != items[i - 1].first) {
            Shell s;
            s.radius_sq = items[i].first;
            s.radius = std::sqrt(static_cast<double>(s.radius_sq));
            s.first = i;
            g.shells.push_back(s);
        }
        ++g.shells.back().count;
        g.offsets.push_back(items[i].second);
    }
    return g;
}

double b_coeff(double alpha, int dim) {
    check_alpha(alpha);
    check_dim(dim);
    if (is_laplacian(alpha)) return 0.0;
    const double g = std::tgamma(1.0 + alpha / 2.0);
    return g * g * std::sin(alpha / 2.0 * std::numbers::pi) /
           (std::numbers::pi * std::numbers::pi * std::pow(2.0, dim - alpha - 1.0));
}

LatticeSum lattice_sum(double alpha, int dim, std::int64_t K) {
    check_alpha(alpha);
    check_dim(dim);
    if (K < 1) throw ConfigError("truncation radius K must be >= 1");
    return {truncated_sum(alpha, dim, K), tail_bound(alpha, dim, K), tail_estimate(alpha, dim, K)};
}

LatticeSum lattice_sum(double alpha, const LatticeGeometry& geometry) {
    check_alpha(alpha);
    const double s = geometry.dim + alpha;
    CompensatedSum acc;
    for (auto it = geometry.shells.rbegin(); it != geometry.shells.rend(); ++it)
        acc.add(static_cast<double>(it->count) * std::pow(static_cast<double>(it->radius_sq), -0.5 * s));
    return {acc.value(), tail_bound(alpha, geometry.dim, geometry.K),
            tail_estimate(alpha, geometry.dim, geometry.K)};
}

namespace {

double q_at_radius(std::int64_t radius_sq, const SpectralMixture& mixture,
                   const LatticeGeometry& geometry) {
    const int n = geometry.dim;
    double q = 0.0;
    for (const auto& t : mixture.terms) {
        if (is_laplacian(t.alpha)) {
            if (radius_sq == 1) q += t.a / (geometry.h * geometry.h);
        } else {
            q += t.a * b_coeff(t.alpha, n) *
                 std::pow(static_cast<double>(radius_sq), -0.5 * (n + t.alpha)) /
                 std::pow(geometry.h, t.alpha);
        }
    }
    return q;
}

}  // namespace

double q_coefficient(const Offset& k, const SpectralMixture& mixture,
                     const LatticeGeometry& geometry) {
    std::int64_t r2 = 0;
    for (int i = 0; i < geometry.dim; ++i) r2 += k[i] * k[i];
    if (r2 == 0) throw ConfigError("q_k is undefined for the zero offset");
    if (r2 > static_cast<std::int64_t>(geometry.K) * geometry.K)
        throw ConfigError("offset lies outside the truncation radius");
    return q_at_radius(r2, mixture, geometry);
}

double q_shell(const Shell& shell, const SpectralMixture& mixture, const LatticeGeometry& geometry) {
    return q_at_radius(shell.radius_sq, mixture, geometry);
}

KernelRates q_zero(const SpectralMixture& mixture, const LatticeGeometry& geometry) {
    mixture.validate();
    KernelRates out;
    CompensatedSum q0, q0_trunc, tail, tail_bound_sum;
    for (const auto& t : mixture.terms) {
        TermRate r;
        r.alpha = t.alpha;
        r.a = t.a;
        r.b = b_coeff(t.alpha, geometry.dim);
        if (is_laplacian(t.alpha)) {
            r.rate = 2.0 * geometry.dim * t.a / (geometry.h * geometry.h);
            q0_trunc.add(r.rate);
        } else {
            r.lattice = lattice_sum(t.alpha, geometry);
            const double scale = t.a * r.b / std::pow(geometry.h, t.alpha);
            r.tail_rate = scale * r.lattice.tail_estimate;
            r.tail_bound_rate = scale * r.lattice.tail_bound;
            r.rate = scale * r.lattice.value + r.tail_rate;
            q0_trunc.add(scale * r.lattice.value);
            tail.add(r.tail_rate);
            tail_bound_sum.add(r.tail_bound_rate);
        }
        q0.add(r.rate);
        out.terms.push_back(r);
    }
    out.q0 = q0.value();
    out.q0_truncated = q0_trunc.value();
    out.tail_rate = tail.value();
    out.tail_bound_rate = tail_bound_sum.value();
    return out;
}

double tau_for_p0(const SpectralMixture& mixture, const KernelRates& rates, double p0,
                  Derivative variant) {
    const double wn = markov_weight(variant, mixture.beta);
    const double nu = time_scale_factor(variant, mixture.beta);
    if (!(rates.q0 > 0.0)) throw ConfigError("q_0 must be positive to solve for tau");
    if (!(p0 >= 0.0)) throw InfeasibleError(fmt::format("p0 must be non-negative, got {}", p0));
    if (!(p0 < wn))
        throw InfeasibleError(fmt::format(
            "p0 = {} is infeasible: it must be below w_n = c_1 = {} (2 - 2^(1-beta) for Caputo, "
            "beta for Grunwald-Letnikov)",
            p0, wn));
    return std::pow((wn - p0) / (nu * rates.q0), 1.0 / mixture.beta);
}

double tau_for_p0(const SpectralMixture& mixture, const LatticeGeometry& geometry, double p0,
                  Derivative variant) {
    return tau_for_p0(mixture, q_zero(mixture, geometry), p0, variant);
}

StabilityReport stability_check(const SpectralMixture& mixture, const KernelRates& rates,
                                double tau, Derivative variant) {
    if (!(tau > 0.0)) throw ConfigError(fmt::format("tau must be positive, got {}", tau));
    const double wn = markov_weight(variant, mixture.beta);
    const double nu = time_scale_factor(variant, mixture.beta);
    StabilityReport r;
    r.tau_max = std::pow(wn / (nu * rates.q0), 1.0 / mixture.beta);
    r.margin = r.tau_max - tau;
    r.stable = tau <= r.tau_max * (1.0 + 1e-12);
    return r;
}

StabilityReport stability_check(const SpectralMixture& mixture, const LatticeGeometry& geometry,
                                double tau, Derivative variant) {
    return stability_check(mixture, q_zero(mixture, geometry), tau, variant);
}

}  // namespace dodewalk
