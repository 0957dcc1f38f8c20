#include "dodewalk/timefrac.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "dodewalk/errors.hpp"
#include "dodewalk/summation.hpp"

namespace dodewalk {

namespace {

void check_beta(double beta) {
    if (!(beta > 0.0 && beta <= 1.0))
        throw ConfigError(fmt::format("beta must lie in (0, 1], got {}", beta));
}

std::size_t check_n(std::int64_t n) {
    if (n < 0) throw ConfigError(fmt::format("step index must be non-negative, got {}", n));
    return static_cast<std::size_t>(n);
}

}  // namespace

std::string_view to_string(Derivative d) noexcept {
    return d == Derivative::Caputo ? "caputo" : "gl";
}

Derivative parse_derivative(std::string_view name) {
    if (name == "caputo") return Derivative::Caputo;
    if (name == "gl" || name == "grunwald-letnikov") return Derivative::GrunwaldLetnikov;
    throw ConfigError(fmt::format("unknown derivative variant '{}' (expected caputo or gl)", name));
}

double WeightTable::revisit_mass() const {
    return compensated_sum(std::span<const double>(w).first(n));
}

double caputo_gamma(std::size_t m, double beta) noexcept {
    if (m == 0) return 1.0;
    const double e = 1.0 - beta;
    if (e == 0.0) return 0.0;
    const double x = static_cast<double>(m);
    // (m+1)^e - m^e = m^e * expm1(e * log1p(1/m))
    return std::pow(x, e) * std::expm1(e * std::log1p(1.0 / x));
}

double markov_weight(Derivative variant, double beta) {
    check_beta(beta);
    if (variant == Derivative::GrunwaldLetnikov) return beta;
    return 1.0 - caputo_gamma(1, beta);
}

double time_scale_factor(Derivative variant, double beta) {
    check_beta(beta);
    return variant == Derivative::Caputo ? std::tgamma(2.0 - beta) : 1.0;
}

MemoryCoefficients::MemoryCoefficients(Derivative variant, double beta)
    : variant_(variant),
      beta_(beta),
      nu_(time_scale_factor(variant, beta)),
      c1_(markov_weight(variant, beta)),
      gamma_{1.0},
      c_{0.0} {}

void MemoryCoefficients::extend_to(std::size_t m) {
    if (m <= max_index()) return;
    gamma_.reserve(m + 1);
    c_.reserve(m + 1);
    for (std::size_t i = gamma_.size(); i <= m; ++i) {
        const double di = static_cast<double>(i);
        if (variant_ == Derivative::Caputo) {
            gamma_.push_back(caputo_gamma(i, beta_));
            c_.push_back(gamma_[i - 1] - gamma_[i]);
        } else {
            // |binom(beta, i)| by the magnitude recurrence; gamma_i = prod (1 - beta/j).
            c_.push_back(i == 1 ? beta_ : c_[i - 1] * (1.0 - (1.0 + beta_) / di));
            gamma_.push_back(gamma_[i - 1] * (1.0 - beta_ / di));
        }
    }
}

WeightTable MemoryCoefficients::table(std::size_t n) {
    extend_to(n);
    WeightTable t;
    t.beta = beta_;
    t.variant = variant_;
    t.n = n;
    t.nu = nu_;
    t.w.resize(n + 1);
    t.w[0] = gamma_[n];
    for (std::size_t i = 1; i <= n; ++i) t.w[i] = c_[n + 1 - i];
    return t;
}

WeightTable caputo_weights(std::int64_t n, double beta) {
    return make_weights(Derivative::Caputo, n, beta);
}

WeightTable gl_weights(std::int64_t n, double beta) {
    return make_weights(Derivative::GrunwaldLetnikov, n, beta);
}

WeightTable make_weights(Derivative variant, std::int64_t n, double beta) {
    check_beta(beta);
    const std::size_t steps = check_n(n);
    MemoryCoefficients coeffs(variant, beta);
    return coeffs.table(steps);
}

WeightProfile emit_weight_profile(const WeightTable& table) {
    WeightProfile profile;
    profile.rows.reserve(table.w.size());
    for (std::size_t m = 0; m < table.w.size(); ++m) profile.rows.emplace_back(m, table.w[m]);
    profile.w0 = table.w.front();
    profile.wn = table.w.back();
    return profile;
}

void write_weight_csv(const WeightProfile& profile, std::ostream& out) {
    out << "m,w\n";
    for (const auto& [m, w] : profile.rows) fmt::print(out, "{},{}\n", m, w);
}

}  // namespace dodewalk
