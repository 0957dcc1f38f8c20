#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace dodewalk {

/// Discretization of the time-fractional derivative of order beta.
enum class Derivative { Caputo, GrunwaldLetnikov };

std::string_view to_string(Derivative d) noexcept;
Derivative parse_derivative(std::string_view name);

/// Memory weights w_0..w_n multiplying the past densities u^0..u^n.
///
/// w_0 = gamma_n and w_i = c_{n+1-i}, so w_n = c_1 is the Markovian mass and
/// w_0..w_{n-1} are the revisit probabilities.
struct WeightTable {
    double beta = 1.0;
    Derivative variant = Derivative::Caputo;
    std::size_t n = 0;
    std::vector<double> w;
    double nu = 1.0;

    [[nodiscard]] double markov_mass() const { return w.back(); }
    /// Sum of w_0..w_{n-1}.
    [[nodiscard]] double revisit_mass() const;
};

/// The gamma_m and c_m sequences for one (variant, beta), grown on demand.
///
/// Both variants satisfy c_m = gamma_{m-1} - gamma_m with gamma_0 = 1, which
/// is what lets the walker locate revisit cells by searching gamma directly.
class MemoryCoefficients {
public:
    MemoryCoefficients(Derivative variant, double beta);

    /// Ensure gamma_0..gamma_m and c_1..c_m are available.
    void extend_to(std::size_t m);

    [[nodiscard]] std::size_t max_index() const noexcept { return gamma_.size() - 1; }
    [[nodiscard]] double gamma(std::size_t m) const { return gamma_.at(m); }
    /// c_m for m >= 1.
    [[nodiscard]] double c(std::size_t m) const { return c_.at(m); }
    [[nodiscard]] std::span<const double> gammas() const noexcept { return gamma_; }
    [[nodiscard]] double nu() const noexcept { return nu_; }
    [[nodiscard]] double beta() const noexcept { return beta_; }
    [[nodiscard]] Derivative variant() const noexcept { return variant_; }

    /// Weight table for step index n; extends the sequences if needed.
    [[nodiscard]] WeightTable table(std::size_t n);
    /// w_n of the table at step n: 1 at n = 0, c_1 afterwards.
    [[nodiscard]] double markov_mass(std::size_t n) const noexcept { return n == 0 ? 1.0 : c1_; }

private:
    Derivative variant_;
    double beta_;
    double nu_;
    double c1_;
    std::vector<double> gamma_;
    std::vector<double> c_;  // c_[0] unused
};

/// Caputo gamma_m = (m+1)^{1-beta} - m^{1-beta}, evaluated without cancellation.
double caputo_gamma(std::size_t m, double beta) noexcept;

WeightTable caputo_weights(std::int64_t n, double beta);
WeightTable gl_weights(std::int64_t n, double beta);
WeightTable make_weights(Derivative variant, std::int64_t n, double beta);

/// w_n = c_1 for n >= 1: 2 - 2^{1-beta} (Caputo) or beta (Grunwald-Letnikov).
double markov_weight(Derivative variant, double beta);
/// nu = Gamma(2 - beta) (Caputo) or 1 (Grunwald-Letnikov).
double time_scale_factor(Derivative variant, double beta);

struct WeightProfile {
    std::vector<std::pair<std::size_t, double>> rows;  // (m, w_m)
    double w0 = 0.0;
    double wn = 0.0;
};

WeightProfile emit_weight_profile(const WeightTable& table);
/// CSV with header `m,w`.
void write_weight_csv(const WeightProfile& profile, std::ostream& out);

}  // namespace dodewalk
