#include <doctest.h>

#include <cmath>
#include <set>

#include <boost/math/distributions/chi_squared.hpp>

#include "dodewalk/errors.hpp"
#include "dodewalk/rng.hpp"
#include "dodewalk/transition.hpp"

using namespace dodewalk;

namespace {

const SpectralMixture kBrownian{{{2.0, 9e6}}, 1.0};

double chi_square_p_value(const std::vector<double>& observed, const std::vector<double>& expected) {
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double d = observed[i] - expected[i];
        stat += d * d / expected[i];
    }
    const boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace

TEST_CASE("nearest-neighbour kernel") {
    const LatticeGeometry g = build_shells(2, 8, 6.0);
    const JumpKernel k = build_kernel(kBrownian, g, 1e-6);
    REQUIRE(k.size() == 4);
    std::set<Offset> offsets(k.offsets.begin(), k.offsets.end());
    CHECK(offsets == std::set<Offset>{{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}});
    for (double p : k.prob) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(k.p0 == 0.0);
    CHECK(k.cumulative.front() == 0.0);
    CHECK(k.cumulative.back() == doctest::Approx(1.0));

    const JumpKernel half = build_kernel(kBrownian, g, 5e-7);
    CHECK(half.p0 == doctest::Approx(0.5));
    CHECK(sample_jump_index(half, 0.49) == -1);
    CHECK(sample_jump_index(half, 0.5) == 0);
    CHECK(sample_jump_index(half, 0.999) == 3);
    CHECK(sample_jump(half, 0.1) == Offset{});
}

TEST_CASE("kernel mass balance with heavy tails") {
    const SpectralMixture m{{{0.8, 5e5}, {1.3, 5e5}, {1.8, 5e5}}, 0.9};
    const LatticeGeometry g = build_shells(2, 40, 6.0);
    const double tau = tau_for_p0(m, g, 0.1);
    const JumpKernel k = build_kernel(m, g, tau);
    const double c1 = 2.0 - std::pow(2.0, 0.1);
    CHECK(k.markov_mass == doctest::Approx(c1).epsilon(1e-15));
    CHECK(k.p0 + k.jump_mass == doctest::Approx(c1).epsilon(1e-13));
    CHECK(k.p0 == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(k.tail_remainder > 0.0);
    CHECK(k.tail_bound >= k.tail_remainder);
    CHECK(k.p0_at(0) == doctest::Approx(1.0 - k.jump_mass));
    CHECK(k.cumulative.back() == doctest::Approx(k.jump_mass).epsilon(1e-13));
    for (std::size_t e = 1; e < k.size(); ++e) CHECK(k.radius[e] >= k.radius[e - 1]);
}

TEST_CASE("stability gate in the kernel builder") {
    const LatticeGeometry g = build_shells(2, 16, 6.0);
    const double tau_max = tau_for_p0(kBrownian, g, 0.0);
    CHECK_THROWS_AS(build_kernel(kBrownian, g, tau_max * 1.01), StabilityError);
    const JumpKernel k = build_kernel(kBrownian, g, tau_max * (1.0 + 1e-13));
    CHECK(k.p0 == 0.0);
}

TEST_CASE("fast sampler agrees with the explicit partition") {
    const SpectralMixture m{{{1.5, 9e6}}, 0.8};
    const LatticeGeometry g = build_shells(2, 10, 6.0);
    const double tau = tau_for_p0(m, g, 0.05);
    const JumpKernel k = build_kernel(m, g, tau);
    MemoryCoefficients coeffs(Derivative::Caputo, 0.8);
    coeffs.extend_to(60);
    for (std::size_t n : {1, 2, 17, 60}) {
        const SamplerPartition p = build_partition(coeffs.table(n), k);
        CHECK(p.p1_width == doctest::Approx(1.0 - p.markov_mass).epsilon(1e-13));
        const DeviateStream rng(99, n);
        for (std::uint64_t i = 0; i < 20000; ++i) {
            const double u = rng.uniform(i);
            const StepChoice a = sample_step(p, u);
            const StepChoice b = sample_step(k, coeffs, n, u);
            // cells meet at cut points that agree to rounding; ignore deviates right on one
            if (a != b) {
                const bool near_cut = std::any_of(p.cuts.begin(), p.cuts.end(),
                                                  [u](double c) { return std::fabs(c - u) < 1e-14; });
                CHECK(near_cut);
            }
        }
    }
}

TEST_CASE("sampled step frequencies follow the weights") {
    const SpectralMixture m{{{1.2, 9e6}}, 0.7};
    const LatticeGeometry g = build_shells(1, 6, 6.0);
    const double tau = tau_for_p0(m, g, 0.1);
    const JumpKernel k = build_kernel(m, g, tau);
    MemoryCoefficients coeffs(Derivative::Caputo, 0.7);
    const std::size_t n = 8;
    coeffs.extend_to(n);
    const WeightTable w = coeffs.table(n);

    // cells: revisit 0..n-1, stay, then each kernel entry
    std::vector<double> expected;
    for (std::size_t j = 0; j < n; ++j) expected.push_back(w.w[j]);
    expected.push_back(k.p0);
    for (double p : k.prob) expected.push_back(p);
    std::vector<double> observed(expected.size(), 0.0);

    const std::uint64_t draws = 400'000;
    const DeviateStream rng(7, 0);
    for (std::uint64_t i = 0; i < draws; ++i) {
        const StepChoice c = sample_step(k, coeffs, n, rng.uniform(i));
        if (const auto* r = std::get_if<Revisit>(&c)) {
            observed[r->m] += 1.0;
        } else {
            observed[n + 1 + static_cast<std::size_t>(std::get<Jump>(c).entry)] += 1.0;
        }
    }
    for (double& e : expected) e *= static_cast<double>(draws);
    CHECK(chi_square_p_value(observed, expected) > 1e-4);
}

TEST_CASE("first step has no revisits") {
    const LatticeGeometry g = build_shells(2, 4, 6.0);
    const SpectralMixture m{{{2.0, 9e6}}, 0.5};
    const JumpKernel k = build_kernel(m, g, tau_for_p0(m, g, 0.0));
    MemoryCoefficients coeffs(Derivative::Caputo, 0.5);
    coeffs.extend_to(1);
    // at n = 0 the whole unit interval is Markovian; p0(0) = 1 - c_1
    const StepChoice c = sample_step(k, coeffs, 0, 0.01);
    CHECK(std::holds_alternative<Jump>(c));
    CHECK(std::get<Jump>(c).entry == -1);
    CHECK(std::get<Jump>(sample_step(k, coeffs, 0, 0.999)).entry == 3);
}
