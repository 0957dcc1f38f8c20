#include <doctest.h>

#include <cmath>

#include "dodewalk/errors.hpp"
#include "dodewalk/fdsolve.hpp"
#include "dodewalk/stats.hpp"
#include "dodewalk/walk.hpp"

using namespace dodewalk;

TEST_CASE("jump statistics count moves only") {
    Trajectory t;
    t.h = 6.0;
    t.positions = {Offset{}, Offset{1, 0, 0}, Offset{1, 0, 0}, Offset{0, 0, 0}, Offset{3, 4, 0}};
    t.records = {{0, StepType::Markovian, {1, 0, 0}, -1, 6.0},
                 {1, StepType::Stay, {}, -1, 0.0},
                 {2, StepType::NonMarkovian, {-1, 0, 0}, 0, 6.0},
                 {3, StepType::Markovian, {3, 4, 0}, -1, 30.0}};
    CHECK(avg_jump_size(t) == 14.0);
    CHECK(nonmarkov_fraction(t) == 0.25);

    WalkTally tally;
    for (const auto& r : t.records) tally.record(r.type, r.jump_nm);
    const WalkSummary s = summarize(tally, 1e-3, {}, {});
    CHECK(s.n_jumps == 3);
    CHECK(s.n_steps == 4);
    CHECK(s.n_stays == 1);
    CHECK(s.avg_jump_nm == 14.0);
    CHECK(s.jump_sd_nm == doctest::Approx(std::sqrt((64.0 + 64.0 + 256.0) / 3.0)));

    WalkTally idle;
    idle.record(StepType::Stay, 0.0);
    CHECK_THROWS_AS(avg_jump_size(idle), std::domain_error);
}

TEST_CASE("kernel jump moments") {
    const SpectralMixture lap{{{2.0, 9e6}}, 1.0};
    const LatticeGeometry g = build_shells(2, 8, 6.0);
    const JumpKernel k = build_kernel(lap, g, 5e-7);
    const JumpMoments m = kernel_jump_moments(k);
    CHECK(m.mean_nm == doctest::Approx(6.0));
    CHECK(m.sd_nm == doctest::Approx(0.0).epsilon(1e-6));

    // 1D kernel expectation by hand
    const SpectralMixture levy{{{1.0, 1.0}}, 1.0};
    const LatticeGeometry g1 = build_shells(1, 3, 1.0);
    const JumpKernel k1 = build_kernel(levy, g1, 0.1);
    double num = 0.0, den = 0.0;
    for (std::size_t e = 0; e < k1.size(); ++e) {
        num += k1.prob[e] * std::fabs(static_cast<double>(k1.offsets[e][0]));
        den += k1.prob[e];
    }
    CHECK(kernel_jump_moments(k1).mean_nm == doctest::Approx(num / den));
}

TEST_CASE("histogram and total variation") {
    DensityGrid g = delta_initial(2, 1, 1.0, 1.0);
    const std::vector<Offset> at_origin(10, Offset{});
    CHECK(tv_distance(occupancy_histogram(at_origin, 2, 1), g) == 0.0);

    std::vector<Offset> spread = {Offset{}, Offset{1, 1, 0}, Offset{5, 0, 0}, Offset{0, -1, 0}};
    const Histogram h = occupancy_histogram(spread, 2, 1);
    CHECK(h.total == 4);
    CHECK(h.outside == 1);
    CHECK(h.counts[g.index({1, 1, 0})] == 1);
    // 1/2 (|0.25 - 1| + 0.25 + 0.25 + outside 0.25)
    CHECK(tv_distance(h, g) == doctest::Approx(0.75));

    g.boundary_loss = 0.25;
    g.history.back()[g.index({0, 0, 0})] = 0.75;
    CHECK(tv_distance(h, g) == doctest::Approx(0.5));

    CHECK_THROWS_AS(tv_distance(occupancy_histogram(spread, 2, 2), g), ConfigError);
}

TEST_CASE("brownian mean squared displacement grows as 4 a t") {
    WalkConfig c;
    c.mixture = {{{2.0, 9e6}}, 1.0};
    c.h = 6.0;
    c.K = 4;
    c.tau = 1e-6;
    c.n_steps = 400;
    const WalkModel model(c);
    EnsembleOptions opts;
    opts.msd_stride = 100;
    const std::size_t walkers = 4000;
    const EnsembleResult e = run_ensemble(model, 21, walkers, opts);
    const auto series = msd(e, c.tau, walkers);
    REQUIRE(series.size() == 5);
    CHECK(series[4].first == doctest::Approx(4e-4));
    CHECK(msd_slope(series) == doctest::Approx(4.0 * 9e6).epsilon(0.05));
    CHECK_THROWS_AS(msd(e, c.tau, 50), std::domain_error);
}
