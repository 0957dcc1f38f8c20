// Acceptance suite: `acceptance N` runs criterion N, `acceptance` runs all.
// Each criterion prints one PASS/FAIL line followed by indented details.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <thread>

#include <boost/math/special_functions/zeta.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "dodewalk/cli.hpp"
#include "dodewalk/config.hpp"
#include "dodewalk/errors.hpp"
#include "dodewalk/fdsolve.hpp"
#include "dodewalk/stats.hpp"
#include "dodewalk/walk.hpp"

using namespace dodewalk;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> details;

    void check(bool ok, std::string line) {
        pass = pass && ok;
        details.push_back(fmt::format("{} {}", ok ? "ok  " : "FAIL", line));
    }
    void note(std::string line) { details.push_back("note " + std::move(line)); }
};

std::size_t max_threads() {
    return std::max<std::size_t>(4, std::thread::hardware_concurrency());
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("dodewalk_acceptance_" + name);
    fs::remove_all(p);
    return p;
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

// 1. Weight identities.
Outcome weight_identities() {
    Outcome o;
    double worst_sum = 0.0, worst_caputo = 0.0, worst_gl = 0.0;
    for (double beta : {0.999, 0.99, 0.9, 0.5}) {
        for (std::int64_t n : {1, 10, 100, 1000}) {
            const WeightTable c = caputo_weights(n, beta);
            const WeightTable g = gl_weights(n, beta);
            for (const auto* t : {&c, &g}) {
                CompensatedSum s;
                for (double w : t->w) s.add(w);
                worst_sum = std::max(worst_sum, std::fabs(s.value() - 1.0));
            }
            worst_caputo = std::max(worst_caputo, std::fabs(c.w.back() - (2.0 - std::pow(2.0, 1.0 - beta))));
            worst_gl = std::max(worst_gl, std::fabs(g.w.back() - beta));
        }
    }
    o.check(worst_sum <= 1e-12, fmt::format("max |sum w - 1| = {:.3e} (<= 1e-12)", worst_sum));
    o.check(worst_caputo <= 1e-14, fmt::format("max |w_n - (2 - 2^(1-beta))| = {:.3e} (<= 1e-14)", worst_caputo));
    o.check(worst_gl <= 1e-14, fmt::format("max |w_n - beta| (GL) = {:.3e} (<= 1e-14)", worst_gl));
    return o;
}

// 2. Non-Markovian probability, closed form and Monte Carlo.
Outcome nonmarkov_probability() {
    Outcome o;
    struct Row {
        double beta;
        double printed;
        double half_ulp;
    };
    for (const Row& r : {Row{0.999, 0.00069339, 5e-9}, Row{0.99, 0.0070, 5e-5}, Row{0.9, 0.0718, 5e-5}}) {
        const double closed = std::pow(2.0, 1.0 - r.beta) - 1.0;
        const double from_table = 1.0 - caputo_weights(10, r.beta).markov_mass();
        o.check(std::fabs(from_table - closed) <= 1e-14 && std::fabs(closed - r.printed) <= r.half_ulp,
                fmt::format("beta={}: 1 - w_n = {:.8f}, printed {}", r.beta, from_table, r.printed));

        WalkConfig c;
        c.mixture = {{{2.0, 9e6}}, r.beta};
        c.h = 6.0;
        c.K = 4;
        c.n_steps = 1'000'000;
        c.tau = tau_for_p0(c.mixture, build_shells(2, c.K, c.h), 0.0);
        const WalkModel model(c);
        const EnsembleResult e = run_ensemble(model, 2024, 1);
        // the first step (n = 0) cannot revisit
        const double trials = static_cast<double>(c.n_steps - 1);
        const double expected = trials * closed;
        const double sigma = std::sqrt(trials * closed * (1.0 - closed));
        const double z = (static_cast<double>(e.tally.nonmarkovian) - expected) / sigma;
        o.check(std::fabs(z) <= 3.0,
                fmt::format("beta={}: MC fraction {:.6f} over 1e6 steps, z = {:+.2f} (|z| <= 3)", r.beta,
                            static_cast<double>(e.tally.nonmarkovian) / static_cast<double>(c.n_steps), z));
    }
    return o;
}

// 3. Kernel and time-step closed forms; 1D lattice sums against zeta.
Outcome closed_forms() {
    Outcome o;
    const SpectralMixture lap{{{2.0, 9e6}}, 1.0};
    const double tau = tau_for_p0(lap, build_shells(2, 512, 6.0), 0.0);
    o.check(std::fabs(tau / 1e-6 - 1.0) <= 1e-12, fmt::format("tau = {:.15e} s (1e-6 within 1e-12)", tau));
    for (double alpha : {0.5, 1.0, 1.5, 2.0}) {
        const long double ref = 2.0L * boost::math::zeta(1.0L + static_cast<long double>(alpha));
        const LatticeSum s = lattice_sum(alpha, 1, 10'000'000);
        const long double est = static_cast<long double>(s.value) + s.tail_estimate;
        const double rel = static_cast<double>(std::fabs(est / ref - 1.0L));
        // the sum itself carries a few ulp of rounding; the bound's own slack is ~K^-(1+alpha)
        const long double slack = 4.0L * std::numeric_limits<double>::epsilon() * s.value;
        const long double lo = static_cast<long double>(s.value) - slack;
        const long double hi = static_cast<long double>(s.value) + s.tail_bound + slack;
        const bool bracket = lo <= ref && ref <= hi;
        o.check(rel <= 1e-8 && bracket,
                fmt::format("alpha={}: R = {:.15f} vs 2 zeta = {:.15f}, rel {:.2e}, bracket [{:.15f}, {:.15f}] {}",
                            alpha, static_cast<double>(est), static_cast<double>(ref), rel,
                            static_cast<double>(lo), static_cast<double>(hi), bracket ? "holds" : "violated"));
    }
    return o;
}

// Mean jump length of q_k restricted to 0 < |k| <= K and renormalized there.
double truncated_mean(const RunConfig& cfg, int K) {
    const LatticeGeometry g = build_shells(cfg.dim, K, cfg.h_nm);
    const SpectralMixture m = cfg.mixture();
    CompensatedSum num, den;
    for (const Shell& s : g.shells) {
        const double mass = static_cast<double>(s.count) * q_shell(s, m, g);
        num.add(mass * s.radius * cfg.h_nm);
        den.add(mass);
    }
    return num.value() / den.value();
}

// 4. Average jump sizes for the preset configurations.
Outcome table_one() {
    Outcome o;
    struct Row {
        std::string preset;
        double target;
        bool order_of_magnitude;
    };
    const std::vector<Row> rows = {
        {"plot1-left", 6.0, false},     {"plot1-middle", 10.977, false}, {"plot1-right", 7.332, false},
        {"plot2-left", 6.0038, false},  {"plot2-middle", 11.0707, false}, {"plot2-right", 7.3593, false},
        {"plot3-left", 17.03, true},    {"plot3-middle", 17.17, true},   {"plot3-right", 19.89, true}};
    for (const Row& row : rows) {
        const RunConfig cfg = parse_config(preset(row.preset));
        const Resolution res = resolve(cfg);
        const WalkModel model(res.walk);
        const auto steps = static_cast<std::size_t>(res.walk.n_steps);
        const std::size_t walkers = (1'050'000 + steps - 1) / steps;
        EnsembleOptions opts;
        opts.threads = max_threads();
        const EnsembleResult e = run_ensemble(model, cfg.seed, walkers, opts);
        const WalkSummary s = summarize(e.tally, res.walk.tau, {}, {});
        const double se = s.jump_sd_nm / std::sqrt(static_cast<double>(s.n_jumps));
        const JumpMoments km = kernel_jump_moments(model.kernel());
        const std::string label = fmt::format("({}, {})", fmt::join(cfg.alpha, ","), cfg.beta);

        bool ok = s.n_jumps >= 1'000'000;
        std::string rule;
        if (row.order_of_magnitude) {
            ok = ok && s.avg_jump_nm >= row.target / 2.0 && s.avg_jump_nm <= row.target * 2.0;
            rule = "factor 2, truncation dependent";
        } else if (row.target == 6.0) {
            ok = ok && s.avg_jump_nm == 6.0;
            rule = "exact";
        } else {
            ok = ok && std::fabs(s.avg_jump_nm / row.target - 1.0) <= 0.02;
            rule = "2%";
        }
        o.check(ok, fmt::format("{} K={}: {:.4f} nm vs {} ({}) from {} jumps, SE {:.3f}", label, cfg.K,
                                s.avg_jump_nm, row.target, rule, s.n_jumps, se));
        if (cfg.beta == 1.0) {
            const bool consistent = std::fabs(s.avg_jump_nm - km.mean_nm) <= 3.0 * se + 1e-12;
            o.check(consistent, fmt::format("{} kernel expectation {:.4f} nm, |MC - kernel| = {:.3f} SE",
                                            label, km.mean_nm,
                                            se > 0 ? std::fabs(s.avg_jump_nm - km.mean_nm) / se : 0.0));
        }
        if (cfg.alpha.front() < 2.0 && (cfg.beta == 1.0 || row.order_of_magnitude)) {
            // the truncation radius and the tail treatment are the only free choices here
            o.note(fmt::format("{} truncated kernel mean without tail fold: K=512 {:.4f} nm, K=26 {:.4f} nm",
                               label, truncated_mean(cfg, 512), truncated_mean(cfg, 26)));
        }
    }
    return o;
}

// 5. Monte Carlo histogram against the density solver.
Outcome mc_fd_equivalence() {
    Outcome o;
    for (const std::string name : {"compare-plot1-left", "compare-plot1-middle", "compare-plot1-right",
                                   "compare-beta09"}) {
        const RunConfig cfg = parse_config(preset(name));
        const DispatchResult r = dispatch(Mode::Compare, cfg, scratch(name), max_threads());
        const double tv = r.report["tv_distance"];
        const double defect = r.report["max_mass_defect"];
        const auto n = r.report["n_steps"].get<std::int64_t>();
        o.check(tv <= 0.05 && defect <= 1e-10 && n <= 500 && cfg.J == 128 && cfg.ensemble == 100'000,
                fmt::format("{} (alpha={}, beta={}, n={}, J={}): TV = {:.4f} (<= 0.05), max mass defect {:.1e}",
                            name, fmt::join(cfg.alpha, ","), cfg.beta, n, cfg.J, tv, defect));
    }
    return o;
}

// 6. Two steps against path enumeration.
Outcome two_step_oracle() {
    Outcome o;
    const SpectralMixture lap{{{2.0, 9e6}}, 1.0};
    const LatticeGeometry g = build_shells(2, 4, 6.0);
    const JumpKernel k = build_kernel(lap, g, tau_for_p0(lap, g, 0.0));
    MemoryCoefficients coeffs(Derivative::Caputo, 1.0);
    const DensityGrid d = fd_run(k, coeffs, delta_initial(2, 4, k.tau, 6.0), 2);

    const std::array<Offset, 4> moves = {Offset{1, 0, 0}, Offset{-1, 0, 0}, Offset{0, 1, 0}, Offset{0, -1, 0}};
    std::map<Offset, double> paths;
    for (const auto& a : moves)
        for (const auto& b : moves) paths[{a[0] + b[0], a[1] + b[1], 0}] += 1.0 / 16.0;

    bool all = true;
    for (std::size_t i = 0; i < d.sites(); ++i) {
        const auto it = paths.find(d.site(i));
        all = all && d.current()[i] == (it == paths.end() ? 0.0 : it->second);
    }
    const auto& u = d.current();
    o.check(u[d.index({0, 0, 0})] == 0.25, fmt::format("center = {}", u[d.index({0, 0, 0})]));
    o.check(u[d.index({2, 0, 0})] == 0.0625 && u[d.index({0, -2, 0})] == 0.0625,
            fmt::format("axis distance 2 = {}", u[d.index({2, 0, 0})]));
    o.check(all, "every site equals the enumerated path probability");
    return o;
}

// 7. Byte-identical outputs across repeats and thread counts.
Outcome determinism() {
    Outcome o;
    for (const std::string name : {"compare-beta09", "compare-plot1-right"}) {
        const RunConfig cfg = parse_config(preset(name));
        std::vector<std::map<std::string, std::string>> runs;
        for (std::size_t threads : {std::size_t{1}, std::size_t{1}, max_threads()}) {
            const fs::path dir = scratch(fmt::format("{}_{}_{}", name, threads, runs.size()));
            dispatch(Mode::Compare, cfg, dir, threads);
            runs.push_back({{"positions.csv", read_file(dir / "positions.csv")},
                            {"density.csv", read_file(dir / "density.csv")}});
        }
        o.check(runs[0] == runs[1], fmt::format("{}: two single-thread runs identical", name));
        o.check(runs[0] == runs[2], fmt::format("{}: 1 vs {} threads identical", name, max_threads()));
    }
    return o;
}

// 8. Stability gate.
Outcome stability_gate() {
    Outcome o;
    struct Mix {
        std::vector<double> alpha;
        double beta;
    };
    const fs::path dir = scratch("stability");
    fs::create_directories(dir);
    for (const Mix& m : {Mix{{2.0}, 1.0}, Mix{{1.5, 2.0}, 0.9}, Mix{{0.8, 1.3, 1.8}, 0.99}}) {
        RunConfig cfg;
        cfg.alpha = m.alpha;
        cfg.a.assign(m.alpha.size(), 9e-12);
        cfg.beta = m.beta;
        cfg.K = 128;
        cfg.n_steps = 10;
        cfg.p0 = 0.0;
        const Resolution at_max = resolve(cfg);
        const double tau_max = at_max.stability.tau_max;

        json doc = to_json(cfg);
        doc.erase("p0");
        doc["tau_s"] = 1.01 * tau_max;
        const fs::path file = dir / "unstable.json";
        std::ofstream(file) << doc.dump();
        const std::string file_arg = file.string();
        const std::string out_arg = (dir / "out").string();
        const char* argv[] = {"dode-walk", "walk", "--config", file_arg.c_str(), "--out", out_arg.c_str()};
        std::ostringstream out, err;
        const int code = run_cli(6, argv, out, err);
        const std::string label = fmt::format("alpha={} beta={}", fmt::join(m.alpha, ","), m.beta);
        o.check(code == kExitStability, fmt::format("{}: tau = 1.01 tau_max exits with {}", label, code));

        const WalkModel model(at_max.walk);
        const double p0 = model.kernel().p0;
        o.check(p0 >= 0.0 && p0 <= 1e-12, fmt::format("{}: tau = tau_max accepted, p0 = {:.3e}", label, p0));

        const LatticeGeometry g = build_shells(2, cfg.K, cfg.h_nm);
        const JumpKernel edge = build_kernel(cfg.mixture(), g, tau_max * (1.0 + 1e-13));
        o.check(edge.p0 == 0.0, fmt::format("{}: p0 just below zero is clamped to {}", label, edge.p0));
    }
    return o;
}

struct Criterion {
    std::string title;
    double budget_s;
    std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all = {
        {"weight identities", 1.0, weight_identities},
        {"non-Markovian probability", 30.0, nonmarkov_probability},
        {"kernel and tau closed forms", 60.0, closed_forms},
        {"average jump sizes", 600.0, table_one},
        {"MC vs FD equivalence", 900.0, mc_fd_equivalence},
        {"two-step hand oracle", 1.0, two_step_oracle},
        {"determinism", 300.0, determinism},
        {"stability gate", 1.0, stability_gate},
    };
    return all;
}

bool run_one(std::size_t index) {
    const Criterion& c = criteria().at(index - 1);
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = c.run();
    } catch (const std::exception& e) {
        o.check(false, fmt::format("exception: {}", e.what()));
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = elapsed < c.budget_s;
    const bool pass = o.pass && in_time;
    fmt::print("criterion {}: {} {} ({:.2f} s, budget {} s)\n", index, pass ? "PASS" : "FAIL", c.title,
               elapsed, c.budget_s);
    for (const auto& d : o.details) fmt::print("    {}\n", d);
    if (!in_time) fmt::print("    FAIL runtime over budget\n");
    std::fflush(stdout);
    return pass;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::size_t> which;
    for (int i = 1; i < argc; ++i) which.push_back(std::stoul(argv[i]));
    if (which.empty())
        for (std::size_t i = 1; i <= criteria().size(); ++i) which.push_back(i);
    bool ok = true;
    for (std::size_t i : which) ok = run_one(i) && ok;
    return ok ? 0 : 1;
}
