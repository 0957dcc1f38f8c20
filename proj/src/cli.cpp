#include "dodewalk/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "dodewalk/errors.hpp"
#include "dodewalk/fdsolve.hpp"
#include "dodewalk/io.hpp"
#include "dodewalk/stats.hpp"
#include "dodewalk/walk.hpp"

namespace dodewalk {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Files written by one dispatch; removed again unless the run completes.
class OutputSet {
public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
    OutputSet(const OutputSet&) = delete;
    OutputSet& operator=(const OutputSet&) = delete;
    ~OutputSet() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& p : paths_) fs::remove(p, ec);
    }

    std::ofstream open(const std::string& name) {
        const fs::path p = dir_ / name;
        paths_.push_back(p);
        std::ofstream f(p, std::ios::binary);
        if (!f) throw std::runtime_error(fmt::format("cannot open {} for writing", p.string()));
        return f;
    }

    void write_json(const std::string& name, const json& doc) {
        auto f = open(name);
        f << doc.dump(2) << '\n';
    }

    void commit() { committed_ = true; }
    [[nodiscard]] const std::vector<fs::path>& paths() const { return paths_; }

private:
    fs::path dir_;
    std::vector<fs::path> paths_;
    bool committed_ = false;
};

std::string utc_now() {
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)));
}

json derived_json(const Resolution& r) {
    return {{"tau_s", r.walk.tau},
            {"tau_max_s", r.stability.tau_max},
            {"n_steps", r.walk.n_steps},
            {"duration_s", r.walk.duration},
            {"w_n", r.markov_mass},
            {"revisit_probability", 1.0 - r.markov_mass},
            {"p0", r.p0},
            {"rates", to_json(r.rates)},
            {"config_hash", r.walk.config_hash}};
}

json manifest_json(Mode mode, const RunConfig& config, const Resolution& r, std::size_t threads,
                   const std::vector<fs::path>& outputs, const json& report) {
    json files = json::array();
    for (const auto& p : outputs) files.push_back(p.filename().string());
    files.push_back("manifest.json");
    RunConfig resolved = config;
    resolved.mode = mode;
    return {{"tool", "dode-walk"},
            {"version", kToolVersion},
            {"created_utc", utc_now()},
            {"mode", to_string(mode)},
            {"threads", threads},
            {"config", to_json(resolved)},
            {"seed", config.seed},
            {"derived", derived_json(r)},
            {"outputs", files},
            {"report", report}};
}

}  // namespace

DispatchResult dispatch(Mode mode, const RunConfig& config, const fs::path& out_dir,
                        std::size_t threads) {
    if (mode == Mode::Weights || mode == Mode::Kernel)
        throw ConfigError("weights and kernel are flag-driven subcommands, not config modes");
    RunConfig cfg = config;
    cfg.mode = mode;
    const Resolution res = resolve(cfg);
    fs::create_directories(out_dir);
    OutputSet files(out_dir);
    DispatchResult result;
    json report;

    const WalkModel model(res.walk);
    const auto& w = model.config();

    auto run_fd = [&]() {
        MemoryCoefficients coeffs(w.variant, w.mixture.beta);
        FdOptions opts;
        opts.loss_threshold = cfg.loss_threshold;
        return fd_run(model.kernel(), coeffs, delta_initial(w.dim, cfg.J, w.tau, w.h),
                      static_cast<std::size_t>(w.n_steps), opts);
    };
    auto max_defect = [](const DensityGrid& g) {
        double d = 0.0;
        for (const auto& e : g.ledger) d = std::max(d, std::fabs(e.defect));
        return d;
    };

    switch (mode) {
    case Mode::Walk: {
        const Trajectory t = run_walk(model, derive_stream(cfg.seed, 0));
        {
            auto f = files.open("trajectory.csv");
            write_trajectory_csv(t, f);
        }
        WalkTally tally;
        for (const auto& r : t.records) tally.record(r.type, r.jump_nm);
        report = to_json(summarize(tally, w.tau, {}, {}, w.config_hash));
        files.write_json("summary.json", report);
        break;
    }
    case Mode::Ensemble: {
        EnsembleOptions opts;
        opts.threads = threads;
        opts.msd_stride = cfg.msd_stride;
        const EnsembleResult e = run_ensemble(model, cfg.seed, cfg.ensemble, opts);
        {
            auto f = files.open("positions.csv");
            write_positions_csv(e.final_positions, w.dim, w.h, f);
        }
        report = to_json(summarize(e.tally, w.tau, e.msd_steps, e.msd_nm2, w.config_hash));
        files.write_json("summary.json", report);
        break;
    }
    case Mode::Fd: {
        const DensityGrid g = run_fd();
        {
            auto f = files.open("density.csv");
            write_density_csv(g, f);
        }
        report = {{"n_steps", g.n},
                  {"J", g.J},
                  {"boundary_loss", g.boundary_loss},
                  {"max_mass_defect", max_defect(g)},
                  {"mass_ledger", mass_ledger_json(g)}};
        break;
    }
    case Mode::Compare: {
        EnsembleOptions opts;
        opts.threads = threads;
        const EnsembleResult e = run_ensemble(model, cfg.seed, cfg.ensemble, opts);
        const DensityGrid g = run_fd();
        const Histogram hist = occupancy_histogram(e.final_positions, w.dim, cfg.J);
        const double tv = tv_distance(hist, g);
        {
            auto f = files.open("positions.csv");
            write_positions_csv(e.final_positions, w.dim, w.h, f);
        }
        {
            auto f = files.open("density.csv");
            write_density_csv(g, f);
        }
        report = {{"tv_distance", tv},
                  {"tolerance", cfg.tv_tolerance},
                  {"pass", tv <= cfg.tv_tolerance},
                  {"ensemble", cfg.ensemble},
                  {"n_steps", w.n_steps},
                  {"J", cfg.J},
                  {"boundary_loss", g.boundary_loss},
                  {"mc_outside_fraction",
                   static_cast<double>(hist.outside) / static_cast<double>(hist.total)},
                  {"max_mass_defect", max_defect(g)},
                  {"mass_ledger", mass_ledger_json(g)}};
        files.write_json("report.json", report);
        if (tv > cfg.tv_tolerance) result.exit_code = kExitTolerance;
        break;
    }
    case Mode::Barrier: {
        BarrierSummary s;
        const Trajectory t = barrier_walk(model, derive_stream(cfg.seed, 0), cfg.barrier, &s);
        {
            auto f = files.open("trajectory.csv");
            write_trajectory_csv(t, f);
        }
        WalkTally tally;
        for (const auto& r : t.records) tally.record(r.type, r.jump_nm);
        report = to_json(summarize(tally, w.tau, {}, {}, w.config_hash));
        report["barrier"] = {{"spacing_nm", cfg.barrier.spacing_nm},
                             {"p_escape", cfg.barrier.p_escape},
                             {"cell_sites", s.cell_sites},
                             {"cell_size_nm", static_cast<double>(s.cell_sites) * w.h},
                             {"attempted_crossings", s.attempted_crossings},
                             {"escapes", s.escapes},
                             {"cells_visited", s.cells_visited}};
        files.write_json("summary.json", report);
        break;
    }
    default: break;
    }

    files.write_json("manifest.json", manifest_json(mode, cfg, res, threads, files.paths(), report));
    files.commit();
    result.outputs = files.paths();
    result.report = std::move(report);
    return result;
}

namespace {

struct RunOptions {
    std::string config_path;
    std::string preset_name;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> ensemble;
    std::size_t threads = 1;
};

RunConfig load_run_config(const RunOptions& o) {
    json doc;
    if (!o.config_path.empty() && !o.preset_name.empty())
        throw ConfigError("give either --config or --preset, not both");
    if (!o.config_path.empty()) {
        std::ifstream f(o.config_path);
        if (!f) throw ConfigError(fmt::format("cannot read config file {}", o.config_path));
        try {
            doc = json::parse(f);
        } catch (const json::parse_error& e) {
            throw ConfigError(fmt::format("config file {} is not valid JSON: {}", o.config_path, e.what()));
        }
    } else if (!o.preset_name.empty()) {
        doc = preset(o.preset_name);
    } else {
        throw ConfigError("a --config FILE or --preset NAME is required");
    }
    RunConfig c = parse_config(doc);
    if (o.seed) c.seed = *o.seed;
    if (o.ensemble) c.ensemble = *o.ensemble;
    return c;
}

int run_weights(double beta, std::int64_t n, const std::string& variant, const std::string& out_path,
                std::ostream& out) {
    const WeightTable t = make_weights(parse_derivative(variant), n, beta);
    const WeightProfile p = emit_weight_profile(t);
    if (out_path.empty()) {
        write_weight_csv(p, out);
        return kExitOk;
    }
    {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw std::runtime_error(fmt::format("cannot open {}", out_path));
        write_weight_csv(p, f);
    }
    std::ofstream side(out_path + ".json", std::ios::binary);
    side << json{{"tool", "dode-walk"},
                 {"version", kToolVersion},
                 {"beta", beta},
                 {"n", n},
                 {"variant", variant},
                 {"nu", t.nu},
                 {"w0", p.w0},
                 {"wn", p.wn},
                 {"revisit_probability", t.revisit_mass()}}
                .dump(2)
         << '\n';
    return kExitOk;
}

struct KernelArgs {
    std::vector<double> alpha;
    std::vector<double> a;
    std::string units = "m2/s";
    double beta = 1.0;
    double h = 6.0;
    int K = 512;
    int dim = 2;
    double p0 = 0.0;
    std::string variant = "caputo";
    std::string out;
};

int run_kernel(const KernelArgs& k, std::ostream& out) {
    RunConfig c;
    c.alpha = k.alpha;
    c.a = k.a;
    c.units = k.units;
    c.beta = k.beta;
    c.variant = parse_derivative(k.variant);
    const SpectralMixture mixture = c.mixture();
    const LatticeGeometry geometry = build_shells(k.dim, k.K, k.h);
    const KernelRates rates = q_zero(mixture, geometry);
    const double tau = tau_for_p0(mixture, rates, k.p0, c.variant);
    const StabilityReport stab = stability_check(mixture, rates, tau, c.variant);
    const JumpKernel kernel = build_kernel(mixture, geometry, tau, c.variant);
    if (k.out.empty()) {
        write_kernel_csv(kernel, mixture, geometry, out);
        return kExitOk;
    }
    {
        std::ofstream f(k.out, std::ios::binary);
        if (!f) throw std::runtime_error(fmt::format("cannot open {}", k.out));
        write_kernel_csv(kernel, mixture, geometry, f);
    }
    std::ofstream side(k.out + ".json", std::ios::binary);
    json doc = to_json(rates);
    doc["tool"] = "dode-walk";
    doc["version"] = kToolVersion;
    doc["dim"] = k.dim;
    doc["h_nm"] = k.h;
    doc["K"] = k.K;
    doc["beta"] = k.beta;
    doc["p0_target"] = k.p0;
    doc["tau_s"] = tau;
    doc["tau_max_s"] = stab.tau_max;
    doc["p0"] = kernel.p0;
    doc["w_n"] = kernel.markov_mass;
    doc["tail_remainder"] = kernel.tail_remainder;
    doc["tail_bound"] = kernel.tail_bound;
    side << doc.dump(2) << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Random walks for multi-term distributed-order fractional diffusion", "dode-walk"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    double w_beta = 0.9;
    std::int64_t w_n = 100;
    std::string w_variant = "caputo";
    std::string w_out;
    auto* weights = app.add_subcommand("weights", "Time-fractional memory weights w_m as CSV");
    weights->add_option("--beta", w_beta, "Time order beta in (0, 1]")->required();
    weights->add_option("--n", w_n, "Step index n (table has n + 1 rows)")->required();
    weights->add_option("--variant", w_variant, "caputo or gl");
    weights->add_option("--out", w_out, "Output CSV (default: stdout)");

    KernelArgs kargs;
    auto* kernel = app.add_subcommand("kernel", "Jump kernel q_k and p_k as CSV with a JSON sidecar");
    kernel->set_help_flag("--help", "Print this help message and exit");
    kernel->add_option("--alpha", kargs.alpha, "Space orders, comma separated")->required()->delimiter(',');
    kernel->add_option("--a", kargs.a, "Diffusion coefficients, comma separated")->required()->delimiter(',');
    kernel->add_option("--units", kargs.units, "m2/s or nm2/s");
    kernel->add_option("--beta", kargs.beta, "Time order beta in (0, 1]");
    kernel->add_option("--h", kargs.h, "Lattice spacing in nm");
    kernel->add_option("--K", kargs.K, "Truncation radius");
    kernel->add_option("--dim", kargs.dim, "Spatial dimension");
    kernel->add_option("--p0", kargs.p0, "Target staying probability used to pick tau");
    kernel->add_option("--variant", kargs.variant, "caputo or gl");
    kernel->add_option("--out", kargs.out, "Output CSV (default: stdout)");

    RunOptions ropts;
    std::vector<std::pair<CLI::App*, Mode>> runs;
    for (Mode m : {Mode::Walk, Mode::Ensemble, Mode::Fd, Mode::Compare, Mode::Barrier}) {
        auto* sub = app.add_subcommand(std::string(to_string(m)));
        sub->add_option("--config", ropts.config_path, "JSON config or run manifest");
        sub->add_option("--preset", ropts.preset_name, "Named preset");
        sub->add_option("--out", ropts.out_dir, "Output directory");
        sub->add_option("--seed", ropts.seed, "Seed override");
        sub->add_option("--ensemble", ropts.ensemble, "Ensemble size override");
        sub->add_option("--threads", ropts.threads, "Worker threads (0 = all cores)");
        runs.emplace_back(sub, m);
    }
    auto* list = app.add_subcommand("presets", "List preset names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*weights) return run_weights(w_beta, w_n, w_variant, w_out, out);
        if (*kernel) return run_kernel(kargs, out);
        if (*list) {
            for (const auto& name : preset_names()) out << name << '\n';
            return kExitOk;
        }
        for (const auto& [sub, mode] : runs) {
            if (!*sub) continue;
            const RunConfig config = load_run_config(ropts);
            std::size_t threads = ropts.threads;
            if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
            const DispatchResult r = dispatch(mode, config, ropts.out_dir, threads);
            for (const auto& p : r.outputs) out << p.string() << '\n';
            if (r.exit_code == kExitTolerance)
                err << "oracle tolerance exceeded: " << r.report.value("tv_distance", 0.0) << " > "
                    << r.report.value("tolerance", 0.0) << '\n';
            return r.exit_code;
        }
    } catch (const StabilityError& e) {
        err << "stability error: " << e.what() << '\n';
        return kExitStability;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}

}  // namespace dodewalk
