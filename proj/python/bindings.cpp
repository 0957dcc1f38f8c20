#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "dodewalk/cli.hpp"
#include "dodewalk/config.hpp"
#include "dodewalk/errors.hpp"
#include "dodewalk/fdsolve.hpp"
#include "dodewalk/stats.hpp"
#include "dodewalk/walk.hpp"

namespace py = pybind11;
using namespace dodewalk;

namespace {

RunConfig config_from(const std::string& text) {
    return parse_config(nlohmann::json::parse(text));
}

py::array_t<double> vector_array(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

py::array_t<std::int64_t> offsets_array(const std::vector<Offset>& rows, int dim) {
    py::array_t<std::int64_t> out({static_cast<py::ssize_t>(rows.size()), static_cast<py::ssize_t>(dim)});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int d = 0; d < dim; ++d) v(static_cast<py::ssize_t>(i), d) = rows[i][d];
    return out;
}

py::dict kernel_dict(const std::vector<double>& alpha, const std::vector<double>& a, double beta, double h,
                     int K, int dim, double p0, const std::string& units, const std::string& variant) {
    RunConfig c;
    c.alpha = alpha;
    c.a = a;
    c.beta = beta;
    c.units = units;
    c.variant = parse_derivative(variant);
    const SpectralMixture m = c.mixture();
    const LatticeGeometry g = build_shells(dim, K, h);
    const KernelRates rates = q_zero(m, g);
    const double tau = tau_for_p0(m, rates, p0, c.variant);
    const JumpKernel k = build_kernel(m, g, tau, c.variant);
    py::dict d;
    d["offsets"] = offsets_array(k.offsets, dim);
    d["prob"] = vector_array(k.prob);
    d["p0"] = k.p0;
    d["tau"] = tau;
    d["tau_max"] = stability_check(m, rates, tau, c.variant).tau_max;
    d["q0"] = rates.q0;
    d["markov_mass"] = k.markov_mass;
    d["tail_remainder"] = k.tail_remainder;
    return d;
}

py::dict walk_dict(const std::string& config, std::uint64_t walker) {
    const Resolution r = resolve(config_from(config));
    const WalkModel model(r.walk);
    const Trajectory t = run_walk(model, derive_stream(r.walk.seed, walker));
    std::vector<std::string> types;
    types.reserve(t.records.size());
    for (const auto& rec : t.records) types.emplace_back(to_string(rec.type));
    py::dict d;
    d["positions_nm"] = py::array_t<double>(offsets_array(t.positions, t.dim)).attr("__mul__")(t.h);
    d["types"] = types;
    d["tau"] = t.tau;
    d["avg_jump_nm"] = avg_jump_size(t);
    d["nonmarkov_fraction"] = nonmarkov_fraction(t);
    return d;
}

py::dict ensemble_dict(const std::string& config, std::size_t threads) {
    const RunConfig cfg = config_from(config);
    const Resolution r = resolve(cfg);
    const WalkModel model(r.walk);
    EnsembleOptions opts;
    opts.threads = threads;
    opts.msd_stride = cfg.msd_stride;
    EnsembleResult e;
    {
        py::gil_scoped_release release;
        e = run_ensemble(model, cfg.seed, cfg.ensemble, opts);
    }
    const WalkSummary s = summarize(e.tally, r.walk.tau, e.msd_steps, e.msd_nm2, r.walk.config_hash);
    py::dict d;
    d["final_positions"] = offsets_array(e.final_positions, r.walk.dim);
    d["avg_jump_nm"] = s.avg_jump_nm;
    d["n_jumps"] = s.n_jumps;
    d["nonmarkov_fraction"] = s.nonmarkov_fraction;
    d["msd"] = s.msd_series;
    return d;
}

py::dict fd_dict(const std::string& config) {
    const RunConfig cfg = config_from(config);
    const Resolution r = resolve(cfg);
    const WalkModel model(r.walk);
    MemoryCoefficients coeffs(r.walk.variant, r.walk.mixture.beta);
    FdOptions opts;
    opts.loss_threshold = cfg.loss_threshold;
    DensityGrid g;
    {
        py::gil_scoped_release release;
        g = fd_run(model.kernel(), coeffs, delta_initial(r.walk.dim, cfg.J, r.walk.tau, r.walk.h),
                   static_cast<std::size_t>(r.walk.n_steps), opts);
    }
    std::vector<py::ssize_t> shape(static_cast<std::size_t>(g.dim), static_cast<py::ssize_t>(g.side));
    py::array_t<double> density(shape);
    std::copy(g.current().begin(), g.current().end(), density.mutable_data());
    py::dict d;
    d["density"] = density;
    d["boundary_loss"] = g.boundary_loss;
    d["n_steps"] = g.n;
    return d;
}

}  // namespace

PYBIND11_MODULE(_dodewalk, m) {
    m.doc() = "Random walks and density solver for multi-term fractional diffusion";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    auto stability = py::register_exception<StabilityError>(m, "StabilityError", PyExc_ArithmeticError);
    py::register_exception<BoundaryLossError>(m, "BoundaryLossError", PyExc_RuntimeError);
    static_cast<void>(stability);

    m.def("weights",
          [](double beta, std::int64_t n, const std::string& variant) {
              const WeightTable t = make_weights(parse_derivative(variant), n, beta);
              return vector_array(t.w);
          },
          py::arg("beta"), py::arg("n"), py::arg("variant") = "caputo");
    m.def("markov_weight",
          [](double beta, const std::string& variant) { return markov_weight(parse_derivative(variant), beta); },
          py::arg("beta"), py::arg("variant") = "caputo");
    m.def("lattice_sum",
          [](double alpha, int dim, std::int64_t K) {
              const LatticeSum s = lattice_sum(alpha, dim, K);
              return py::dict(py::arg("value") = s.value, py::arg("tail_bound") = s.tail_bound,
                              py::arg("tail_estimate") = s.tail_estimate);
          },
          py::arg("alpha"), py::arg("dim"), py::arg("K"));
    m.def("kernel", &kernel_dict, py::arg("alpha"), py::arg("a"), py::arg("beta") = 1.0, py::arg("h") = 6.0,
          py::arg("K") = 512, py::arg("dim") = 2, py::arg("p0") = 0.0, py::arg("units") = "m2/s",
          py::arg("variant") = "caputo");
    m.def("preset", [](const std::string& name) { return preset(name).dump(); }, py::arg("name"));
    m.def("preset_names", &preset_names);
    m.def("resolve",
          [](const std::string& config) {
              const Resolution r = resolve(config_from(config));
              return py::dict(py::arg("tau") = r.walk.tau, py::arg("tau_max") = r.stability.tau_max,
                              py::arg("n_steps") = r.walk.n_steps, py::arg("q0") = r.rates.q0,
                              py::arg("markov_mass") = r.markov_mass, py::arg("p0") = r.p0);
          },
          py::arg("config"));
    m.def("walk", &walk_dict, py::arg("config"), py::arg("walker") = 0);
    m.def("ensemble", &ensemble_dict, py::arg("config"), py::arg("threads") = 1);
    m.def("fd", &fd_dict, py::arg("config"));
    m.def("run",
          [](const std::string& mode, const std::string& config, const std::filesystem::path& out,
             std::size_t threads) {
              const DispatchResult r = dispatch(parse_mode(mode), config_from(config), out, threads);
              return py::make_tuple(r.exit_code, r.report.dump());
          },
          py::arg("mode"), py::arg("config"), py::arg("out"), py::arg("threads") = 1);
    m.attr("__version__") = kToolVersion;
}
