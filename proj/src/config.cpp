#include "dodewalk/config.hpp"

#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "dodewalk/errors.hpp"

namespace dodewalk {

namespace {

using nlohmann::json;

constexpr double kSquareMetresToNm = 1e18;

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "mode", "alpha", "a", "units", "beta", "variant", "dim", "h_nm", "p0", "tau_s", "T_s",
        "n_steps", "K", "J", "seed", "ensemble", "barrier", "loss_threshold", "tv_tolerance",
        "msd_stride", "preset"};
    return keys;
}

template <typename T>
T get_as(const json& doc, const char* key) {
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("config key '{}' has the wrong type: {}", key, e.what()));
    }
}

std::vector<double> number_list(const json& doc, const char* key) {
    if (!doc.contains(key)) throw ConfigError(fmt::format("missing required key '{}'", key));
    const json& v = doc.at(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError(fmt::format("config key '{}' must be a number or a list", key));
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError(fmt::format("config key '{}' must hold numbers", key));
        out.push_back(x.get<double>());
    }
    return out;
}

json base_preset(std::vector<double> alpha, double beta) {
    std::vector<double> a(alpha.size(), 9e-12);
    return json{{"mode", "walk"},   {"alpha", alpha}, {"a", a},     {"units", "m2/s"},
                {"beta", beta},     {"h_nm", 6.0},    {"p0", 0.0},  {"T_s", 1.0 / 30.0},
                {"K", 512},         {"J", 512},       {"seed", 1},  {"ensemble", 1}};
}

json compare_preset(std::vector<double> alpha, double beta, std::int64_t steps) {
    json doc = base_preset(std::move(alpha), beta);
    doc["mode"] = "compare";
    doc.erase("T_s");
    doc["n_steps"] = steps;
    doc["J"] = 128;
    doc["ensemble"] = 100000;
    doc["loss_threshold"] = 0.05;
    return doc;
}

const std::map<std::string, json>& presets() {
    static const std::map<std::string, json> table = [] {
        std::map<std::string, json> t;
        const std::vector<double> a2{2.0}, a15{1.5}, amix{1.5, 2.0}, a3{0.8, 1.3, 1.8};
        t["plot1-left"] = base_preset(a2, 1.0);
        t["plot1-middle"] = base_preset(a15, 1.0);
        t["plot1-right"] = base_preset(amix, 1.0);
        t["plot2-left"] = base_preset(a2, 0.999);
        t["plot2-middle"] = base_preset(a15, 0.999);
        t["plot2-right"] = base_preset(amix, 0.999);
        t["plot3-left"] = base_preset(a3, 0.999);
        t["plot3-middle"] = base_preset(a3, 0.99);
        t["plot3-right"] = base_preset(a3, 0.9);
        json kusumi = base_preset(a2, 1.0);
        kusumi["mode"] = "barrier";
        kusumi["barrier"] = {{"spacing_nm", 66.0}, {"p_escape", 0.01}};
        t["kusumi"] = kusumi;
        t["compare-plot1-left"] = compare_preset(a2, 1.0, 100);
        t["compare-plot1-middle"] = compare_preset(a15, 1.0, 3);
        t["compare-plot1-right"] = compare_preset(amix, 1.0, 10);
        t["compare-beta09"] = compare_preset(a2, 0.9, 100);
        for (auto& [name, doc] : t) doc["preset"] = name;
        return t;
    }();
    return table;
}

}  // namespace

std::string_view to_string(Mode mode) noexcept {
    switch (mode) {
    case Mode::Walk: return "walk";
    case Mode::Ensemble: return "ensemble";
    case Mode::Fd: return "fd";
    case Mode::Compare: return "compare";
    case Mode::Barrier: return "barrier";
    case Mode::Weights: return "weights";
    case Mode::Kernel: return "kernel";
    }
    return "";
}

Mode parse_mode(std::string_view name) {
    for (Mode m : {Mode::Walk, Mode::Ensemble, Mode::Fd, Mode::Compare, Mode::Barrier,
                   Mode::Weights, Mode::Kernel})
        if (to_string(m) == name) return m;
    throw ConfigError(fmt::format("unknown mode '{}'", name));
}

SpectralMixture RunConfig::mixture() const {
    if (alpha.size() != a.size())
        throw ConfigError(fmt::format("'alpha' has {} entries but 'a' has {}", alpha.size(), a.size()));
    double factor = 1.0;
    if (units == "m2/s")
        factor = kSquareMetresToNm;
    else if (units != "nm2/s")
        throw ConfigError(fmt::format("unknown units '{}' (expected m2/s or nm2/s)", units));
    SpectralMixture m;
    m.beta = beta;
    for (std::size_t i = 0; i < alpha.size(); ++i) m.terms.push_back({alpha[i], a[i] * factor});
    m.validate();
    return m;
}

RunConfig parse_config(const json& input) {
    if (!input.is_object()) throw ConfigError("config must be a JSON object");
    const json& doc = input.contains("config") && input.at("config").is_object() ? input.at("config")
                                                                                  : input;
    for (const auto& [key, _] : doc.items())
        if (!known_keys().contains(key)) throw ConfigError(fmt::format("unknown config key '{}'", key));

    RunConfig c;
    if (doc.contains("mode")) c.mode = parse_mode(get_as<std::string>(doc, "mode"));
    c.alpha = number_list(doc, "alpha");
    c.a = number_list(doc, "a");
    if (doc.contains("units")) c.units = get_as<std::string>(doc, "units");
    if (!doc.contains("beta")) throw ConfigError("missing required key 'beta'");
    c.beta = get_as<double>(doc, "beta");
    if (doc.contains("variant")) c.variant = parse_derivative(get_as<std::string>(doc, "variant"));
    if (doc.contains("dim")) c.dim = get_as<int>(doc, "dim");
    if (!doc.contains("h_nm")) throw ConfigError("missing required key 'h_nm'");
    c.h_nm = get_as<double>(doc, "h_nm");
    if (doc.contains("p0")) c.p0 = get_as<double>(doc, "p0");
    if (doc.contains("tau_s")) c.tau_s = get_as<double>(doc, "tau_s");
    if (c.p0 && c.tau_s) throw ConfigError("give either 'p0' or 'tau_s', not both");
    if (!c.p0 && !c.tau_s) throw ConfigError("missing required key 'p0' or 'tau_s'");
    if (doc.contains("T_s")) c.T_s = get_as<double>(doc, "T_s");
    if (doc.contains("n_steps")) c.n_steps = get_as<std::int64_t>(doc, "n_steps");
    if (!c.T_s && !c.n_steps) throw ConfigError("missing required key 'T_s' (or 'n_steps')");
    if (c.T_s && !(*c.T_s > 0.0)) throw ConfigError("'T_s' must be positive");
    if (c.n_steps && *c.n_steps < 1) throw ConfigError("'n_steps' must be at least 1");
    if (doc.contains("K")) c.K = get_as<int>(doc, "K");
    if (doc.contains("J")) c.J = get_as<int>(doc, "J");
    if (doc.contains("seed")) c.seed = get_as<std::uint64_t>(doc, "seed");
    if (doc.contains("ensemble")) c.ensemble = get_as<std::size_t>(doc, "ensemble");
    if (doc.contains("barrier")) {
        const json& b = doc.at("barrier");
        if (!b.is_object()) throw ConfigError("'barrier' must be an object");
        if (b.contains("spacing_nm")) c.barrier.spacing_nm = get_as<double>(b, "spacing_nm");
        if (b.contains("p_escape")) c.barrier.p_escape = get_as<double>(b, "p_escape");
    }
    if (doc.contains("loss_threshold")) c.loss_threshold = get_as<double>(doc, "loss_threshold");
    if (doc.contains("tv_tolerance")) c.tv_tolerance = get_as<double>(doc, "tv_tolerance");
    if (doc.contains("msd_stride")) c.msd_stride = get_as<std::size_t>(doc, "msd_stride");

    if (c.K < 1) throw ConfigError("'K' must be at least 1");
    if (c.J < 1) throw ConfigError("'J' must be at least 1");
    if (c.ensemble < 1) throw ConfigError("'ensemble' must be at least 1");
    if (c.dim < 1 || c.dim > 2) throw ConfigError("'dim' must be 1 or 2");
    if (!(c.h_nm > 0.0)) throw ConfigError("'h_nm' must be positive");
    static_cast<void>(c.mixture());  // validates alpha, a, beta and units
    return c;
}

json to_json(const RunConfig& c) {
    json doc{{"mode", to_string(c.mode)},
             {"alpha", c.alpha},
             {"a", c.a},
             {"units", c.units},
             {"beta", c.beta},
             {"variant", to_string(c.variant)},
             {"dim", c.dim},
             {"h_nm", c.h_nm},
             {"K", c.K},
             {"J", c.J},
             {"seed", c.seed},
             {"ensemble", c.ensemble},
             {"barrier", {{"spacing_nm", c.barrier.spacing_nm}, {"p_escape", c.barrier.p_escape}}},
             {"loss_threshold", c.loss_threshold},
             {"tv_tolerance", c.tv_tolerance},
             {"msd_stride", c.msd_stride}};
    if (c.p0) doc["p0"] = *c.p0;
    if (c.tau_s) doc["tau_s"] = *c.tau_s;
    if (c.T_s) doc["T_s"] = *c.T_s;
    if (c.n_steps) doc["n_steps"] = *c.n_steps;
    return doc;
}

Resolution resolve(const RunConfig& config) {
    Resolution r;
    WalkConfig& w = r.walk;
    w.mixture = config.mixture();
    w.variant = config.variant;
    w.dim = config.dim;
    w.h = config.h_nm;
    w.K = config.K;
    w.seed = config.seed;
    w.ensemble = config.ensemble;
    if (config.mode == Mode::Barrier) w.barrier = config.barrier;

    const LatticeGeometry geometry = build_shells(config.dim, config.K, config.h_nm);
    r.rates = q_zero(w.mixture, geometry);
    r.markov_mass = markov_weight(config.variant, config.beta);
    w.tau = config.p0 ? tau_for_p0(w.mixture, r.rates, *config.p0, config.variant) : *config.tau_s;
    r.stability = stability_check(w.mixture, r.rates, w.tau, config.variant);
    if (!r.stability.stable)
        throw StabilityError(fmt::format(
            "unstable time step: tau = {} s exceeds the stability bound tau_max = {} s "
            "(nu tau^beta q_0 <= w_n with q_0 = {} 1/s, w_n = {})",
            w.tau, r.stability.tau_max, r.rates.q0, r.markov_mass));
    const double nu = time_scale_factor(config.variant, config.beta);
    r.p0 = r.markov_mass - nu * std::pow(w.tau, config.beta) * r.rates.q0;
    if (r.p0 < 0.0) r.p0 = 0.0;

    if (config.n_steps) {
        w.n_steps = *config.n_steps;
        w.duration = static_cast<double>(w.n_steps) * w.tau;
    } else {
        w.duration = *config.T_s;
        w.n_steps = static_cast<std::int64_t>(std::floor(w.duration / w.tau * (1.0 + 1e-12)));
        if (w.n_steps < 1)
            throw ConfigError(fmt::format("T_s = {} s is shorter than one time step ({} s)",
                                          w.duration, w.tau));
    }
    w.config_hash = config_hash(to_json(config));
    return r;
}

nlohmann::json preset(std::string_view name) {
    const auto& t = presets();
    const auto it = t.find(std::string(name));
    if (it == t.end()) throw ConfigError(fmt::format("unknown preset '{}'", name));
    return it->second;
}

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [name, _] : presets()) names.push_back(name);
    return names;
}

std::string config_hash(const nlohmann::json& config) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : config.dump()) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return fmt::format("{:016x}", h);
}

}  // namespace dodewalk
