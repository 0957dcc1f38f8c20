#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dodewalk/spacefrac.hpp"
#include "dodewalk/timefrac.hpp"
#include "dodewalk/walk.hpp"

namespace dodewalk {

enum class Mode { Walk, Ensemble, Fd, Compare, Barrier, Weights, Kernel };

std::string_view to_string(Mode mode) noexcept;
Mode parse_mode(std::string_view name);

/// Run configuration as written by the user, before tau and n_steps are derived.
struct RunConfig {
    Mode mode = Mode::Walk;
    std::vector<double> alpha;
    std::vector<double> a;           // as given, in `units`
    std::string units = "m2/s";      // "m2/s" or "nm2/s"
    double beta = 1.0;
    Derivative variant = Derivative::Caputo;
    int dim = 2;
    double h_nm = 6.0;
    std::optional<double> p0;
    std::optional<double> tau_s;
    std::optional<double> T_s;
    std::optional<std::int64_t> n_steps;
    int K = 512;
    int J = 512;
    std::uint64_t seed = 0;
    std::size_t ensemble = 1;
    BarrierOptions barrier;
    double loss_threshold = 1e-3;
    double tv_tolerance = 0.05;
    std::size_t msd_stride = 0;

    /// Mixture in internal units (nm, s).
    [[nodiscard]] SpectralMixture mixture() const;
};

/// Parse and validate a config document. A run manifest (an object with a
/// "config" member) is accepted as well. Throws ConfigError naming the
/// violated key or condition.
RunConfig parse_config(const nlohmann::json& doc);
nlohmann::json to_json(const RunConfig& config);

/// Derived quantities for a configuration.
struct Resolution {
    WalkConfig walk;
    KernelRates rates;
    StabilityReport stability;
    double markov_mass = 1.0;  // w_n
    double p0 = 0.0;           // staying probability implied by tau
};

/// Derive tau (from p0 when given) and n_steps = floor(T / tau). Throws
/// InfeasibleError for an unreachable p0 and StabilityError for tau above tau_max.
Resolution resolve(const RunConfig& config);

nlohmann::json preset(std::string_view name);
std::vector<std::string> preset_names();

/// 64-bit FNV-1a of the canonical config dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

}  // namespace dodewalk
