#include "dodewalk/walk.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "dodewalk/errors.hpp"

namespace dodewalk {

namespace {

constexpr std::size_t kBlockSize = 64;

Offset add(const Offset& a, const Offset& b) noexcept {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

Offset sub(const Offset& a, const Offset& b) noexcept {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

double norm_sq(const Offset& k) noexcept {
    return static_cast<double>(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
}

// Runs the step protocol and reports every transition to `observe`.
template <typename Observer>
void simulate(const WalkModel& model, const DeviateStream& stream, std::vector<Offset>& positions,
              Observer&& observe) {
    const auto& cfg = model.config();
    const auto& kernel = model.kernel();
    const auto& coeffs = model.coefficients();
    const auto steps = static_cast<std::size_t>(cfg.n_steps);
    positions.clear();
    positions.reserve(steps + 1);
    positions.push_back(Offset{});
    for (std::size_t n = 0; n < steps; ++n) {
        const Offset cur = positions[n];
        const StepChoice choice = sample_step(kernel, coeffs, n, stream.uniform(n));
        JumpRecord rec;
        rec.step = static_cast<std::int64_t>(n);
        Offset next = cur;
        if (const auto* r = std::get_if<Revisit>(&choice)) {
            next = positions[r->m];
            rec.type = StepType::NonMarkovian;
            rec.revisit = static_cast<std::int64_t>(r->m);
            rec.offset = sub(next, cur);
            rec.jump_nm = std::sqrt(norm_sq(rec.offset)) * cfg.h;
        } else if (const auto e = std::get<Jump>(choice).entry; e >= 0) {
            const auto idx = static_cast<std::size_t>(e);
            rec.type = StepType::Markovian;
            rec.offset = kernel.offsets[idx];
            rec.jump_nm = kernel.radius[idx] * cfg.h;
            next = add(cur, rec.offset);
        } else {
            rec.type = StepType::Stay;
        }
        positions.push_back(next);
        observe(rec);
    }
}

}  // namespace

std::string_view to_string(StepType t) noexcept {
    switch (t) {
    case StepType::Markovian: return "markov";
    case StepType::NonMarkovian: return "nonmarkov";
    case StepType::Stay: return "stay";
    }
    return "";
}

double offset_length(const Offset& k, int dim) noexcept {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += static_cast<double>(k[i]) * static_cast<double>(k[i]);
    return std::sqrt(s);
}

WalkModel::WalkModel(WalkConfig config)
    : config_(std::move(config)), coeffs_(config_.variant, config_.mixture.beta) {
    config_.mixture.validate();
    if (config_.n_steps < 1)
        throw ConfigError(fmt::format("walk needs at least one step, got n_steps = {}", config_.n_steps));
    const LatticeGeometry geometry = build_shells(config_.dim, config_.K, config_.h);
    rates_ = q_zero(config_.mixture, geometry);
    stability_ = stability_check(config_.mixture, rates_, config_.tau, config_.variant);
    if (!stability_.stable)
        throw StabilityError(fmt::format(
            "unstable time step: tau = {} s exceeds tau_max = {} s (nu tau^beta q_0 <= w_n)",
            config_.tau, stability_.tau_max));
    kernel_ = build_kernel(config_.mixture, geometry, config_.tau, config_.variant);
    coeffs_.extend_to(static_cast<std::size_t>(config_.n_steps));
}

void WalkTally::record(StepType type, double length_nm) noexcept {
    ++steps;
    switch (type) {
    case StepType::Markovian: ++markovian; break;
    case StepType::NonMarkovian: ++nonmarkovian; break;
    case StepType::Stay: ++stays; break;
    }
    if (length_nm > 0.0) {
        ++jumps;
        jump_nm.add(length_nm);
        jump_nm_sq.add(length_nm * length_nm);
    }
}

WalkTally& WalkTally::operator+=(const WalkTally& other) noexcept {
    steps += other.steps;
    markovian += other.markovian;
    nonmarkovian += other.nonmarkovian;
    stays += other.stays;
    jumps += other.jumps;
    jump_nm += other.jump_nm;
    jump_nm_sq += other.jump_nm_sq;
    return *this;
}

Trajectory run_walk(const WalkModel& model, const DeviateStream& stream) {
    const auto& cfg = model.config();
    Trajectory t;
    t.dim = cfg.dim;
    t.h = cfg.h;
    t.tau = cfg.tau;
    t.seed = cfg.seed;
    t.walker = stream.walker();
    t.config_hash = cfg.config_hash;
    t.records.reserve(static_cast<std::size_t>(cfg.n_steps));
    simulate(model, stream, t.positions, [&](const JumpRecord& r) { t.records.push_back(r); });
    return t;
}

namespace {

struct BlockResult {
    std::vector<Offset> finals;
    std::vector<Trajectory> trajectories;
    WalkTally tally;
    std::vector<double> msd_sum;  // lattice units squared
};

BlockResult run_block(const WalkModel& model, std::uint64_t seed, std::size_t begin,
                      std::size_t end, const EnsembleOptions& options, std::size_t msd_points) {
    BlockResult out;
    out.finals.reserve(end - begin);
    out.msd_sum.assign(msd_points, 0.0);
    std::vector<Offset> positions;
    for (std::size_t i = begin; i < end; ++i) {
        const DeviateStream stream = derive_stream(seed, i);
        if (options.keep_trajectories) {
            Trajectory t = run_walk(model, stream);
            for (const auto& r : t.records) out.tally.record(r.type, r.jump_nm);
            positions = t.positions;
            out.trajectories.push_back(std::move(t));
        } else {
            simulate(model, stream, positions,
                     [&](const JumpRecord& r) { out.tally.record(r.type, r.jump_nm); });
        }
        out.finals.push_back(positions.back());
        for (std::size_t p = 0; p < msd_points; ++p)
            out.msd_sum[p] += norm_sq(positions[p * options.msd_stride]);
    }
    return out;
}

}  // namespace

EnsembleResult run_ensemble(const WalkModel& model, std::uint64_t seed, std::size_t ensemble,
                            const EnsembleOptions& options) {
    if (ensemble < 1) throw ConfigError("ensemble size must be at least 1");
    const auto steps = static_cast<std::size_t>(model.config().n_steps);
    const std::size_t msd_points = options.msd_stride == 0 ? 0 : steps / options.msd_stride + 1;
    const std::size_t blocks = (ensemble + kBlockSize - 1) / kBlockSize;
    std::vector<BlockResult> results(blocks);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t b = next++; b < blocks; b = next++) {
            const std::size_t begin = b * kBlockSize;
            const std::size_t end = std::min(ensemble, begin + kBlockSize);
            results[b] = run_block(model, seed, begin, end, options, msd_points);
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, blocks);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    EnsembleResult out;
    out.final_positions.reserve(ensemble);
    std::vector<double> msd(msd_points, 0.0);
    for (auto& r : results) {
        out.final_positions.insert(out.final_positions.end(), r.finals.begin(), r.finals.end());
        for (auto& t : r.trajectories) out.trajectories.push_back(std::move(t));
        out.tally += r.tally;
        for (std::size_t p = 0; p < msd_points; ++p) msd[p] += r.msd_sum[p];
    }
    const double h2 = model.config().h * model.config().h;
    for (std::size_t p = 0; p < msd_points; ++p) {
        out.msd_steps.push_back(static_cast<std::int64_t>(p * options.msd_stride));
        out.msd_nm2.push_back(msd[p] * h2 / static_cast<double>(ensemble));
    }
    return out;
}

std::int64_t barrier_cell(std::int64_t x, std::int64_t cell) noexcept {
    const std::int64_t shifted = x + cell / 2;
    return shifted >= 0 ? shifted / cell : -((-shifted + cell - 1) / cell);
}

Trajectory barrier_walk(const WalkModel& model, const DeviateStream& stream,
                        const BarrierOptions& barrier, BarrierSummary* summary) {
    const auto& cfg = model.config();
    if (cfg.mixture.beta != 1.0 || !cfg.mixture.pure_laplacian())
        throw ConfigError("barrier mode requires beta = 1 and alpha = [2] (Brownian baseline)");
    const double ratio = barrier.spacing_nm / cfg.h;
    const auto cell = static_cast<std::int64_t>(std::llround(ratio));
    if (cell < 1 || std::fabs(ratio - static_cast<double>(cell)) > 1e-9)
        throw ConfigError(fmt::format("barrier spacing {} nm must be a positive multiple of h = {} nm",
                                      barrier.spacing_nm, cfg.h));
    if (!(barrier.p_escape >= 0.0 && barrier.p_escape <= 1.0))
        throw ConfigError("barrier escape probability must lie in [0, 1]");

    const auto& kernel = model.kernel();
    Trajectory t;
    t.dim = cfg.dim;
    t.h = cfg.h;
    t.tau = cfg.tau;
    t.seed = cfg.seed;
    t.walker = stream.walker();
    t.config_hash = cfg.config_hash;
    const auto steps = static_cast<std::size_t>(cfg.n_steps);
    t.positions.reserve(steps + 1);
    t.records.reserve(steps);
    t.positions.push_back(Offset{});

    BarrierSummary s;
    s.cell_sites = cell;
    auto cell_of = [&](const Offset& p) {
        Offset c{};
        for (int i = 0; i < cfg.dim; ++i) c[i] = barrier_cell(p[i], cell);
        return c;
    };
    std::set<Offset> visited{cell_of(Offset{})};

    for (std::size_t n = 0; n < steps; ++n) {
        const Offset cur = t.positions[n];
        const auto u = stream.uniforms(n);
        const auto e = sample_jump_index(kernel, u[0], kernel.p0_at(n));
        JumpRecord rec;
        rec.step = static_cast<std::int64_t>(n);
        Offset next = cur;
        if (e >= 0) {
            const Offset target = add(cur, kernel.offsets[static_cast<std::size_t>(e)]);
            bool accept = true;
            if (cell_of(target) != cell_of(cur)) {
                ++s.attempted_crossings;
                accept = u[1] < barrier.p_escape;
                if (accept) ++s.escapes;
            }
            if (accept) {
                next = target;
                rec.type = StepType::Markovian;
                rec.offset = sub(next, cur);
                rec.jump_nm = kernel.radius[static_cast<std::size_t>(e)] * cfg.h;
                visited.insert(cell_of(next));
            }
        }
        t.positions.push_back(next);
        t.records.push_back(rec);
    }
    s.cells_visited = static_cast<std::int64_t>(visited.size());
    if (summary) *summary = s;
    return t;
}

}  // namespace dodewalk
