#include "dodewalk/io.hpp"

#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace dodewalk {

void write_trajectory_csv(const Trajectory& t, std::ostream& out) {
    out << "step,t_s,x_nm,y_nm,type,k1,k2,revisit_m,jump_nm\n";
    auto coord = [&](const Offset& p, int axis) -> std::string {
        return axis < t.dim ? fmt::format("{}", static_cast<double>(p[axis]) * t.h) : std::string{};
    };
    fmt::print(out, "0,0,{},{},,,,,\n", coord(t.positions[0], 0), coord(t.positions[0], 1));
    for (std::size_t i = 0; i < t.records.size(); ++i) {
        const JumpRecord& r = t.records[i];
        const Offset& p = t.positions[i + 1];
        std::string k1, k2, revisit;
        if (r.type == StepType::Markovian) {
            k1 = fmt::format("{}", r.offset[0]);
            if (t.dim > 1) k2 = fmt::format("{}", r.offset[1]);
        }
        if (r.type == StepType::NonMarkovian) revisit = fmt::format("{}", r.revisit);
        fmt::print(out, "{},{},{},{},{},{},{},{},{}\n", i + 1, static_cast<double>(i + 1) * t.tau,
                   coord(p, 0), coord(p, 1), to_string(r.type), k1, k2, revisit, r.jump_nm);
    }
}

void write_positions_csv(std::span<const Offset> positions, int dim, double h, std::ostream& out) {
    out << "walker,x_nm,y_nm\n";
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const double x = static_cast<double>(positions[i][0]) * h;
        if (dim > 1)
            fmt::print(out, "{},{},{}\n", i, x, static_cast<double>(positions[i][1]) * h);
        else
            fmt::print(out, "{},{},\n", i, x);
    }
}

void write_density_csv(const DensityGrid& grid, std::ostream& out) {
    out << "j1,j2,u\n";
    const auto& u = grid.current();
    for (std::size_t s = 0; s < u.size(); ++s) {
        const Offset j = grid.site(s);
        if (grid.dim > 1)
            fmt::print(out, "{},{},{}\n", j[0], j[1], u[s]);
        else
            fmt::print(out, "{},,{}\n", j[0], u[s]);
    }
}

void write_kernel_csv(const JumpKernel& kernel, const SpectralMixture& mixture,
                      const LatticeGeometry& geometry, std::ostream& out) {
    for (int i = 0; i < kernel.dim; ++i) fmt::print(out, "k{},", i + 1);
    out << "q_k,p_k\n";
    for (std::size_t e = 0; e < kernel.size(); ++e) {
        const Offset& k = kernel.offsets[e];
        for (int i = 0; i < kernel.dim; ++i) fmt::print(out, "{},", k[i]);
        fmt::print(out, "{},{}\n", q_coefficient(k, mixture, geometry), kernel.prob[e]);
    }
}

nlohmann::json to_json(const WalkSummary& s) {
    nlohmann::json msd = nlohmann::json::array();
    for (const auto& [t, m] : s.msd_series) msd.push_back({t, m});
    return {{"avg_jump_nm", s.avg_jump_nm}, {"jump_sd_nm", s.jump_sd_nm},
            {"n_jumps", s.n_jumps},         {"n_steps", s.n_steps},
            {"n_stays", s.n_stays},         {"nonmarkov_fraction", s.nonmarkov_fraction},
            {"msd_series", msd},            {"config_hash", s.config_hash}};
}

nlohmann::json to_json(const KernelRates& rates) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : rates.terms)
        terms.push_back({{"alpha", t.alpha},
                         {"a_nm", t.a},
                         {"b", t.b},
                         {"R_truncated", t.lattice.value},
                         {"R_tail_bound", t.lattice.tail_bound},
                         {"R_tail_estimate", t.lattice.tail_estimate},
                         {"rate", t.rate}});
    const double bound_fraction = rates.q0 > 0.0 ? rates.tail_bound_rate / rates.q0 : 0.0;
    nlohmann::json doc{{"q0", rates.q0},
                       {"q0_truncated", rates.q0_truncated},
                       {"tail_rate", rates.tail_rate},
                       {"tail_bound_rate", rates.tail_bound_rate},
                       {"tail_fraction", rates.q0 > 0.0 ? rates.tail_rate / rates.q0 : 0.0},
                       {"terms", terms}};
    if (bound_fraction > kTailTolerance)
        doc["tail_warning"] = fmt::format(
            "tail bound is {:.3g} of q_0 (target {:g}); the tail is folded into the outermost shell, "
            "raise K to shrink it",
            bound_fraction, kTailTolerance);
    return doc;
}

nlohmann::json mass_ledger_json(const DensityGrid& grid) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : grid.ledger)
        rows.push_back({{"n", e.n}, {"in_box", e.in_box}, {"boundary_loss", e.boundary_loss},
                        {"defect", e.defect}});
    return rows;
}

}  // namespace dodewalk
