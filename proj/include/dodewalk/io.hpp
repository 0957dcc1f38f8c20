#pragma once

#include <iosfwd>
#include <span>

#include <nlohmann/json.hpp>

#include "dodewalk/fdsolve.hpp"
#include "dodewalk/spacefrac.hpp"
#include "dodewalk/stats.hpp"
#include "dodewalk/transition.hpp"
#include "dodewalk/walk.hpp"

namespace dodewalk {

/// `step,t_s,x_nm,y_nm,type,k1,k2,revisit_m,jump_nm`; row 0 is the start.
void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out);
/// `walker,x_nm,y_nm`.
void write_positions_csv(std::span<const Offset> positions, int dim, double h, std::ostream& out);
/// `j1,j2,u` for every site of the current grid.
void write_density_csv(const DensityGrid& grid, std::ostream& out);
/// `k1,...,kN,q_k,p_k`.
void write_kernel_csv(const JumpKernel& kernel, const SpectralMixture& mixture,
                      const LatticeGeometry& geometry, std::ostream& out);

nlohmann::json to_json(const WalkSummary& summary);
/// Tail bound relative to q_0 above which kernel reports carry a `tail_warning`.
inline constexpr double kTailTolerance = 1e-9;

nlohmann::json to_json(const KernelRates& rates);
nlohmann::json mass_ledger_json(const DensityGrid& grid);

}  // namespace dodewalk
