#include "ace/solver.hpp"

namespace ace {

std::optional<SolveArtifacts> solve_acmg(const ConstrainedMarkovGame& g,
                                         const SolveOptions& opts) {
  ConstrainedMarkovGame scaled = scale_costs(g);
  auto sets = compute_feasible_sets(scaled, opts.limits);
  if (!sets) return std::nullopt;
  ReducedGame reduced = build_reduced_game(scaled, *sets, g.cost_scale);
  SolveArtifacts art{std::move(scaled),
                     std::move(*sets),
                     std::move(reduced),
                     {},
                     std::nullopt,
                     std::nullopt,
                     std::nullopt};
  art.sol = solve_reduced_game<double>(art.reduced, opts.kind);
  if (opts.exact)
    art.sol_exact = solve_reduced_game<Rat>(art.reduced, opts.kind);
  return art;
}

std::optional<SolveArtifacts> approx_solve(const ConstrainedMarkovGame& g,
                                           const Rat& eps, RoundingMode mode,
                                           const SolveOptions& opts) {
  RoundingSpec grid = choose_ell(g, eps, mode);
  ConstrainedMarkovGame rounded = build_approx_game(g, grid, opts.parse);
  auto art = solve_acmg(rounded, opts);
  if (!art) return std::nullopt;
  art->grid = std::move(grid);
  art->rounded = std::move(rounded);
  return art;
}

}  // namespace ace
