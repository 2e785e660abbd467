#pragma once

#include <optional>

#include "ace/approximation.hpp"
#include "ace/equilibrium.hpp"

namespace ace {

struct SolveOptions {
  EquilibriumKind kind = EquilibriumKind::kCCE;
  bool exact = false;  // additionally produce an exact-rational solution
  SizeLimits limits;
  ParseOptions parse;
};

// Everything downstream checks need: the lattice game actually solved, the
// feasible sets, the reduced game, and the solution(s). For the approximate
// path the rounded game and grid ride along.
struct SolveArtifacts {
  ConstrainedMarkovGame scaled;
  FeasibleSets sets;
  ReducedGame reduced;
  AceSolution<double> sol;
  std::optional<AceSolution<Rat>> sol_exact;
  std::optional<RoundingSpec> grid;
  std::optional<ConstrainedMarkovGame> rounded;  // original units
};

// Full exact pipeline: scale -> feasible sets -> reduced game -> backward
// induction. Returns nothing when the instance is infeasible.
std::optional<SolveArtifacts> solve_acmg(const ConstrainedMarkovGame& g,
                                         const SolveOptions& opts = {});

// Grid rounding followed by the exact pipeline on the rounded game.
std::optional<SolveArtifacts> approx_solve(const ConstrainedMarkovGame& g,
                                           const Rat& eps, RoundingMode mode,
                                           const SolveOptions& opts = {});

}  // namespace ace
