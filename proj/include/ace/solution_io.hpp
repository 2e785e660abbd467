#pragma once

#include <string>

#include "ace/solver.hpp"

namespace ace {

// Solution document: kind, metadata, optional approx block, and the policy
// and value table keyed by (h, state name, cumulative cost in original
// units). Probabilities/values are JSON numbers (shortest round-trip) for
// the floating solution and exact "p/q" strings for --exact solutions.
std::string serialize_solution(const SolveArtifacts& art);

// Header fields of a solution document needed to rebuild the pipeline.
struct SolutionHeader {
  EquilibriumKind kind = EquilibriumKind::kCCE;
  bool exact = false;
  bool approx = false;
  Rat eps;
  RoundingMode mode = RoundingMode::kAdditive;
};

SolutionHeader parse_solution_header(const std::string& text);

// Replaces art.sol's policy and values by the document's, mapped onto
// art.reduced by (h, state, cumulative cost). Throws a domain error when the
// document does not cover the reduced game exactly (missing/unknown states,
// unknown actions) — which is itself a verification failure.
void apply_solution_document(SolveArtifacts& art, const std::string& text);

// The reduced game in the game-schema family: augmented flag, augmented
// state names, per-state allowed joint actions, transitions and rewards.
std::string serialize_reduced_game(const ReducedGame& g);

}  // namespace ace
