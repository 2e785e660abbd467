#pragma once

#include <vector>

#include "ace/game.hpp"

namespace ace {

enum class RoundingMode { kAdditive, kRelative };

inline const char* mode_name(RoundingMode m) {
  return m == RoundingMode::kAdditive ? "additive" : "relative";
}

struct RoundingSpec {
  RoundingMode mode = RoundingMode::kAdditive;
  Rat eps;
  std::vector<Rat> ell;          // per player; meaningful iff not exempt
  std::vector<Rat> floor_val;    // B_i - H * c_i^max
  std::vector<Rat> lowest_atom;  // round_down(floor_val, ell): grid bottom
  std::vector<char> exempt;      // constraint provably vacuous

  // Allowed overshoot of the true cumulative cost above B_i.
  Rat allowance(int i, const Rat& budget_i) const {
    if (exempt[i]) return Rat(0);
    return mode == RoundingMode::kAdditive ? eps : Rat(eps * rat_abs(budget_i));
  }
};

// Largest integer multiple of ell that is <= c (floor toward minus infinity).
Rat round_down(const Rat& c, const Rat& ell);

// Grid widths per the approximation guarantee: additive eps/H for everyone,
// relative eps*|B_i|/H per player. Players whose constraint can never bind
// (h * c_i^max <= B_i for every h in [H]) are exempted from rounding.
RoundingSpec choose_ell(const ConstrainedMarkovGame& g, const Rat& eps,
                        RoundingMode mode);

// The rounded game: every non-exempt player's cost source pushed onto the
// ell-grid with the bottom atom absorbing all mass below the truncation
// floor; exempt players get deterministic zero cost and zero budget. Product
// form required.
ConstrainedMarkovGame build_approx_game(const ConstrainedMarkovGame& g,
                                        const RoundingSpec& spec,
                                        const ParseOptions& opts = {});

}  // namespace ace
