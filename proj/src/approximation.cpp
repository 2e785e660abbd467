#include "ace/approximation.hpp"

#include <algorithm>

namespace ace {

Rat round_down(const Rat& c, const Rat& ell) {
  if (!(ell > 0))
    throw GameError(GameError::Kind::kDomain, "grid width must be positive");
  return Rat(rat_floor(Rat(c / ell))) * ell;
}

namespace {

// Keeps grid denominators bounded so downstream lattice keys stay cheap;
// only ever tightens the grid (never coarser than the formula value).
Rat snap_grid(const Rat& ell) {
  static const Int kDenCap = Int(1) << 20;
  if (denominator(ell) <= kDenCap) return ell;
  Rat snapped(floor_div(numerator(ell) * kDenCap, denominator(ell)), kDenCap);
  if (!(snapped > 0))
    throw GameError(GameError::Kind::kPrecision,
                    "grid width too small to represent");
  return snapped;
}

}  // namespace

RoundingSpec choose_ell(const ConstrainedMarkovGame& g, const Rat& eps,
                        RoundingMode mode) {
  if (!(eps > 0))
    throw GameError(GameError::Kind::kDomain, "eps must be positive");
  RoundingSpec spec;
  spec.mode = mode;
  spec.eps = eps;
  auto cmax = g.global_max_cost();
  std::vector<Rat> cmin(g.n_players);
  {
    bool first = true;
    for (int h = 1; h <= g.horizon; ++h)
      for (StateId s = 0; s < g.num_states(); ++s)
        for (JointAction a = 0; a < g.num_joint_actions(); ++a) {
          const StageDynamics& d = g.at(h, s, a);
          for (int i = 0; i < g.n_players; ++i) {
            Rat m;
            if (d.joint_form()) {
              m = d.cost_joint.front().value[i];
              for (auto& atom : d.cost_joint) m = std::min(m, atom.value[i]);
            } else {
              m = d.cost[i].min_support();
            }
            if (first || m < cmin[i]) cmin[i] = m;
          }
          first = false;
        }
  }
  for (int i = 0; i < g.n_players; ++i) {
    // The constraint is vacuous iff h * c_i^max <= B_i at every h in [H];
    // checking h = 1 and h = H covers both signs of c_i^max.
    bool vac = cmax[i] <= g.budget[i] &&
               Rat(cmax[i] * g.horizon) <= g.budget[i];
    spec.exempt.push_back(vac ? 1 : 0);
    if (vac) {
      spec.ell.push_back(Rat(0));
      spec.floor_val.push_back(Rat(0));
      spec.lowest_atom.push_back(Rat(0));
      continue;
    }
    Rat ell;
    if (mode == RoundingMode::kAdditive) {
      ell = eps / g.horizon;
    } else {
      if (g.budget[i] == 0)
        throw GameError(GameError::Kind::kDomain,
                        "relative mode needs a nonzero budget for player " +
                            std::to_string(i + 1));
      ell = eps * rat_abs(g.budget[i]) / g.horizon;
    }
    ell = snap_grid(ell);
    spec.ell.push_back(ell);
    Rat fl = g.budget[i] - Rat(g.horizon) * cmax[i];
    spec.floor_val.push_back(fl);
    // Absorbing mass at the floor is justified by "once at or below
    // B_i - H*c_i^max, even paying c_i^max every remaining step cannot
    // violate" — which needs c_i^max >= 0. With an all-negative support the
    // floor can sit above the support and absorbing there would *raise*
    // costs; keep it inert below the support instead (rounding alone still
    // gives the additive guarantee).
    Rat bottom_src = cmax[i] < 0 ? std::min(fl, cmin[i]) : fl;
    spec.lowest_atom.push_back(round_down(bottom_src, ell));
  }
  return spec;
}

ConstrainedMarkovGame build_approx_game(const ConstrainedMarkovGame& g,
                                        const RoundingSpec& spec,
                                        const ParseOptions& opts) {
  if (g.has_joint_costs())
    throw GameError(GameError::Kind::kDomain,
                    "approximation needs per-player product-form costs");
  ConstrainedMarkovGame out = g;
  for (int i = 0; i < g.n_players; ++i)
    if (spec.exempt[i]) out.budget[i] = 0;

  for (int h = 1; h <= g.horizon; ++h)
    for (StateId s = 0; s < g.num_states(); ++s)
      for (JointAction a = 0; a < g.num_joint_actions(); ++a) {
        StageDynamics& d = out.dyn[h - 1][s][a];
        for (int i = 0; i < g.n_players; ++i) {
          CostDist& c = d.cost[i];
          if (spec.exempt[i]) {
            c = CostDist{{CostAtom{Rat(0), Rat(1)}}, std::nullopt};
            continue;
          }
          const Rat& ell = spec.ell[i];
          const Rat& bottom = spec.lowest_atom[i];
          std::vector<CostAtom> atoms;
          if (c.continuous()) {
            // CDF differences of the uniform law: atom at grid point p holds
            // the mass of [p, p+ell), with the bottom atom absorbing all mass
            // below it.
            Rat lo = c.uniform->lo, hi = c.uniform->hi;
            Rat start = std::max(bottom, round_down(lo, ell));
            for (Rat p = start; p < hi; p += ell) {
              Rat wlo = (p == bottom) ? lo : std::max(lo, p);
              Rat whi = std::min(hi, Rat(p + ell));
              if (whi > wlo)
                atoms.push_back({p, Rat((whi - wlo) / (hi - lo))});
            }
          } else {
            for (auto& atom : c.atoms)
              atoms.push_back(
                  {std::max(round_down(atom.value, ell), bottom), atom.prob});
          }
          std::sort(atoms.begin(), atoms.end(),
                    [](const CostAtom& x, const CostAtom& y) {
                      return x.value < y.value;
                    });
          CostDist rounded;
          for (auto& atom : atoms) {
            if (!rounded.atoms.empty() &&
                rounded.atoms.back().value == atom.value)
              rounded.atoms.back().prob += atom.prob;
            else
              rounded.atoms.push_back(atom);
          }
          c = std::move(rounded);
        }
      }

  out.cost_scale = compute_cost_scale(out);
  if (opts.enforce_precision_cap) enforce_precision_cap(out, opts);
  return out;
}

}  // namespace ace
