#pragma once

// Brute-force checker for the event LP: exhaustive grid search over cell
// probabilities P(y=1|w,x), plus seeded scenario generators with a known
// generating table.

#include "dcc/core.hpp"
#include "dcc/sharp_bounds.hpp"

#include <random>
#include <set>

namespace dcc {

struct OracleConfig {
  double step = 1e-3;
  /// Row-equality tolerance; defaults to step * |X|.
  std::optional<double> constraint_tol;
  std::uint64_t seed = 1;
  /// Maximum number of grid assignments of the non-pivot cells of a row
  /// (summed over rows) or, with bounded variation, of row combinations.
  double budget = 1e7;

  double tol_for(Index nx) const { return constraint_tol.value_or(step * static_cast<double>(nx)); }
};

/// How far oracle and LP intervals may legitimately differ: grid points
/// within the tolerance can overshoot the exact region by at most
/// tol / P(x = target), and rounding an exact optimum onto the grid costs at
/// most one step.
template <typename Scalar>
Scalar oracle_slack(const Scenario<Scalar>& s, Index target, const OracleConfig& cfg) {
  const auto& j = s.joint();
  return Scalar(cfg.step) + Scalar(cfg.tol_for(j.cols())) / j.px()[target];
}

namespace detail {

struct GridRow {
  // Cells of one w row with positive mass: x index and P(x | w).
  std::vector<Index> xs;
  std::vector<double> coef;
  std::size_t pivot = 0;
};

}  // namespace detail

template <typename Scalar>
BoundInterval<Scalar> grid_enumerate_bounds(const Scenario<Scalar>& s, Index target, const OracleConfig& cfg,
                                            const BvSpec<Scalar>& bv = {}) {
  require_valid(s);
  if (!s.binary_outcome()) throw Error(Errc::WrongShape, "oracle needs outcome support {0, 1}");
  if (!(cfg.step > 0.0 && cfg.step <= 0.5)) throw Error(Errc::InvalidArgument, "oracle step must lie in (0, 0.5]");
  bv.check(s);
  const auto& j = s.joint();
  if (target < 0 || target >= j.cols()) throw Error(Errc::InvalidArgument, "target out of range");

  const Index nw = j.rows(), nx = j.cols();
  const Mat<double> x_given_w = condition_x_given_w(j).template cast<double>();
  const Mat<double> w_given_x = condition_w_given_x(j).template cast<double>();
  const Vec<double> q = s.event_given_w().template cast<double>();
  const double step = cfg.step, tol = cfg.tol_for(nx);
  const long top = static_cast<long>(std::floor(1.0 / step + 1e-9));

  // Columns whose cell values matter beyond the row equality.
  std::vector<Index> watched{target};
  std::vector<std::pair<Index, double>> bv_cols;  // (x index, delta)
  for (const auto& [label, d] : bv.delta) {
    if (!std::isfinite(static_cast<double>(d))) continue;
    const Index kx = s.x_labels.index_of(label);
    bv_cols.emplace_back(kx, static_cast<double>(d));
    if (std::find(watched.begin(), watched.end(), kx) == watched.end()) watched.push_back(kx);
  }

  std::vector<detail::GridRow> rows(static_cast<std::size_t>(nw));
  double planned = 0;
  for (Index w = 0; w < nw; ++w) {
    auto& r = rows[static_cast<std::size_t>(w)];
    for (Index x = 0; x < nx; ++x)
      if (j(w, x) > Scalar(0)) {
        r.xs.push_back(x);
        r.coef.push_back(x_given_w(w, x));
      }
    r.pivot = static_cast<std::size_t>(std::max_element(r.coef.begin(), r.coef.end()) - r.coef.begin());
    planned += std::pow(static_cast<double>(top + 1), static_cast<double>(r.xs.size() - 1));
  }
  if (planned > cfg.budget)
    throw Error(Errc::TooLarge, "grid enumeration needs ~" + std::to_string(static_cast<long long>(planned)) +
                                    " points, budget is " + std::to_string(static_cast<long long>(cfg.budget)));

  // Per row, every grid vector satisfying the equality within tol. Without
  // bounded variation only the range of the target cell is kept; otherwise
  // survivors are projected onto the watched columns (-1 marks a null cell).
  const bool coupled = !bv_cols.empty();
  std::vector<std::set<std::vector<long>>> projections(static_cast<std::size_t>(nw));
  std::vector<long> tmin(static_cast<std::size_t>(nw), top), tmax(static_cast<std::size_t>(nw), 0);
  for (Index w = 0; w < nw; ++w) {
    const auto& r = rows[static_cast<std::size_t>(w)];
    const std::size_t nc = r.xs.size();
    const auto tpos = std::find(r.xs.begin(), r.xs.end(), target);
    const std::size_t tcell = static_cast<std::size_t>(tpos - r.xs.begin());
    std::vector<long> k(nc, 0);
    auto& proj = projections[static_cast<std::size_t>(w)];
    bool any = false;
    const double cp = r.coef[r.pivot];
    for (;;) {
      double partial = 0;
      for (std::size_t c = 0; c < nc; ++c)
        if (c != r.pivot) partial += r.coef[c] * static_cast<double>(k[c]) * step;
      const double exact = (q[w] - partial) / cp;
      long kmin = std::max(0L, static_cast<long>(std::ceil((exact - tol / cp) / step - 1e-9)));
      long kmax = std::min(top, static_cast<long>(std::floor((exact + tol / cp) / step + 1e-9)));
      auto residual = [&](long kp) { return std::abs(partial + cp * static_cast<double>(kp) * step - q[w]); };
      while (kmin <= kmax && residual(kmin) > tol) ++kmin;
      while (kmax >= kmin && residual(kmax) > tol) --kmax;
      // Residual is affine in the pivot value, so every value in
      // [kmin, kmax] survives.
      if (kmin <= kmax) {
        any = true;
        if (!coupled) {
          if (tcell == r.pivot) {
            tmin[static_cast<std::size_t>(w)] = std::min(tmin[static_cast<std::size_t>(w)], kmin);
            tmax[static_cast<std::size_t>(w)] = std::max(tmax[static_cast<std::size_t>(w)], kmax);
          } else if (tcell < nc) {
            tmin[static_cast<std::size_t>(w)] = std::min(tmin[static_cast<std::size_t>(w)], k[tcell]);
            tmax[static_cast<std::size_t>(w)] = std::max(tmax[static_cast<std::size_t>(w)], k[tcell]);
          }
        } else {
          bool pivot_watched = false;
          for (Index col : watched) pivot_watched = pivot_watched || col == r.xs[r.pivot];
          for (long kp = kmin; kp <= (pivot_watched ? kmax : kmin); ++kp) {
            k[r.pivot] = kp;
            std::vector<long> key;
            key.reserve(watched.size());
            for (Index col : watched) {
              auto it = std::find(r.xs.begin(), r.xs.end(), col);
              key.push_back(it == r.xs.end() ? -1L : k[static_cast<std::size_t>(it - r.xs.begin())]);
            }
            proj.insert(std::move(key));
          }
        }
      }
      // Odometer over the non-pivot cells.
      std::size_t c = 0;
      for (; c < nc; ++c) {
        if (c == r.pivot) continue;
        if (++k[c] <= top) break;
        k[c] = 0;
      }
      if (c >= nc) break;
    }
    if (!any)
      throw Error(Errc::NoFeasibleGridPoint, "row '" + s.w_labels[w] + "' has no grid point within tolerance " +
                                                 std::to_string(tol) + "; widen constraint_tol");
  }

  double lo = 0, hi = 0;
  if (!coupled) {
    // Rows are independent, so the extremes of the weighted sum are the sums
    // of per-row extremes of the target cell.
    for (Index w = 0; w < nw; ++w) {
      if (j(w, target) <= Scalar(0)) continue;
      lo += w_given_x(w, target) * static_cast<double>(tmin[static_cast<std::size_t>(w)]) * step;
      hi += w_given_x(w, target) * static_cast<double>(tmax[static_cast<std::size_t>(w)]) * step;
    }
  } else {
    std::vector<std::vector<std::vector<long>>> lists;
    double combos = 1;
    for (const auto& p : projections) {
      lists.emplace_back(p.begin(), p.end());
      combos *= static_cast<double>(p.size());
    }
    if (combos > cfg.budget)
      throw Error(Errc::TooLarge, "bounded-variation product enumeration exceeds budget");
    std::vector<std::size_t> pick(static_cast<std::size_t>(nw), 0);
    bool any = false;
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (;;) {
      bool feasible = true;
      for (const auto& [kx, d] : bv_cols) {
        const std::size_t slot = static_cast<std::size_t>(std::find(watched.begin(), watched.end(), kx) - watched.begin());
        double px_event = 0;
        for (Index w = 0; w < nw; ++w) {
          const long v = lists[static_cast<std::size_t>(w)][pick[static_cast<std::size_t>(w)]][slot];
          if (v >= 0) px_event += w_given_x(w, kx) * static_cast<double>(v) * step;
        }
        const Index kw = s.w_labels.index_of(s.x_labels[kx]);
        if (std::abs(q[kw] - px_event) > d + tol) {
          feasible = false;
          break;
        }
      }
      if (feasible) {
        double obj = 0;
        for (Index w = 0; w < nw; ++w) {
          const long v = lists[static_cast<std::size_t>(w)][pick[static_cast<std::size_t>(w)]].front();
          if (v >= 0) obj += w_given_x(w, target) * static_cast<double>(v) * step;
        }
        lo = std::min(lo, obj);
        hi = std::max(hi, obj);
        any = true;
      }
      std::size_t w = 0;
      for (; w < lists.size(); ++w) {
        if (++pick[w] < lists[w].size()) break;
        pick[w] = 0;
      }
      if (w >= lists.size()) break;
    }
    if (!any)
      throw Error(Errc::NoFeasibleGridPoint, "no grid point satisfies the bounded-variation rows; widen constraint_tol");
  }
  return {Scalar(lo), Scalar(hi), false, Method::Oracle};
}

/// A scenario together with the cell table P(y=1|w,x) that generated it.
template <typename Scalar>
struct GeneratedScenario {
  Scenario<Scalar> scenario;
  Mat<Scalar> truth;

  /// P(y=1 | x = target) implied by the generating table.
  Scalar truth_event(Index target) const {
    const Mat<Scalar> w_given_x = condition_w_given_x(scenario.joint());
    return truth.col(target).dot(w_given_x.col(target));
  }
};

namespace detail {

inline std::vector<std::string> numbered_labels(Index n) {
  std::vector<std::string> out;
  for (Index i = 0; i < n; ++i) out.push_back("c" + std::to_string(i));
  return out;
}

template <typename Scalar>
GeneratedScenario<Scalar> assemble(const Mat<double>& joint, const Mat<double>& truth) {
  const JointWX<Scalar> j(joint.template cast<Scalar>());
  const Mat<Scalar> t = truth.template cast<Scalar>();
  const Vec<Scalar> q = (condition_x_given_w(j).cwiseProduct(t)).rowwise().sum().cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
  Mat<Scalar> ygw(j.rows(), 2);
  ygw.col(1) = q;
  ygw.col(0) = Vec<Scalar>::Ones(j.rows()) - q;
  Vec<Scalar> ys(2);
  ys << Scalar(0), Scalar(1);
  Scenario<Scalar> s{LabelSet(numbered_labels(j.rows())), LabelSet(numbered_labels(j.cols())), ys, ygw, j};
  return {std::move(s), t};
}

}  // namespace detail

/// Strictly positive joint with entries drawn from [0.05, 1) then normalized,
/// and a uniform generating table; deterministic in seed. Labels are
/// c0, c1, ... on both sides, so every label up to min(nw, nx) is shared.
template <typename Scalar = double>
GeneratedScenario<Scalar> random_scenario(std::uint64_t seed, Index nw, Index nx) {
  if (nw < 1 || nx < 1) throw Error(Errc::InvalidArgument, "random_scenario needs nw, nx >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mass(0.05, 1.0), unit(0.0, 1.0);
  Mat<double> joint(nw, nx), truth(nw, nx);
  for (Index w = 0; w < nw; ++w)
    for (Index x = 0; x < nx; ++x) joint(w, x) = mass(rng);
  joint /= joint.sum();
  for (Index w = 0; w < nw; ++w)
    for (Index x = 0; x < nx; ++x) truth(w, x) = unit(rng);
  return detail::assemble<Scalar>(joint, truth);
}

/// Scenario in which x aggregates w through a random surjection w -> x.
template <typename Scalar = double>
GeneratedScenario<Scalar> random_aggregation_scenario(std::uint64_t seed, Index nw, Index nx) {
  if (nx < 1 || nw < nx) throw Error(Errc::InvalidArgument, "aggregation needs 1 <= nx <= nw");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mass(0.05, 1.0), unit(0.0, 1.0);
  std::vector<Index> map(static_cast<std::size_t>(nw));
  for (Index w = 0; w < nw; ++w) map[static_cast<std::size_t>(w)] = w < nx ? w : Index(rng() % static_cast<std::uint64_t>(nx));
  std::shuffle(map.begin(), map.end(), rng);
  Mat<double> joint = Mat<double>::Zero(nw, nx), truth = Mat<double>::Zero(nw, nx);
  for (Index w = 0; w < nw; ++w) {
    joint(w, map[static_cast<std::size_t>(w)]) = mass(rng);
    truth(w, map[static_cast<std::size_t>(w)]) = unit(rng);
  }
  joint /= joint.sum();
  return detail::assemble<Scalar>(joint, truth);
}

/// Distribution on n integer-valued support points with random weights,
/// including the occasional zero atom.
template <typename Scalar = double>
DiscreteDistribution<Scalar> random_distribution(std::mt19937_64& rng, Index n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec<Scalar> ys(n), ps(n);
  double y = std::floor(unit(rng) * 10.0) - 5.0;
  for (Index i = 0; i < n; ++i) {
    y += 1.0 + std::floor(unit(rng) * 3.0);
    ys[i] = Scalar(y);
    ps[i] = unit(rng) < 0.1 ? Scalar(0) : Scalar(unit(rng));
  }
  if (ps.sum() <= Scalar(0)) ps[0] = Scalar(1);
  ps /= ps.sum();
  return DiscreteDistribution<Scalar>(ys, ps);
}

}  // namespace dcc
