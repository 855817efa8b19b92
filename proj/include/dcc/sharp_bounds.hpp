#pragma once

// Sharp bounds on P(y = 1 | x = target) for binary y via linear programming,
// with optional bounded-variation constraints and partial knowledge of P(w,x).

#include "dcc/core.hpp"
#include "dcc/lp.hpp"

namespace dcc {

/// LP over the unknown cell probabilities q(w, x) = P(y = 1 | w, x).
template <typename Scalar>
struct EventLp {
  LinearProgram<Scalar> lp;
  /// var(w, x) is the LP column of cell (w, x), or -1 for a null cell.
  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic> var;
  std::vector<std::pair<Index, Index>> cells;
};

template <typename Scalar>
EventLp<Scalar> build_lp_event(const Scenario<Scalar>& s, Index target) {
  require_valid(s);
  if (!s.binary_outcome()) throw Error(Errc::WrongShape, "event LP needs outcome support {0, 1}");
  const auto& j = s.joint();
  if (target < 0 || target >= j.cols()) throw Error(Errc::InvalidArgument, "target out of range");

  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic> var =
      Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic>::Constant(j.rows(), j.cols(), -1);
  std::vector<std::pair<Index, Index>> cells;
  for (Index w = 0; w < j.rows(); ++w)
    for (Index x = 0; x < j.cols(); ++x)
      if (j(w, x) > Scalar(0)) {
        var(w, x) = static_cast<Index>(cells.size());
        cells.emplace_back(w, x);
      }

  const Mat<Scalar> x_given_w = condition_x_given_w(j);
  const Mat<Scalar> w_given_x = condition_w_given_x(j);
  const Vec<Scalar> q = s.event_given_w();
  LinearProgram<Scalar> lp(static_cast<Index>(cells.size()));
  for (Index w = 0; w < j.rows(); ++w) {
    Vec<Scalar> row = Vec<Scalar>::Zero(lp.n_vars);
    for (Index x = 0; x < j.cols(); ++x)
      if (var(w, x) >= 0) row[var(w, x)] = x_given_w(w, x);
    lp.add_equality(std::move(row), q[w]);
  }
  for (Index w = 0; w < j.rows(); ++w)
    if (var(w, target) >= 0) lp.objective[var(w, target)] = w_given_x(w, target);
  return {std::move(lp), std::move(var), std::move(cells)};
}

namespace detail {
template <typename Scalar>
BoundInterval<Scalar> solve_interval(const LinearProgram<Scalar>& lp, Errc on_infeasible,
                                     const SolverOptions<Scalar>& opt) {
  const auto lo = solve_min(lp, opt);
  const auto hi = solve_max(lp, opt);
  if (!lo.optimal() || !hi.optimal()) {
    if (lo.status == LpStatus::Unbounded || hi.status == LpStatus::Unbounded)
      throw Error(Errc::SolverStalled, "event LP reported unbounded");
    throw Error(on_infeasible, on_infeasible == Errc::BvTooTight
                                   ? "bounded-variation constraints contradict the data"
                                   : "P(y|w) is incompatible with P(w,x)");
  }
  return {std::clamp(lo.value, Scalar(0), Scalar(1)), std::clamp(hi.value, Scalar(0), Scalar(1)), true,
          Method::LinearProgram};
}
}  // namespace detail

template <typename Scalar>
BoundInterval<Scalar> sharp_event_bounds(const Scenario<Scalar>& s, Index target,
                                         const SolverOptions<Scalar>& opt = {}) {
  return detail::solve_interval(build_lp_event(s, target).lp, Errc::InconsistentScenario, opt);
}

/// |P(y=1|w=k) - P(y=1|x=k)| <= delta_k for labels k shared by w and x.
/// Infinite deltas add no rows.
template <typename Scalar>
struct BvSpec {
  std::map<std::string, Scalar> delta;

  bool empty() const { return delta.empty(); }

  void check(const Scenario<Scalar>& s) const {
    for (const auto& [label, d] : delta) {
      if (!s.w_labels.find(label) || !s.x_labels.find(label))
        throw Error(Errc::InvalidArgument, "bv key not in label sets: '" + label + "'");
      if (!(d >= Scalar(0))) throw Error(Errc::InvalidArgument, "bv delta for '" + label + "' is negative");
    }
  }
};

template <typename Scalar>
void add_bounded_variation(EventLp<Scalar>& e, const Scenario<Scalar>& s, const BvSpec<Scalar>& bv) {
  bv.check(s);
  const auto& j = s.joint();
  const Mat<Scalar> w_given_x = condition_w_given_x(j);
  const Vec<Scalar> q = s.event_given_w();
  for (const auto& [label, d] : bv.delta) {
    if (!std::isfinite(static_cast<double>(d))) continue;
    const Index kw = s.w_labels.index_of(label), kx = s.x_labels.index_of(label);
    Vec<Scalar> row = Vec<Scalar>::Zero(e.lp.n_vars);
    for (Index w = 0; w < j.rows(); ++w)
      if (e.var(w, kx) >= 0) row[e.var(w, kx)] = w_given_x(w, kx);
    e.lp.add_inequality(row, d + q[kw]);
    e.lp.add_inequality(-row, d - q[kw]);
  }
}

/// The strict inequality of the assumption is relaxed to its closure.
template <typename Scalar>
BoundInterval<Scalar> with_bounded_variation(const Scenario<Scalar>& s, const BvSpec<Scalar>& bv, Index target,
                                             const SolverOptions<Scalar>& opt = {}) {
  auto e = build_lp_event(s, target);
  add_bounded_variation(e, s, bv);
  return detail::solve_interval(e.lp, Errc::BvTooTight, opt);
}

template <typename Scalar>
struct PartialBoundsReport {
  BoundInterval<Scalar> interval;
  Index grid_points = 0;
  /// Evaluated joints that admitted no solution (index into the sweep).
  std::vector<Index> excluded;
  /// Union of the per-point intervals is disconnected.
  bool gap = false;
  std::vector<Scalar> thetas;  ///< marginals-only sweeps: P(w=1, x=1) per point
  std::vector<BoundInterval<Scalar>> per_point;
};

namespace detail {

template <typename Scalar>
Scenario<Scalar> with_joint(const Scenario<Scalar>& s, const JointWX<Scalar>& j) {
  Scenario<Scalar> out = s;
  out.wx = j;
  return out;
}

template <typename Scalar>
PartialBoundsReport<Scalar> hull_over(const Scenario<Scalar>& s, const std::vector<JointWX<Scalar>>& joints,
                                      Index target, const BvSpec<Scalar>& bv, bool keep_points,
                                      const SolverOptions<Scalar>& opt) {
  PartialBoundsReport<Scalar> rep;
  rep.grid_points = static_cast<Index>(joints.size());
  std::vector<BoundInterval<Scalar>> ok;
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const auto si = with_joint(s, joints[i]);
    try {
      auto b = bv.empty() ? sharp_event_bounds(si, target, opt) : with_bounded_variation(si, bv, target, opt);
      ok.push_back(b);
      if (keep_points) rep.per_point.push_back(b);
    } catch (const Error& e) {
      if (e.code() != Errc::InconsistentScenario && e.code() != Errc::BvTooTight) throw;
      rep.excluded.push_back(static_cast<Index>(i));
    }
  }
  if (ok.empty())
    throw Error(bv.empty() ? Errc::InconsistentScenario : Errc::BvTooTight,
                "no candidate joint admits a solution");
  std::vector<BoundInterval<Scalar>> sorted = ok;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
  Scalar reach = sorted.front().hi;
  for (const auto& b : sorted) {
    if (b.lo > reach + Scalar(1e-12)) rep.gap = true;
    reach = std::max(reach, b.hi);
  }
  rep.interval = {sorted.front().lo, reach, !rep.gap, Method::GridUnion};
  return rep;
}

}  // namespace detail

/// Frechet-Hoeffding range of P(w=1, x=1) for binary w and x with the given
/// second-label marginals.
template <typename Scalar>
std::pair<Scalar, Scalar> frechet_range(Scalar pw1, Scalar px1) {
  return {std::max(Scalar(0), pw1 + px1 - Scalar(1)), std::min(pw1, px1)};
}

template <typename Scalar>
JointWX<Scalar> frechet_joint(Scalar pw1, Scalar px1, Scalar theta) {
  Mat<Scalar> t(2, 2);
  t << Scalar(1) - pw1 - px1 + theta, px1 - theta, pw1 - theta, theta;
  return JointWX<Scalar>(t.cwiseMax(Scalar(0)));
}

template <typename Scalar>
struct PartialOptions {
  /// Subintervals of the Frechet range, evaluated at grid_n + 1 points, so
  /// doubling grid_n refines the previous grid. grid_n = 1 evaluates only the
  /// comonotone joint.
  Index grid_n = 101;
  /// Also evaluate the points where a cell's interval changes slope in theta.
  /// The bound endpoints are piecewise linear (lower convex, upper concave)
  /// in theta, so with these points the hull is exact rather than an inner
  /// approximation.
  bool include_breakpoints = true;
  bool keep_points = false;
};

template <typename Scalar>
std::vector<Scalar> frechet_thetas(const Scenario<Scalar>& s, const MarginalsOnly<Scalar>& m,
                                   const PartialOptions<Scalar>& opt) {
  if (opt.grid_n < 1) throw Error(Errc::InvalidArgument, "grid_n must be positive");
  const auto [lo, hi] = frechet_range(m.pw[1], m.px[1]);
  std::vector<Scalar> th;
  if (opt.grid_n == 1) {
    th.push_back(hi);
  } else {
    for (Index i = 0; i <= opt.grid_n; ++i) th.push_back(lo + (hi - lo) * Scalar(i) / Scalar(opt.grid_n));
  }
  if (opt.include_breakpoints && s.binary_outcome() && s.y_given_w.rows() == 2 && s.y_given_w.cols() == 2) {
    // Cell (w, x) entries are affine in theta; a kink occurs where an entry
    // equals P(y=1, w).
    const Scalar a0 = s.y_given_w(0, 1) * m.pw[0], a1 = s.y_given_w(1, 1) * m.pw[1];
    const Scalar c00 = Scalar(1) - m.pw[1] - m.px[1];
    for (Scalar t : {a0 - c00, m.px[1] - a0, m.pw[1] - a1, a1})
      if (t > lo && t < hi) th.push_back(t);
    std::sort(th.begin(), th.end());
    th.erase(std::unique(th.begin(), th.end()), th.end());
  }
  return th;
}

template <typename Scalar>
PartialBoundsReport<Scalar> partial_knowledge_bounds(const Scenario<Scalar>& s, Index target,
                                                     const PartialOptions<Scalar>& popt = {},
                                                     const BvSpec<Scalar>& bv = {},
                                                     const SolverOptions<Scalar>& opt = {}) {
  require_valid(s);
  const auto* m = std::get_if<MarginalsOnly<Scalar>>(&s.wx);
  if (!m) throw Error(Errc::WrongShape, "scenario does not carry marginals-only knowledge");
  if (m->pw.size() != 2 || m->px.size() != 2)
    throw Error(Errc::UnsupportedShape, "marginals-only sweeps need binary w and x; use a candidate set");
  if (!s.binary_outcome()) throw Error(Errc::WrongShape, "event bounds need outcome support {0, 1}");

  const auto thetas = frechet_thetas(s, *m, popt);
  std::vector<JointWX<Scalar>> joints;
  joints.reserve(thetas.size());
  for (Scalar t : thetas) joints.push_back(frechet_joint(m->pw[1], m->px[1], t));
  auto rep = detail::hull_over(s, joints, target, bv, popt.keep_points, opt);
  rep.thetas = thetas;
  rep.interval.sharp = rep.interval.sharp && popt.include_breakpoints && bv.empty();
  return rep;
}

template <typename Scalar>
PartialBoundsReport<Scalar> candidate_set_bounds(const Scenario<Scalar>& s, Index target,
                                                 const BvSpec<Scalar>& bv = {},
                                                 const SolverOptions<Scalar>& opt = {}) {
  require_valid(s);
  const auto* c = std::get_if<CandidateSet<Scalar>>(&s.wx);
  if (!c) throw Error(Errc::WrongShape, "scenario does not carry a candidate set");
  return detail::hull_over(s, c->members, target, bv, /*keep_points=*/true, opt);
}

/// Joints consistent with the scenario's knowledge: the joint itself, the
/// candidates, or the Frechet sweep for binary marginals.
template <typename Scalar>
std::vector<JointWX<Scalar>> knowledge_joints(const Scenario<Scalar>& s, const PartialOptions<Scalar>& popt = {}) {
  return std::visit(
      [&](const auto& k) -> std::vector<JointWX<Scalar>> {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, JointWX<Scalar>>) {
          return {k};
        } else if constexpr (std::is_same_v<T, CandidateSet<Scalar>>) {
          return k.members;
        } else {
          if (k.pw.size() != 2 || k.px.size() != 2)
            throw Error(Errc::UnsupportedShape, "marginals-only sweeps need binary w and x");
          std::vector<JointWX<Scalar>> out;
          for (Scalar t : frechet_thetas(s, k, popt)) out.push_back(frechet_joint(k.pw[1], k.px[1], t));
          return out;
        }
      },
      s.wx);
}

}  // namespace dcc
