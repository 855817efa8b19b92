#pragma once

// Stochastic-dominance envelopes of a w-cell outcome distribution when a
// known share p of the cell belongs to other x labels, and the mean and
// quantile bounds they induce.

#include "dcc/closed_form.hpp"
#include "dcc/core.hpp"

namespace dcc {

namespace detail {

// Atoms whose kept mass falls below this are round-off from the cumulative
// subtraction and are dropped.
template <typename Scalar>
constexpr Scalar kAtomFloor = Scalar(1e-14);

/// Keeps the lowest (1 - p) of the mass (or the highest, when from_top),
/// splitting the boundary atom. Output is indexed like the input and is
/// normalized.
template <typename Scalar>
Vec<Scalar> truncated_weights(const Vec<Scalar>& probs, Scalar p, bool from_top) {
  if (!(p >= Scalar(0))) throw Error(Errc::InvalidArgument, "negative truncation share");
  if (p >= Scalar(1)) throw Error(Errc::DegenerateConditioning, "truncation share p must be < 1");
  const Index n = probs.size();
  Vec<Scalar> kept = Vec<Scalar>::Zero(n);
  Scalar remaining = Scalar(1) - p;
  for (Index k = 0; k < n && remaining > Scalar(0); ++k) {
    const Index i = from_top ? n - 1 - k : k;
    const Scalar take = std::min(probs[i], remaining);
    kept[i] = take;
    remaining -= take;
  }
  for (Index i = 0; i < n; ++i)
    if (kept[i] < kAtomFloor<Scalar>) kept[i] = Scalar(0);
  return kept / kept.sum();
}

template <typename Scalar>
DiscreteDistribution<Scalar> drop_empty_atoms(const Vec<Scalar>& support, const Vec<Scalar>& w) {
  std::vector<Scalar> ys, ps;
  for (Index i = 0; i < w.size(); ++i)
    if (w[i] > Scalar(0)) {
      ys.push_back(support[i]);
      ps.push_back(w[i]);
    }
  using Map = Eigen::Map<const Vec<Scalar>>;
  return DiscreteDistribution<Scalar>(Map(ys.data(), static_cast<Index>(ys.size())),
                                      Map(ps.data(), static_cast<Index>(ps.size())));
}

}  // namespace detail

template <typename Scalar>
struct TruncationPair {
  DiscreteDistribution<Scalar> lower_env;  ///< right-truncated: smallest feasible member
  DiscreteDistribution<Scalar> upper_env;  ///< left-truncated: largest feasible member
  Scalar p;
};

template <typename Scalar>
TruncationPair<Scalar> truncate_pair(const DiscreteDistribution<Scalar>& d, Scalar p) {
  if (p >= Scalar(1)) throw Error(Errc::DegenerateConditioning, "truncation share p must be < 1");
  if (p == Scalar(0)) return {d, d, p};
  return {detail::drop_empty_atoms(d.support(), detail::truncated_weights(d.probs(), p, false)),
          detail::drop_empty_atoms(d.support(), detail::truncated_weights(d.probs(), p, true)), p};
}

template <typename Scalar>
BoundInterval<Scalar> mean_bounds(const DiscreteDistribution<Scalar>& d, Scalar p) {
  const auto pair = truncate_pair(d, p);
  return {pair.lower_env.mean(), pair.upper_env.mean(), true, Method::Dominance};
}

template <typename Scalar>
struct QuantileBounds {
  BoundInterval<Scalar> interval;
  /// Support values inside the interval; the only candidates for the quantile.
  std::vector<Scalar> feasible;
};

namespace detail {
template <typename Scalar>
std::vector<Scalar> support_within(const Vec<Scalar>& support, Scalar lo, Scalar hi) {
  std::vector<Scalar> out;
  for (Index i = 0; i < support.size(); ++i)
    if (support[i] >= lo && support[i] <= hi) out.push_back(support[i]);
  return out;
}
}  // namespace detail

template <typename Scalar>
QuantileBounds<Scalar> quantile_bounds(const DiscreteDistribution<Scalar>& d, Scalar p, Scalar alpha) {
  if (!(alpha > Scalar(0) && alpha < Scalar(1)))
    throw Error(Errc::InvalidArgument, "alpha must lie in (0, 1)");
  const auto pair = truncate_pair(d, p);
  const Scalar lo = pair.lower_env.quantile(alpha);
  const Scalar hi = pair.upper_env.quantile(alpha);
  return {{lo, hi, true, Method::Dominance}, detail::support_within(d.support(), lo, hi)};
}

// Target-level bounds. P(y | x = target) mixes the cell distributions
// P(y | w, x = target) with weights P(w | x = target); the cells vary
// independently, so mixing the per-cell envelopes gives the dominance
// envelopes of the mixture.

template <typename Scalar>
struct MixtureEnvelopes {
  DiscreteDistribution<Scalar> lower;
  DiscreteDistribution<Scalar> upper;
};

template <typename Scalar>
MixtureEnvelopes<Scalar> mixture_envelopes(const Scenario<Scalar>& s, Index target) {
  require_valid(s);
  const auto& j = s.joint();
  if (target < 0 || target >= j.cols()) throw Error(Errc::InvalidArgument, "target out of range");
  const Mat<Scalar> x_given_w = condition_x_given_w(j);
  const Mat<Scalar> w_given_x = condition_w_given_x(j);
  const Index ny = s.y_support.size();
  Vec<Scalar> lo = Vec<Scalar>::Zero(ny), hi = Vec<Scalar>::Zero(ny);
  for (Index w = 0; w < j.rows(); ++w) {
    if (j(w, target) <= Scalar(0)) continue;
    const Vec<Scalar> probs = s.y_given_w.row(w).transpose();
    const Scalar p = Scalar(1) - x_given_w(w, target);
    lo += w_given_x(w, target) * detail::truncated_weights(probs, p, false);
    hi += w_given_x(w, target) * detail::truncated_weights(probs, p, true);
  }
  return {DiscreteDistribution<Scalar>(s.y_support, lo / lo.sum()),
          DiscreteDistribution<Scalar>(s.y_support, hi / hi.sum())};
}

template <typename Scalar>
BoundInterval<Scalar> mixture_mean_bounds(const Scenario<Scalar>& s, Index target) {
  const auto env = mixture_envelopes(s, target);
  return {env.lower.mean(), env.upper.mean(), true, Method::Dominance};
}

template <typename Scalar>
QuantileBounds<Scalar> mixture_quantile_bounds(const Scenario<Scalar>& s, Index target, Scalar alpha) {
  if (!(alpha > Scalar(0) && alpha < Scalar(1)))
    throw Error(Errc::InvalidArgument, "alpha must lie in (0, 1)");
  const auto env = mixture_envelopes(s, target);
  const Scalar lo = env.lower.quantile(alpha), hi = env.upper.quantile(alpha);
  return {{lo, hi, true, Method::Dominance}, detail::support_within(s.y_support, lo, hi)};
}

}  // namespace dcc
