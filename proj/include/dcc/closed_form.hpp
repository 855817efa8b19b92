#pragma once

// Closed-form bounds on event probabilities when the contaminating share of a
// w-cell is known.

#include "dcc/core.hpp"

namespace dcc {

/// Bounds on P(y in B | w, x = target) given q = P(y in B | w) and
/// p = P(x != target | w): [0,1] intersected with [(q-p)/(1-p), q/(1-p)].
template <typename Scalar>
BoundInterval<Scalar> event_bound_binary_x(Scalar q, Scalar p) {
  if (!(q >= Scalar(0) && q <= Scalar(1)))
    throw Error(Errc::InvalidArgument, "event probability outside [0,1]");
  if (!(p >= Scalar(0) && p <= Scalar(1)))
    throw Error(Errc::InvalidArgument, "contamination share outside [0,1]");
  if (p >= Scalar(1))
    throw Error(Errc::DegenerateConditioning, "P(x = target | w) is zero");
  const Scalar keep = Scalar(1) - p;
  const Scalar lo = std::clamp((q - p) / keep, Scalar(0), Scalar(1));
  const Scalar hi = std::clamp(q / keep, Scalar(0), Scalar(1));
  return {lo, std::max(lo, hi), true, Method::ClosedForm};
}

template <typename Scalar>
struct InformativenessReport {
  bool lower_informative = false;
  bool upper_informative = false;
  /// Interval width; nullopt when the bound is the vacuous [0,1].
  std::optional<Scalar> width;

  bool vacuous() const { return !width.has_value(); }
};

/// Boundary p = q (or p = 1 - q) counts as not informative.
template <typename Scalar>
InformativenessReport<Scalar> classify_informativeness(Scalar q, Scalar p) {
  InformativenessReport<Scalar> r;
  r.lower_informative = p < q;
  r.upper_informative = p < Scalar(1) - q;
  if (r.lower_informative && r.upper_informative) {
    r.width = p / (Scalar(1) - p);
  } else if (r.lower_informative || r.upper_informative) {
    r.width = event_bound_binary_x(q, p).width();
  }
  return r;
}

/// When x aggregates w, P(y|x) is the P(w|x)-weighted mixture of P(y|w).
template <typename Scalar>
std::vector<DiscreteDistribution<Scalar>> point_identify_aggregation(const Scenario<Scalar>& s) {
  require_valid(s);
  if (!s.has_full_joint()) throw Error(Errc::NotAggregation, "P(w,x) is not fully known");
  const auto& j = s.joint();
  if (detect_aggregation(j).kind != AggregationStructure::Kind::XAggregatesW)
    throw Error(Errc::NotAggregation, "x does not aggregate w");
  const Mat<Scalar> w_given_x = condition_w_given_x(j);
  const Mat<Scalar> mixed = w_given_x.transpose() * s.y_given_w;  // |X| x |Y|
  std::vector<DiscreteDistribution<Scalar>> out;
  out.reserve(static_cast<std::size_t>(j.cols()));
  for (Index x = 0; x < j.cols(); ++x) {
    Vec<Scalar> probs = mixed.row(x).transpose();
    probs /= probs.sum();
    out.emplace_back(s.y_support, std::move(probs));
  }
  return out;
}

/// Sharp bound on P(y=1 | x = target) for binary y and fully known P(w,x).
/// Each w-row constrains only its own cells, so the bound is the
/// P(w|x=target)-weighted sum of per-row intervals. Rows with no mass at the
/// target column carry zero weight and are skipped.
template <typename Scalar>
BoundInterval<Scalar> event_bound_closed_form(const Scenario<Scalar>& s, Index target) {
  require_valid(s);
  if (!s.binary_outcome()) throw Error(Errc::WrongShape, "outcome support is not {0, 1}");
  const auto& j = s.joint();
  if (target < 0 || target >= j.cols()) throw Error(Errc::InvalidArgument, "target out of range");
  const Mat<Scalar> x_given_w = condition_x_given_w(j);
  const Mat<Scalar> w_given_x = condition_w_given_x(j);
  const Vec<Scalar> q = s.event_given_w();
  Scalar lo = 0, hi = 0;
  for (Index w = 0; w < j.rows(); ++w) {
    if (j(w, target) <= Scalar(0)) continue;
    const auto cell = event_bound_binary_x(q[w], Scalar(1) - x_given_w(w, target));
    lo += w_given_x(w, target) * cell.lo;
    hi += w_given_x(w, target) * cell.hi;
  }
  return {std::clamp(lo, Scalar(0), Scalar(1)), std::clamp(hi, Scalar(0), Scalar(1)), true,
          Method::ClosedForm};
}

/// The two-by-two case with binary y. Kept separate from the general
/// closed form because it enforces the shape explicitly.
template <typename Scalar>
BoundInterval<Scalar> binary_scenario_bound(const Scenario<Scalar>& s, Index target = 1) {
  if (s.w_labels.size() != 2 || s.x_labels.size() != 2 || !s.binary_outcome())
    throw Error(Errc::WrongShape, "binary_scenario_bound needs binary y, w and x");
  return event_bound_closed_form(s, target);
}

/// Bound under the nesting assertion P(w = k | x = k) = 1 for the label k
/// shared by w and x: the bound on P(y=1|x=k) reduces to the single cell
/// bound for w = k, with width p/(1-p) when informative.
template <typename Scalar>
BoundInterval<Scalar> nested_event_bound(const Scenario<Scalar>& s, Index target) {
  require_valid(s);
  if (!s.binary_outcome()) throw Error(Errc::WrongShape, "outcome support is not {0, 1}");
  const auto& j = s.joint();
  const auto w = s.w_labels.find(s.x_labels[target]);
  if (!w) throw Error(Errc::InvalidArgument, "nesting needs the target label in both label sets");
  const Mat<Scalar> x_given_w = condition_x_given_w(j);
  return event_bound_binary_x(s.event_given_w()[*w], Scalar(1) - x_given_w(*w, target));
}

/// One aggregate w category split into subgroups with known shares. Each
/// subgroup is bounded from its own share (x = subgroup vs the rest), so
/// published shares that were rounded separately need not sum to exactly 1.
template <typename Scalar>
std::vector<BoundInterval<Scalar>> subgroup_bounds(Scalar q, const Vec<Scalar>& shares) {
  if ((shares.array() > Scalar(1)).any()) throw Error(Errc::InvalidArgument, "share above 1");
  std::vector<BoundInterval<Scalar>> out;
  out.reserve(static_cast<std::size_t>(shares.size()));
  for (Index k = 0; k < shares.size(); ++k) {
    if (!(shares[k] > Scalar(0)))
      throw Error(Errc::DegenerateMargin, "subgroup " + std::to_string(k) + " has zero share");
    out.push_back(event_bound_binary_x(q, Scalar(1) - shares[k]));
  }
  return out;
}

}  // namespace dcc
