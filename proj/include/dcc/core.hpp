#pragma once

// Probability primitives shared by every bound computation: outcome
// distributions, the w-by-x cross-classification table, scenario container,
// and interval results.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace dcc {

using Index = Eigen::Index;

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Normalization tolerance for probability vectors and tables.
inline constexpr double kProbTol = 1e-9;

enum class Errc {
  InvalidCounts,
  DegenerateMargin,
  DegenerateConditioning,
  InvalidDistribution,
  InvalidJoint,
  InvalidLabels,
  InvalidArgument,
  NotAggregation,
  WrongShape,
  UnsupportedShape,
  InconsistentScenario,
  BvTooTight,
  SolverStalled,
  TooLarge,
  NoFeasibleGridPoint,
  ValidationFailed,
  ParseError,
};

inline const char* to_string(Errc e) {
  switch (e) {
    case Errc::InvalidCounts: return "InvalidCounts";
    case Errc::DegenerateMargin: return "DegenerateMargin";
    case Errc::DegenerateConditioning: return "DegenerateConditioning";
    case Errc::InvalidDistribution: return "InvalidDistribution";
    case Errc::InvalidJoint: return "InvalidJoint";
    case Errc::InvalidLabels: return "InvalidLabels";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NotAggregation: return "NotAggregation";
    case Errc::WrongShape: return "WrongShape";
    case Errc::UnsupportedShape: return "UnsupportedShape";
    case Errc::InconsistentScenario: return "InconsistentScenario";
    case Errc::BvTooTight: return "BvTooTight";
    case Errc::SolverStalled: return "SolverStalled";
    case Errc::TooLarge: return "TooLarge";
    case Errc::NoFeasibleGridPoint: return "NoFeasibleGridPoint";
    case Errc::ValidationFailed: return "ValidationFailed";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Exact fraction carried alongside count-derived probabilities.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t n, std::int64_t d) {
    if (d == 0) throw Error(Errc::InvalidArgument, "zero denominator");
    if (d < 0) { n = -n; d = -d; }
    const std::int64_t g = std::gcd(n, d);
    return g == 0 ? Rational{0, 1} : Rational{n / g, d / g};
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

class LabelSet {
 public:
  explicit LabelSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw Error(Errc::InvalidLabels, "label set is empty");
    for (std::size_t i = 0; i < labels_.size(); ++i)
      for (std::size_t j = i + 1; j < labels_.size(); ++j)
        if (labels_[i] == labels_[j])
          throw Error(Errc::InvalidLabels, "duplicate label '" + labels_[i] + "'");
  }
  LabelSet(std::initializer_list<std::string> labels)
      : LabelSet(std::vector<std::string>(labels)) {}

  Index size() const { return static_cast<Index>(labels_.size()); }
  const std::string& operator[](Index i) const { return labels_.at(static_cast<std::size_t>(i)); }
  const std::vector<std::string>& labels() const { return labels_; }
  auto begin() const { return labels_.begin(); }
  auto end() const { return labels_.end(); }

  std::optional<Index> find(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<Index>(it - labels_.begin());
  }
  Index index_of(const std::string& label) const {
    auto i = find(label);
    if (!i) throw Error(Errc::InvalidLabels, "unknown label '" + label + "'");
    return *i;
  }

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<std::string> labels_;
};

/// Finite-support distribution over real outcome values, support strictly
/// increasing. Zero-probability atoms are allowed.
template <typename Scalar>
class DiscreteDistribution {
 public:
  DiscreteDistribution(Vec<Scalar> support, Vec<Scalar> probs)
      : support_(std::move(support)), probs_(std::move(probs)) {
    if (support_.size() == 0 || support_.size() != probs_.size())
      throw Error(Errc::InvalidDistribution, "support and probabilities must be non-empty and of equal length");
    for (Index i = 1; i < support_.size(); ++i)
      if (!(support_[i] > support_[i - 1]))
        throw Error(Errc::InvalidDistribution, "support must be strictly increasing");
    if ((probs_.array() < Scalar(0)).any())
      throw Error(Errc::InvalidDistribution, "negative probability");
    if (std::abs(probs_.sum() - Scalar(1)) > Scalar(kProbTol))
      throw Error(Errc::InvalidDistribution, "probabilities do not sum to 1");
  }

  static DiscreteDistribution point_mass(Scalar y) {
    return DiscreteDistribution(Vec<Scalar>::Constant(1, y), Vec<Scalar>::Ones(1));
  }

  const Vec<Scalar>& support() const { return support_; }
  const Vec<Scalar>& probs() const { return probs_; }
  Index size() const { return support_.size(); }

  Scalar mean() const { return support_.dot(probs_) / probs_.sum(); }

  /// P(y <= support[i]).
  Scalar cdf_at(Index i) const { return probs_.head(i + 1).sum(); }

  Scalar cdf(Scalar y) const {
    Scalar acc = 0;
    for (Index i = 0; i < size() && support_[i] <= y; ++i) acc += probs_[i];
    return acc;
  }

  /// min{y in support : CDF(y) >= alpha}. A 1e-12 slack absorbs cumulative
  /// rounding so that e.g. CDF = 0.5 exactly hits alpha = 0.5.
  Scalar quantile(Scalar alpha) const {
    Scalar acc = 0;
    for (Index i = 0; i < size(); ++i) {
      acc += probs_[i];
      if (acc >= alpha - Scalar(1e-12)) return support_[i];
    }
    return support_[size() - 1];
  }

  Scalar prob_of(const std::vector<Scalar>& event) const {
    Scalar acc = 0;
    for (Index i = 0; i < size(); ++i)
      if (std::find(event.begin(), event.end(), support_[i]) != event.end()) acc += probs_[i];
    return acc;
  }
  Scalar prob_of(Scalar y) const { return prob_of(std::vector<Scalar>{y}); }

 private:
  Vec<Scalar> support_;
  Vec<Scalar> probs_;
};

/// Joint P(w,x): rows index w labels, columns index x labels.
template <typename Scalar>
class JointWX {
 public:
  explicit JointWX(Mat<Scalar> table) : table_(std::move(table)) { check(); }

  static JointWX from_counts(const CountMatrix& counts) {
    if (counts.size() == 0) throw Error(Errc::InvalidCounts, "empty count matrix");
    if ((counts.array() < 0).any()) throw Error(Errc::InvalidCounts, "negative count");
    const std::int64_t total = counts.sum();
    if (total <= 0) throw Error(Errc::InvalidCounts, "all counts are zero");
    for (Index i = 0; i < counts.rows(); ++i)
      if (counts.row(i).sum() == 0)
        throw Error(Errc::DegenerateMargin, "row " + std::to_string(i) + " has zero total");
    for (Index j = 0; j < counts.cols(); ++j)
      if (counts.col(j).sum() == 0)
        throw Error(Errc::DegenerateMargin, "column " + std::to_string(j) + " has zero total");
    JointWX joint(counts.template cast<Scalar>() / static_cast<Scalar>(total));
    joint.counts_ = counts;
    return joint;
  }

  const Mat<Scalar>& table() const { return table_; }
  Index rows() const { return table_.rows(); }
  Index cols() const { return table_.cols(); }
  Scalar operator()(Index w, Index x) const { return table_(w, x); }

  Vec<Scalar> pw() const { return table_.rowwise().sum(); }
  Vec<Scalar> px() const { return table_.colwise().sum().transpose(); }

  const std::optional<CountMatrix>& counts() const { return counts_; }

  std::optional<Rational> exact(Index w, Index x) const {
    if (!counts_) return std::nullopt;
    return Rational::make((*counts_)(w, x), counts_->sum());
  }
  std::optional<Rational> exact_x_given_w(Index w, Index x) const {
    if (!counts_) return std::nullopt;
    return Rational::make((*counts_)(w, x), counts_->row(w).sum());
  }
  std::optional<Rational> exact_w_given_x(Index w, Index x) const {
    if (!counts_) return std::nullopt;
    return Rational::make((*counts_)(w, x), counts_->col(x).sum());
  }

 private:
  void check() const {
    if (table_.size() == 0) throw Error(Errc::InvalidJoint, "empty joint table");
    if (!table_.allFinite()) throw Error(Errc::InvalidJoint, "non-finite entry");
    if ((table_.array() < Scalar(0)).any()) throw Error(Errc::InvalidJoint, "negative entry");
    if (std::abs(table_.sum() - Scalar(1)) > Scalar(kProbTol))
      throw Error(Errc::InvalidJoint, "entries do not sum to 1");
    const Vec<Scalar> r = pw(), c = px();
    for (Index i = 0; i < r.size(); ++i)
      if (!(r[i] > Scalar(0)))
        throw Error(Errc::DegenerateMargin, "P(w) is zero for row " + std::to_string(i));
    for (Index j = 0; j < c.size(); ++j)
      if (!(c[j] > Scalar(0)))
        throw Error(Errc::DegenerateMargin, "P(x) is zero for column " + std::to_string(j));
  }

  Mat<Scalar> table_;
  std::optional<CountMatrix> counts_;
};

/// result(w, x) = P(x | w); rows sum to one.
template <typename Scalar>
Mat<Scalar> condition_x_given_w(const JointWX<Scalar>& j) {
  return j.pw().cwiseInverse().asDiagonal() * j.table();
}

/// result(w, x) = P(w | x); columns sum to one.
template <typename Scalar>
Mat<Scalar> condition_w_given_x(const JointWX<Scalar>& j) {
  return j.table() * j.px().cwiseInverse().asDiagonal();
}

/// Mass on cells whose w and x labels differ, matching labels by name.
template <typename Scalar>
Scalar discordant_mass(const JointWX<Scalar>& j, const LabelSet& w_labels, const LabelSet& x_labels) {
  Scalar concordant = 0;
  for (Index w = 0; w < w_labels.size(); ++w)
    if (auto x = x_labels.find(w_labels[w])) concordant += j(w, *x);
  return Scalar(1) - concordant;
}

struct AggregationStructure {
  enum class Kind { XAggregatesW, WAggregatesX, Neither };
  Kind kind = Kind::Neither;
  /// XAggregatesW: map[w] = x. WAggregatesX: map[x] = w. Empty otherwise.
  std::vector<Index> map;
};

template <typename Scalar>
AggregationStructure detect_aggregation(const JointWX<Scalar>& j, Scalar tol = Scalar(kProbTol)) {
  auto deterministic = [tol](const Mat<Scalar>& cond, std::vector<Index>& map) {
    map.assign(static_cast<std::size_t>(cond.rows()), 0);
    for (Index r = 0; r < cond.rows(); ++r) {
      Index arg;
      if (cond.row(r).maxCoeff(&arg) < Scalar(1) - tol) return false;
      map[static_cast<std::size_t>(r)] = arg;
    }
    return true;
  };
  AggregationStructure out;
  if (deterministic(condition_x_given_w(j), out.map)) {
    out.kind = AggregationStructure::Kind::XAggregatesW;
    return out;
  }
  const Mat<Scalar> wx = condition_w_given_x(j).transpose();
  if (deterministic(wx, out.map)) {
    out.kind = AggregationStructure::Kind::WAggregatesX;
    return out;
  }
  out.map.clear();
  return out;
}

template <typename Scalar>
struct MarginalsOnly {
  Vec<Scalar> pw;
  Vec<Scalar> px;
};

template <typename Scalar>
struct CandidateSet {
  std::vector<JointWX<Scalar>> members;
};

template <typename Scalar>
using WXKnowledge = std::variant<JointWX<Scalar>, MarginalsOnly<Scalar>, CandidateSet<Scalar>>;

/// A full problem instance. y_given_w holds one row per w label over the
/// shared outcome support; it is deliberately unvalidated so that
/// validate_scenario can report problems instead of throwing.
template <typename Scalar>
struct Scenario {
  LabelSet w_labels;
  LabelSet x_labels;
  Vec<Scalar> y_support;
  Mat<Scalar> y_given_w;
  WXKnowledge<Scalar> wx;
  std::map<std::string, Scalar> bv_deltas{};

  bool has_full_joint() const { return std::holds_alternative<JointWX<Scalar>>(wx); }

  const JointWX<Scalar>& joint() const {
    if (auto* j = std::get_if<JointWX<Scalar>>(&wx)) return *j;
    throw Error(Errc::WrongShape, "scenario does not carry a fully known P(w,x)");
  }

  bool binary_outcome() const {
    return y_support.size() == 2 && y_support[0] == Scalar(0) && y_support[1] == Scalar(1);
  }

  DiscreteDistribution<Scalar> outcome_given_w(Index w) const {
    return DiscreteDistribution<Scalar>(y_support, y_given_w.row(w).transpose());
  }

  /// P(y = 1 | w) for binary outcomes.
  Vec<Scalar> event_given_w() const {
    if (!binary_outcome()) throw Error(Errc::WrongShape, "outcome support is not {0, 1}");
    return y_given_w.col(1);
  }
};

namespace detail {
template <typename Scalar>
bool is_prob_vector(const Vec<Scalar>& v) {
  return v.size() > 0 && (v.array() >= Scalar(0)).all() &&
         std::abs(v.sum() - Scalar(1)) <= Scalar(kProbTol);
}
}  // namespace detail

template <typename Scalar>
std::vector<std::string> validate_scenario(const Scenario<Scalar>& s) {
  std::vector<std::string> out;
  const Index nw = s.w_labels.size(), nx = s.x_labels.size();
  const Index ny = s.y_support.size();

  if (ny == 0) out.push_back("y_support is empty");
  for (Index i = 1; i < ny; ++i)
    if (!(s.y_support[i] > s.y_support[i - 1])) {
      out.push_back("y_support not strictly increasing");
      break;
    }
  if (s.y_given_w.rows() != nw) {
    out.push_back("y_given_w has " + std::to_string(s.y_given_w.rows()) + " rows, expected " +
                  std::to_string(nw));
  } else if (s.y_given_w.cols() != ny) {
    out.push_back("y_given_w rows do not match y_support length");
  } else {
    for (Index w = 0; w < nw; ++w) {
      const auto row = s.y_given_w.row(w);
      if (!row.allFinite() || (row.array() < Scalar(0)).any())
        out.push_back("y_given_w[" + s.w_labels[w] + "] has a negative or non-finite entry");
      else if (std::abs(row.sum() - Scalar(1)) > Scalar(kProbTol))
        out.push_back("y_given_w[" + s.w_labels[w] + "] not normalized");
    }
  }

  auto check_joint_shape = [&](const JointWX<Scalar>& j, const std::string& where) {
    if (j.rows() != nw || j.cols() != nx)
      out.push_back(where + " is " + std::to_string(j.rows()) + "x" + std::to_string(j.cols()) +
                    ", expected " + std::to_string(nw) + "x" + std::to_string(nx));
  };
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, JointWX<Scalar>>) {
          check_joint_shape(k, "joint");
        } else if constexpr (std::is_same_v<T, MarginalsOnly<Scalar>>) {
          if (k.pw.size() != nw) out.push_back("marginal pw length does not match w_labels");
          else if (!detail::is_prob_vector(k.pw)) out.push_back("marginal pw not a probability vector");
          else if ((k.pw.array() <= Scalar(0)).any()) out.push_back("marginal pw has a zero entry");
          if (k.px.size() != nx) out.push_back("marginal px length does not match x_labels");
          else if (!detail::is_prob_vector(k.px)) out.push_back("marginal px not a probability vector");
          else if ((k.px.array() <= Scalar(0)).any()) out.push_back("marginal px has a zero entry");
        } else {
          if (k.members.empty()) out.push_back("candidate set is empty");
          for (std::size_t i = 0; i < k.members.size(); ++i)
            check_joint_shape(k.members[i], "candidate[" + std::to_string(i) + "]");
        }
      },
      s.wx);

  for (const auto& [label, delta] : s.bv_deltas) {
    if (!s.w_labels.find(label) || !s.x_labels.find(label))
      out.push_back("bv key not in label sets: '" + label + "'");
    if (!(delta >= Scalar(0))) out.push_back("bv delta for '" + label + "' is negative");
  }
  return out;
}

template <typename Scalar>
void require_valid(const Scenario<Scalar>& s) {
  const auto v = validate_scenario(s);
  if (v.empty()) return;
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "; " : "") << v[i];
  throw Error(Errc::ValidationFailed, os.str());
}

enum class Method { ClosedForm, LinearProgram, GridUnion, Oracle, Dominance };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::ClosedForm: return "closed-form";
    case Method::LinearProgram: return "lp";
    case Method::GridUnion: return "grid-union";
    case Method::Oracle: return "oracle";
    case Method::Dominance: return "dominance";
  }
  return "unknown";
}

template <typename Scalar>
struct BoundInterval {
  Scalar lo{};
  Scalar hi{};
  bool sharp = false;
  Method method = Method::ClosedForm;

  BoundInterval() = default;
  BoundInterval(Scalar lo_, Scalar hi_, bool sharp_, Method method_)
      : lo(lo_), hi(hi_), sharp(sharp_), method(method_) {
    if (lo > hi) {
      // Solver round-off can invert a zero-width interval by a few ulps.
      if (lo - hi > Scalar(1e-9)) throw Error(Errc::InvalidArgument, "interval with lo > hi");
      hi = lo;
    }
  }

  Scalar width() const { return hi - lo; }
  bool contains(Scalar v, Scalar tol = Scalar(0)) const { return v >= lo - tol && v <= hi + tol; }
  bool contains(const BoundInterval& o, Scalar tol = Scalar(0)) const {
    return o.lo >= lo - tol && o.hi <= hi + tol;
  }
};

template <typename Scalar>
BoundInterval<Scalar> hull(const BoundInterval<Scalar>& a, const BoundInterval<Scalar>& b) {
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi), a.sharp && b.sharp, a.method};
}

using Distribution = DiscreteDistribution<double>;
using Joint = JointWX<double>;
using ScenarioD = Scenario<double>;
using Interval = BoundInterval<double>;

}  // namespace dcc
