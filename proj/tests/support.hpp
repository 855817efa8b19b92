#pragma once

#include "dcc/core.hpp"

namespace testing {

using namespace dcc;

inline Vec<double> vec(std::initializer_list<double> v) {
  Vec<double> out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline Vec<double> binary_support() { return vec({0.0, 1.0}); }

inline Mat<double> event_table(const Vec<double>& q) {
  Mat<double> m(q.size(), 2);
  m.col(1) = q;
  m.col(0) = Vec<double>::Ones(q.size()) - q;
  return m;
}

inline std::vector<std::string> labels(Index n) {
  std::vector<std::string> out;
  for (Index i = 0; i < n; ++i) out.push_back("c" + std::to_string(i));
  return out;
}

/// Binary-y scenario over any joint, labels c0, c1, ...
inline ScenarioD binary_scenario(const Mat<double>& joint, const Vec<double>& q) {
  return {LabelSet(labels(joint.rows())), LabelSet(labels(joint.cols())), binary_support(), event_table(q),
          Joint(joint)};
}

/// Hispanic ethnicity, existing (w) vs new (x) format; P(y=1|w=0) is free.
inline ScenarioD appendix_c(double q0 = 0.10) {
  CountMatrix c(2, 2);
  c << 799, 44, 2, 110;
  return {LabelSet{"Non-Hispanic", "Hispanic"}, LabelSet{"Non-Hispanic", "Hispanic"}, binary_support(),
          event_table(vec({q0, 16.0 / 112.0})), Joint::from_counts(c)};
}

inline CountMatrix table1_counts() {
  // rows w (existing format), columns x (new format)
  CountMatrix c(6, 6);
  c << 578, 1, 17, 0, 6, 7,
       1, 94, 4, 0, 1, 1,
       2, 0, 110, 0, 0, 0,
       0, 0, 0, 31, 0, 0,
       2, 0, 2, 0, 8, 1,
       15, 9, 21, 17, 7, 20;
  return c;
}

inline LabelSet table1_labels() { return {"NH White", "NH Black", "Hispanic", "Asian", "Native", "Mixed/Other"}; }

}  // namespace testing
