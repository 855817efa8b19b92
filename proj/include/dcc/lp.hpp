#pragma once

// Dense two-phase primal simplex for small boxed linear programs.

#include "dcc/core.hpp"

#include <limits>

namespace dcc {

template <typename Scalar>
struct LinearProgram {
  struct Row {
    Vec<Scalar> coeffs;
    Scalar rhs;
  };

  Index n_vars;
  Vec<Scalar> objective;
  std::vector<Row> eq_rows;    ///< coeffs . x == rhs
  std::vector<Row> ineq_rows;  ///< coeffs . x <= rhs
  Vec<Scalar> lower;
  Vec<Scalar> upper;           ///< may be +infinity

  /// All variables boxed in [0, 1], zero objective.
  explicit LinearProgram(Index n)
      : n_vars(n),
        objective(Vec<Scalar>::Zero(n)),
        lower(Vec<Scalar>::Zero(n)),
        upper(Vec<Scalar>::Ones(n)) {}

  void add_equality(Vec<Scalar> coeffs, Scalar rhs) { eq_rows.push_back({std::move(coeffs), rhs}); }
  void add_inequality(Vec<Scalar> coeffs, Scalar rhs) { ineq_rows.push_back({std::move(coeffs), rhs}); }

  void check() const {
    auto bad = [](const std::string& m) { throw Error(Errc::InvalidArgument, "LinearProgram: " + m); };
    if (objective.size() != n_vars || lower.size() != n_vars || upper.size() != n_vars)
      bad("objective/box length differs from n_vars");
    for (const auto& r : eq_rows)
      if (r.coeffs.size() != n_vars) bad("equality row length differs from n_vars");
    for (const auto& r : ineq_rows)
      if (r.coeffs.size() != n_vars) bad("inequality row length differs from n_vars");
    for (Index i = 0; i < n_vars; ++i) {
      if (!std::isfinite(static_cast<double>(lower[i]))) bad("lower bounds must be finite");
      if (lower[i] > upper[i]) bad("box lower exceeds upper");
    }
  }

  /// Largest violation of any constraint at x.
  Scalar max_violation(const Vec<Scalar>& x) const {
    Scalar v = 0;
    for (const auto& r : eq_rows) v = std::max(v, std::abs(r.coeffs.dot(x) - r.rhs));
    for (const auto& r : ineq_rows) v = std::max(v, r.coeffs.dot(x) - r.rhs);
    v = std::max(v, (lower - x).maxCoeff());
    v = std::max(v, (x - upper).maxCoeff());
    return v;
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

template <typename Scalar>
struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Scalar value{};
  Vec<Scalar> point;
  /// |primal - dual| objective of the standard-form problem at the final basis.
  Scalar duality_gap{};
  /// Most negative reduced cost under the recovered duals (>= -tol when optimal).
  Scalar dual_infeasibility{};
  Index iterations = 0;

  bool optimal() const { return status == LpStatus::Optimal; }
};

template <typename Scalar>
struct SolverOptions {
  Scalar feasibility_tol = Scalar(1e-8);
  Scalar optimality_tol = Scalar(1e-8);
  Scalar pivot_tol = Scalar(1e-11);
  Index max_iterations = 20000;
};

namespace detail {

/// Standard form min c.z s.t. A z = b, z >= 0 with z = x - lower, plus
/// slacks for inequalities and finite upper bounds. Bland's rule throughout.
template <typename Scalar>
class Simplex {
 public:
  Simplex(const LinearProgram<Scalar>& lp, const SolverOptions<Scalar>& opt) : lp_(lp), opt_(opt) {
    lp.check();
    build();
  }

  LpSolution<Scalar> solve() {
    LpSolution<Scalar> sol;
    // Phase 1: minimize the sum of artificials.
    Vec<Scalar> phase1 = Vec<Scalar>::Zero(total_cols_);
    phase1.segment(n_struct_, n_art_).setOnes();
    set_costs(phase1);
    run(/*allow_artificial=*/true, sol.iterations);
    if (-tab_(m_, total_cols_) > opt_.feasibility_tol) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    expel_artificials();

    Vec<Scalar> phase2 = Vec<Scalar>::Zero(total_cols_);
    phase2.head(lp_.n_vars) = lp_.objective;
    set_costs(phase2);
    if (!run(/*allow_artificial=*/false, sol.iterations)) {
      sol.status = LpStatus::Unbounded;
      return sol;
    }

    Vec<Scalar> z = Vec<Scalar>::Zero(total_cols_);
    for (Index i = 0; i < m_; ++i) z[basis_[i]] = tab_(i, total_cols_);
    sol.point = lp_.lower + z.head(lp_.n_vars);
    sol.value = lp_.objective.dot(sol.point);
    sol.status = LpStatus::Optimal;
    certify(phase2, z, sol);
    if (lp_.max_violation(sol.point) > opt_.feasibility_tol + Scalar(1e-12))
      throw Error(Errc::SolverStalled, "optimal basis violates constraints beyond tolerance");
    return sol;
  }

 private:
  void build() {
    const Index n = lp_.n_vars;
    const Index n_eq = static_cast<Index>(lp_.eq_rows.size());
    const Index n_in = static_cast<Index>(lp_.ineq_rows.size());
    std::vector<Index> boxed;
    for (Index k = 0; k < n; ++k)
      if (std::isfinite(static_cast<double>(lp_.upper[k]))) boxed.push_back(k);
    const Index n_box = static_cast<Index>(boxed.size());
    m_ = n_eq + n_in + n_box;
    n_struct_ = n + n_in + n_box;

    A_ = Mat<Scalar>::Zero(m_, n_struct_);
    b_ = Vec<Scalar>::Zero(m_);
    Index r = 0;
    for (const auto& row : lp_.eq_rows) {
      A_.row(r).head(n) = row.coeffs.transpose();
      b_[r++] = row.rhs - row.coeffs.dot(lp_.lower);
    }
    for (Index i = 0; i < n_in; ++i, ++r) {
      const auto& row = lp_.ineq_rows[static_cast<std::size_t>(i)];
      A_.row(r).head(n) = row.coeffs.transpose();
      A_(r, n + i) = 1;
      b_[r] = row.rhs - row.coeffs.dot(lp_.lower);
    }
    for (Index i = 0; i < n_box; ++i, ++r) {
      const Index k = boxed[static_cast<std::size_t>(i)];
      A_(r, k) = 1;
      A_(r, n + n_in + i) = 1;
      b_[r] = lp_.upper[k] - lp_.lower[k];
    }
    for (Index i = 0; i < m_; ++i)
      if (b_[i] < 0) {
        A_.row(i) *= -1;
        b_[i] *= -1;
      }

    // Rows whose own slack kept a +1 coefficient start with that slack basic;
    // the rest get an artificial.
    basis_.assign(static_cast<std::size_t>(m_), -1);
    std::vector<Index> needs_art;
    for (Index i = 0; i < m_; ++i) {
      if (i >= n_eq) {
        const Index slack = n + (i - n_eq);
        if (A_(i, slack) == Scalar(1)) {
          basis_[i] = slack;
          continue;
        }
      }
      needs_art.push_back(i);
    }
    n_art_ = static_cast<Index>(needs_art.size());
    art_rows_ = needs_art;
    total_cols_ = n_struct_ + n_art_;

    tab_ = Mat<Scalar>::Zero(m_ + 1, total_cols_ + 1);
    tab_.topLeftCorner(m_, n_struct_) = A_;
    tab_.col(total_cols_).head(m_) = b_;
    for (Index a = 0; a < n_art_; ++a) {
      const Index i = needs_art[static_cast<std::size_t>(a)];
      tab_(i, n_struct_ + a) = 1;
      basis_[i] = n_struct_ + a;
    }
  }

  // Cost row holds reduced costs; its last entry is minus the objective.
  void set_costs(const Vec<Scalar>& c) {
    tab_.row(m_).setZero();
    tab_.row(m_).head(total_cols_) = c.transpose();
    for (Index i = 0; i < m_; ++i) {
      const Scalar cb = c[basis_[i]];
      if (cb != Scalar(0)) tab_.row(m_) -= cb * tab_.row(i);
    }
  }

  void pivot(Index r, Index col) {
    const Scalar piv = tab_(r, col);
    tab_.row(r) /= piv;
    for (Index i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const Scalar f = tab_(i, col);
      if (f != Scalar(0)) tab_.row(i) -= f * tab_.row(r);
    }
    basis_[r] = col;
  }

  // Returns false when unbounded.
  bool run(bool allow_artificial, Index& iterations) {
    const Index limit = allow_artificial ? total_cols_ : n_struct_;
    for (;;) {
      if (iterations >= opt_.max_iterations)
        throw Error(Errc::SolverStalled, "simplex iteration limit reached");
      Index enter = -1;
      for (Index j = 0; j < limit; ++j)
        if (tab_(m_, j) < -opt_.optimality_tol) {
          enter = j;
          break;
        }
      if (enter < 0) return true;

      Index leave = -1;
      Scalar best = std::numeric_limits<Scalar>::infinity();
      for (Index i = 0; i < m_; ++i) {
        const Scalar a = tab_(i, enter);
        if (a <= opt_.pivot_tol) continue;
        const Scalar ratio = tab_(i, total_cols_) / a;
        if (leave < 0 || ratio < best - Scalar(1e-12)) {
          best = ratio;
          leave = i;
        } else if (ratio <= best + Scalar(1e-12) && basis_[i] < basis_[leave]) {
          best = std::min(best, ratio);
          leave = i;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      ++iterations;
    }
  }

  void expel_artificials() {
    for (Index i = 0; i < m_; ++i) {
      if (basis_[i] < n_struct_) continue;
      for (Index j = 0; j < n_struct_; ++j)
        if (std::abs(tab_(i, j)) > opt_.pivot_tol) {
          pivot(i, j);
          break;
        }
      // Otherwise the row is redundant; its artificial stays basic at zero
      // and never constrains a structural entering column.
    }
  }

  void certify(const Vec<Scalar>& c, const Vec<Scalar>& z, LpSolution<Scalar>& sol) const {
    Mat<Scalar> B = Mat<Scalar>::Zero(m_, m_);
    Vec<Scalar> cb(m_);
    for (Index i = 0; i < m_; ++i) {
      const Index col = basis_[i];
      if (col < n_struct_) B.col(i) = A_.col(col);
      else B(art_rows_[col - n_struct_], i) = 1;
      cb[i] = c[col];
    }
    const Vec<Scalar> y = B.transpose().fullPivLu().solve(cb);
    sol.duality_gap = std::abs(c.head(n_struct_).dot(z.head(n_struct_)) - b_.dot(y));
    const Vec<Scalar> reduced = c.head(n_struct_) - A_.transpose() * y;
    sol.dual_infeasibility = std::min(Scalar(0), reduced.minCoeff());
  }

  const LinearProgram<Scalar>& lp_;
  SolverOptions<Scalar> opt_;
  Index m_ = 0, n_struct_ = 0, n_art_ = 0, total_cols_ = 0;
  Mat<Scalar> A_, tab_;
  Vec<Scalar> b_;
  std::vector<Index> basis_;
  std::vector<Index> art_rows_;
};

}  // namespace detail

template <typename Scalar>
LpSolution<Scalar> solve_min(const LinearProgram<Scalar>& lp, const SolverOptions<Scalar>& opt = {}) {
  return detail::Simplex<Scalar>(lp, opt).solve();
}

template <typename Scalar>
LpSolution<Scalar> solve_max(const LinearProgram<Scalar>& lp, const SolverOptions<Scalar>& opt = {}) {
  LinearProgram<Scalar> neg = lp;
  neg.objective = -lp.objective;
  auto sol = detail::Simplex<Scalar>(neg, opt).solve();
  if (sol.optimal()) sol.value = -sol.value;
  return sol;
}

}  // namespace dcc
