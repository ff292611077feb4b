#include "cbwk/simplex.hpp"

#include <cmath>
#include <limits>

namespace cbwk::lp {

void Problem::add_row(const Vector &coeffs, Sense s, double b) {
  if (coeffs.size() != num_vars())
    throw ArgumentError("lp::Problem::add_row: coefficient count mismatch");
  rows.conservativeResize(rows.rows() + 1, num_vars());
  rows.row(rows.rows() - 1) = coeffs.transpose();
  rhs.conservativeResize(rhs.size() + 1);
  rhs(rhs.size() - 1) = b;
  senses.push_back(s);
}

const char *to_string(Status s) {
  switch (s) {
  case Status::optimal:
    return "optimal";
  case Status::infeasible:
    return "infeasible";
  case Status::unbounded:
    return "unbounded";
  case Status::failed:
    return "failed";
  }
  return "unknown";
}

namespace {

/// Tableau for min cost^T x over {A x = b, x >= 0} with a known basis.
/// The last row holds reduced costs, the last column the right-hand side.
class Tableau {
public:
  Tableau(Matrix t, std::vector<Index> basis, const Options &opts,
          std::size_t max_pivots)
      : t_(std::move(t)), basis_(std::move(basis)), opts_(opts),
        max_pivots_(max_pivots) {}

  Index rows() const { return t_.rows() - 1; }
  Index cols() const { return t_.cols() - 1; }
  Matrix &data() { return t_; }
  std::vector<Index> &basis() { return basis_; }
  std::size_t pivots() const { return pivots_; }
  bool used_bland() const { return bland_; }

  /// Sets the reduced-cost row for the given costs on the current basis.
  void price(const Vector &cost) {
    const Index m = rows();
    t_.row(m).setZero();
    t_.row(m).head(cols()) = cost.transpose();
    for (Index i = 0; i < m; ++i) {
      const double cb = cost(basis_[static_cast<std::size_t>(i)]);
      if (cb != 0.0)
        t_.row(m) -= cb * t_.row(i);
    }
  }

  void pivot(Index r, Index c) {
    t_.row(r) /= t_(r, c);
    for (Index i = 0; i < t_.rows(); ++i) {
      if (i == r)
        continue;
      const double f = t_(i, c);
      if (f != 0.0)
        t_.row(i) -= f * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = c;
    ++pivots_;
  }

  /// Runs simplex iterations over columns with allowed(j) true.
  Status optimize(const std::vector<bool> &allowed) {
    const Index m = rows();
    const Index rhs = cols();
    std::size_t stalled = 0;
    while (true) {
      if (pivots_ >= max_pivots_)
        return Status::failed;
      // Entering column.
      Index enter = -1;
      double best = -opts_.tol;
      for (Index j = 0; j < cols(); ++j) {
        if (!allowed[static_cast<std::size_t>(j)])
          continue;
        const double d = t_(m, j);
        if (bland_) {
          if (d < -opts_.tol) {
            enter = j;
            break;
          }
        } else if (d < best) {
          best = d;
          enter = j;
        }
      }
      if (enter < 0)
        return Status::optimal;
      // Ratio test; ties to the smallest basic index.
      Index leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < m; ++i) {
        const double a = t_(i, enter);
        if (a <= opts_.tol)
          continue;
        const double q = std::max(0.0, t_(i, rhs)) / a;
        if (q < ratio - 1e-12 ||
            (std::abs(q - ratio) <= 1e-12 && leave >= 0 &&
             basis_[static_cast<std::size_t>(i)] <
                 basis_[static_cast<std::size_t>(leave)])) {
          ratio = q;
          leave = i;
        }
      }
      if (leave < 0)
        return Status::unbounded;
      if (ratio <= opts_.tol) {
        if (++stalled > opts_.stall_limit)
          bland_ = true;
      } else {
        stalled = 0;
      }
      pivot(leave, enter);
    }
  }

private:
  Matrix t_;
  std::vector<Index> basis_;
  Options opts_;
  std::size_t max_pivots_;
  std::size_t pivots_ = 0;
  bool bland_ = false;
};

} // namespace

Solution solve(const Problem &p, const Options &opts) {
  const Index n = p.num_vars();
  const Index m = p.num_rows();
  if (p.rhs.size() != m || static_cast<Index>(p.senses.size()) != m ||
      (m > 0 && p.rows.cols() != n))
    throw ArgumentError("lp::solve: inconsistent problem dimensions");

  // Normalize to nonnegative right-hand sides.
  Matrix a = p.rows;
  Vector b = p.rhs;
  std::vector<Sense> senses = p.senses;
  for (Index i = 0; i < m; ++i) {
    if (b(i) < 0.0) {
      a.row(i) *= -1.0;
      b(i) = -b(i);
      auto &s = senses[static_cast<std::size_t>(i)];
      if (s == Sense::le)
        s = Sense::ge;
      else if (s == Sense::ge)
        s = Sense::le;
    }
  }

  Index n_slack = 0, n_art = 0;
  for (Sense s : senses) {
    if (s != Sense::eq)
      ++n_slack;
    if (s != Sense::le)
      ++n_art;
  }
  const Index total = n + n_slack + n_art;
  Matrix t = Matrix::Zero(m + 1, total + 1);
  std::vector<Index> basis(static_cast<std::size_t>(m));
  std::vector<bool> is_art(static_cast<std::size_t>(total), false);
  Index next_slack = n, next_art = n + n_slack;
  for (Index i = 0; i < m; ++i) {
    t.row(i).head(n) = a.row(i);
    t(i, total) = b(i);
    const Sense s = senses[static_cast<std::size_t>(i)];
    if (s == Sense::le) {
      t(i, next_slack) = 1.0;
      basis[static_cast<std::size_t>(i)] = next_slack++;
    } else {
      if (s == Sense::ge)
        t(i, next_slack++) = -1.0;
      t(i, next_art) = 1.0;
      is_art[static_cast<std::size_t>(next_art)] = true;
      basis[static_cast<std::size_t>(i)] = next_art++;
    }
  }

  const std::size_t max_pivots =
      opts.max_pivots ? opts.max_pivots
                      : static_cast<std::size_t>(50 * (m + total + 1));
  Tableau tab(std::move(t), std::move(basis), opts, max_pivots);
  Solution sol;

  // Phase 1: minimize the sum of artificials.
  if (n_art > 0) {
    Vector cost = Vector::Zero(total);
    for (Index j = 0; j < total; ++j)
      if (is_art[static_cast<std::size_t>(j)])
        cost(j) = 1.0;
    tab.price(cost);
    const std::vector<bool> all(static_cast<std::size_t>(total), true);
    const Status s1 = tab.optimize(all);
    sol.pivots = tab.pivots();
    sol.used_bland = tab.used_bland();
    if (s1 == Status::failed)
      return sol;
    const double infeas = -tab.data()(m, total);
    const double scale = std::max(1.0, b.lpNorm<Eigen::Infinity>());
    if (infeas > 1e-7 * scale) {
      sol.status = Status::infeasible;
      return sol;
    }
    // Drive remaining (zero-level) artificials out of the basis.
    for (Index i = 0; i < m; ++i) {
      const Index bv = tab.basis()[static_cast<std::size_t>(i)];
      if (!is_art[static_cast<std::size_t>(bv)])
        continue;
      Index col = -1;
      for (Index j = 0; j < n + n_slack; ++j)
        if (std::abs(tab.data()(i, j)) > opts.tol) {
          col = j;
          break;
        }
      if (col >= 0) {
        tab.pivot(i, col);
      } else {
        // Redundant row: neutralize it, keeping the artificial basic at 0.
        tab.data().row(i).setZero();
        tab.data()(i, bv) = 1.0;
      }
    }
  }

  // Phase 2.
  Vector cost = Vector::Zero(total);
  cost.head(n) = -p.objective;
  tab.price(cost);
  std::vector<bool> allowed(static_cast<std::size_t>(total));
  for (Index j = 0; j < total; ++j)
    allowed[static_cast<std::size_t>(j)] = !is_art[static_cast<std::size_t>(j)];
  const Status s2 = tab.optimize(allowed);
  sol.pivots = tab.pivots();
  sol.used_bland = tab.used_bland();
  if (s2 != Status::optimal) {
    sol.status = s2;
    return sol;
  }
  sol.x = Vector::Zero(n);
  for (Index i = 0; i < m; ++i) {
    const Index bv = tab.basis()[static_cast<std::size_t>(i)];
    if (bv < n)
      sol.x(bv) = std::max(0.0, tab.data()(i, total));
  }
  sol.objective = p.objective.dot(sol.x);
  sol.status = Status::optimal;
  return sol;
}

} // namespace cbwk::lp
