#pragma once

#include "cbwk/types.hpp"

#include <vector>

namespace cbwk::lp {

enum class Sense { le, eq, ge };

enum class Status { optimal, infeasible, unbounded, failed };

/// maximize c^T x  subject to  rows(i) . x (sense_i) rhs_i,  x >= 0.
struct Problem {
  Vector objective;
  Matrix rows;
  Vector rhs;
  std::vector<Sense> senses;

  Index num_vars() const { return objective.size(); }
  Index num_rows() const { return rows.rows(); }
  void add_row(const Vector &coeffs, Sense s, double b);
};

struct Solution {
  Status status = Status::failed;
  Vector x;
  double objective = 0.0;
  std::size_t pivots = 0;
  /// Bland's rule was switched on after stalling.
  bool used_bland = false;
};

struct Options {
  double tol = 1e-9;
  /// Degenerate pivots tolerated before switching to Bland's rule.
  std::size_t stall_limit = 50;
  std::size_t max_pivots = 0; ///< 0: 50 (rows + cols)
};

/// Dense two-phase tableau simplex.
Solution solve(const Problem &p, const Options &opts = {});

const char *to_string(Status s);

} // namespace cbwk::lp
