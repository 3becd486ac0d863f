#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "arena/analysis.hpp"
#include "arena/util.hpp"

namespace arena {

namespace {

constexpr double kPivotTol = 1e-11;

// Dense tableau simplex with Bland's rule (no cycling) for
//   max sum(w)  s.t.  A'w <= 1, w >= 0
// where A' is the payoff matrix shifted positive. The dual solution read
// off the slack columns is the row player's strategy; both players and the
// game value come out of one solve.
struct SimplexResult {
  std::vector<double> w;  // primal (column player, unnormalized)
  std::vector<double> u;  // dual (row player, unnormalized)
  double objective = 0.0;
};

SimplexResult solve_lp(const std::vector<std::vector<double>>& a_shifted) {
  const int m = static_cast<int>(a_shifted.size());
  const int n = static_cast<int>(a_shifted[0].size());
  const int width = n + m + 1;

  // Rows 0..m-1: constraints [A' | I | 1]; row m: objective [-1 | 0 | 0].
  std::vector<std::vector<double>> t(static_cast<std::size_t>(m + 1),
                                     std::vector<double>(static_cast<std::size_t>(width), 0.0));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) t[i][j] = a_shifted[i][j];
    t[i][n + i] = 1.0;
    t[i][width - 1] = 1.0;
  }
  for (int j = 0; j < n; ++j) t[m][j] = -1.0;

  std::vector<int> basis(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) basis[i] = n + i;

  const long max_iters = 2000L + 50L * static_cast<long>(m + n) * (m + n);
  for (long iter = 0; iter < max_iters; ++iter) {
    // Bland: entering = lowest-index column with negative reduced cost.
    int enter = -1;
    for (int j = 0; j < width - 1; ++j) {
      if (t[m][j] < -kPivotTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;  // optimal

    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (t[i][enter] > kPivotTol) {
        const double ratio = t[i][width - 1] / t[i][enter];
        if (ratio < best_ratio - kPivotTol ||
            (ratio < best_ratio + kPivotTol && (leave < 0 || basis[i] < basis[leave]))) {
          best_ratio = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) throw NumericalError("unbounded game LP (shift failed)");

    const double pivot = t[leave][enter];
    for (int j = 0; j < width; ++j) t[leave][j] /= pivot;
    for (int i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = t[i][enter];
      if (f == 0.0) continue;
      for (int j = 0; j < width; ++j) t[i][j] -= f * t[leave][j];
    }
    basis[leave] = enter;
  }

  SimplexResult res;
  res.w.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) res.w[basis[i]] = t[i][width - 1];
  }
  res.u.assign(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) res.u[i] = t[m][n + i];  // reduced costs on slacks
  res.objective = t[m][width - 1];
  return res;
}

}  // namespace

MatrixGame transpose(const MatrixGame& game) {
  MatrixGame out;
  out.payoff.assign(static_cast<std::size_t>(game.cols()),
                    std::vector<double>(static_cast<std::size_t>(game.rows()), 0.0));
  for (int i = 0; i < game.rows(); ++i) {
    for (int j = 0; j < game.cols(); ++j) out.payoff[j][i] = game.payoff[i][j];
  }
  out.row_labels = game.col_labels;
  out.col_labels = game.row_labels;
  return out;
}

Equilibrium solve_minimax(const MatrixGame& game, double tolerance) {
  const int m = game.rows();
  const int n = game.cols();
  if (m < 1 || n < 1) throw std::invalid_argument("empty payoff matrix");
  for (const auto& row : game.payoff) {
    if (static_cast<int>(row.size()) != n) throw std::invalid_argument("ragged payoff matrix");
    for (double v : row) {
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite payoff entry");
    }
  }

  double lo = game.payoff[0][0];
  for (const auto& row : game.payoff) lo = std::min(lo, *std::min_element(row.begin(), row.end()));
  const double shift = 1.0 - lo;
  std::vector<std::vector<double>> shifted(static_cast<std::size_t>(m),
                                           std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) shifted[i][j] = game.payoff[i][j] + shift;
  }

  const SimplexResult lp = solve_lp(shifted);
  if (lp.objective <= 0.0) throw NumericalError("degenerate game LP solution");

  Equilibrium eq;
  eq.col_strategy.assign(static_cast<std::size_t>(n), 0.0);
  eq.row_strategy.assign(static_cast<std::size_t>(m), 0.0);
  double wsum = 0.0, usum = 0.0;
  for (double v : lp.w) wsum += v;
  for (double v : lp.u) usum += v;
  for (int j = 0; j < n; ++j) eq.col_strategy[j] = lp.w[j] / wsum;
  for (int i = 0; i < m; ++i) eq.row_strategy[i] = lp.u[i] / usum;
  eq.value = 1.0 / wsum - shift;

  // Best-response gap on the original matrix is the contract: the row
  // player's security under x must meet the column player's exposure under y.
  double row_security = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += eq.row_strategy[i] * game.payoff[i][j];
    row_security = std::min(row_security, s);
  }
  double col_exposure = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += game.payoff[i][j] * eq.col_strategy[j];
    col_exposure = std::max(col_exposure, s);
  }
  eq.gap = col_exposure - row_security;

  if (!(eq.gap <= tolerance)) {
    throw NumericalError("equilibrium gap " + format_double(eq.gap) + " exceeds tolerance " +
                         format_double(tolerance));
  }
  return eq;
}

}  // namespace arena
