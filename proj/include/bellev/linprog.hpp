#ifndef BELLEV_LINPROG_HPP
#define BELLEV_LINPROG_HPP

// Dense phase-I simplex for small feasibility problems  A u = b, u >= 0.
// Bland's rule (no cycling); long double tableau.

#include <array>
#include <cmath>
#include <cstddef>

#include "bellev/error.hpp"

namespace bellev {

struct FeasibilityResult {
  bool feasible = false;
  long double infeasibility = 0.0L;  // sum of artificial variables at the optimum
  int iterations = 0;
};

template <std::size_t M, std::size_t N>
class FeasibilityLp {
 public:
  using Matrix = std::array<std::array<double, N>, M>;
  using Rhs = std::array<double, M>;

  static FeasibilityResult solve(const Matrix& a, const Rhs& b, long double tol,
                                 std::array<double, N>* solution = nullptr) {
    constexpr std::size_t cols = N + M + 1;  // structural, artificial, rhs
    std::array<std::array<long double, cols>, M + 1> t{};
    std::array<std::size_t, M> basis{};
    for (std::size_t i = 0; i < M; ++i) {
      const long double sgn = b[i] < 0 ? -1.0L : 1.0L;
      for (std::size_t j = 0; j < N; ++j) t[i][j] = sgn * a[i][j];
      t[i][N + i] = 1.0L;
      t[i][cols - 1] = sgn * b[i];
      basis[i] = N + i;
    }
    // Objective row holds reduced costs of "minimize sum of artificials".
    for (std::size_t j = 0; j < cols; ++j) {
      if (j >= N && j < N + M) continue;
      long double s = 0.0L;
      for (std::size_t i = 0; i < M; ++i) s += t[i][j];
      t[M][j] = -s;
    }
    constexpr long double pivot_tol = 1e-15L;
    constexpr int max_iterations = 50 * static_cast<int>(N + M);
    int it = 0;
    for (; it < max_iterations; ++it) {
      std::size_t enter = cols;
      for (std::size_t j = 0; j < N + M; ++j)
        if (t[M][j] < -pivot_tol) {
          enter = j;
          break;
        }
      if (enter == cols) break;
      std::size_t leave = M;
      long double best = 0.0L;
      for (std::size_t i = 0; i < M; ++i) {
        if (t[i][enter] <= pivot_tol) continue;
        const long double r = t[i][cols - 1] / t[i][enter];
        if (leave == M || r < best || (r == best && basis[i] < basis[leave])) {
          leave = i;
          best = r;
        }
      }
      if (leave == M) throw Error(ErrorKind::SolverFailure, "unbounded phase-I problem");
      const long double piv = t[leave][enter];
      for (auto& x : t[leave]) x /= piv;
      for (std::size_t i = 0; i <= M; ++i) {
        if (i == leave) continue;
        const long double f = t[i][enter];
        if (f == 0.0L) continue;
        for (std::size_t j = 0; j < cols; ++j) t[i][j] -= f * t[leave][j];
      }
      basis[leave] = enter;
    }
    if (it == max_iterations) throw Error(ErrorKind::SolverFailure, "simplex iteration limit");
    FeasibilityResult r;
    r.iterations = it;
    r.infeasibility = -t[M][cols - 1];
    r.feasible = r.infeasibility <= tol;
    if (solution) {
      solution->fill(0.0);
      for (std::size_t i = 0; i < M; ++i)
        if (basis[i] < N) (*solution)[basis[i]] = static_cast<double>(t[i][cols - 1]);
    }
    return r;
  }
};

}  // namespace bellev

#endif  // BELLEV_LINPROG_HPP
