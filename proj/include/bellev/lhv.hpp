#ifndef BELLEV_LHV_HPP
#define BELLEV_LHV_HPP

// Local hidden variable model: weights on the sixteen joint outcome
// assignments, their marginals, the detection bounds, and LP membership.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "bellev/error.hpp"
#include "bellev/linprog.hpp"
#include "bellev/probability.hpp"
#include "bellev/random.hpp"

namespace bellev {

/// Weight index k has bit 3 set when alpha (Alice, setting a) is null,
/// bit 2 for alpha', bit 1 for beta, bit 0 for beta'.  k = 0 is ++++, k = 15 is 0000.
namespace hidden {
constexpr std::size_t null_null = 15;
constexpr bool alice_null(std::size_t k, std::size_t side) { return (k >> (3 - side)) & 1u; }
constexpr bool bob_null(std::size_t k, std::size_t side) { return (k >> (1 - side)) & 1u; }
constexpr Outcome outcome(std::size_t k, Setting s) {
  const bool a0 = alice_null(k, alice_side(s)), b0 = bob_null(k, bob_side(s));
  return static_cast<Outcome>(2 * a0 + b0);
}
}  // namespace hidden

class HiddenWeights {
 public:
  using Values = std::array<double, 16>;

  explicit HiddenWeights(const Values& w) : w_(w) {
    double sum = 0.0;
    for (double x : w_) {
      if (!(x >= 0.0)) throw Error(ErrorKind::OutOfSimplex, "negative hidden weight");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw Error(ErrorKind::OutOfSimplex, "hidden weights sum to " + std::to_string(sum));
  }

  double operator[](std::size_t k) const { return w_[k]; }
  const Values& values() const { return w_; }

 private:
  Values w_;
};

inline ProbabilityVector probabilities_from_weights(const HiddenWeights& w) {
  CellProbabilities::Values v{};
  for (auto s : all_settings) {
    std::array<double, 4> acc{};
    for (std::size_t k = 0; k < 16; ++k) acc[index(hidden::outcome(k, s))] += w[k];
    for (auto o : all_outcomes) v[cell(s, o)] = acc[index(o)];
  }
  return ProbabilityVector(CellProbabilities(v));
}

/// Which detection bound a probability vector breaks first, if any.
enum class BoundViolation { none, coincidence, null_event, alice_single, bob_single };

inline constexpr double bounds_slack = 1e-12;

inline BoundViolation first_bound_violation(const CellProbabilities& p, const ExperimentParams& params) {
  const double g = params.gamma;
  for (auto s : all_settings) {
    if (p(s, Outcome::plus_plus) > g * params.eta_a * params.eta_b + bounds_slack)
      return BoundViolation::coincidence;
    if (p.clicks(s) > g + bounds_slack) return BoundViolation::null_event;
  }
  using enum Setting;
  if (p.alice_plus(ab) > g * params.eta_a + bounds_slack ||
      p.alice_plus(a_prime_b) > g * params.eta_a + bounds_slack)
    return BoundViolation::alice_single;
  if (p.bob_plus(ab) > g * params.eta_b + bounds_slack ||
      p.bob_plus(ab_prime) > g * params.eta_b + bounds_slack)
    return BoundViolation::bob_single;
  return BoundViolation::none;
}

inline bool check_bounds(const CellProbabilities& p, const ExperimentParams& params) {
  return first_bound_violation(p, params) == BoundViolation::none;
}

/// p(ab)++ - p(ab')+0 - p(a'b)0+ - p(a'b')++; positive values rule out LHV.
inline double bell_violation(const CellProbabilities& p) {
  using enum Setting;
  return p(ab, Outcome::plus_plus) - p(ab_prime, Outcome::plus_null) -
         p(a_prime_b, Outcome::null_plus) - p(a_prime_b_prime, Outcome::plus_plus);
}

inline constexpr long double lp_feasibility_tolerance = 1e-10L;

/// Feasibility of the marginal equations alone (no detection bounds).
/// Works in click coordinates scaled by their maximum so that tiny gamma
/// does not shrink the tolerance's meaning.
inline FeasibilityResult lhv_marginal_feasibility(const CellProbabilities& p,
                                                  HiddenWeights::Values* weights = nullptr) {
  using enum Setting;
  std::array<double, 8> x{p.alice_plus(ab), p.alice_plus(a_prime_b), p.bob_plus(ab),
                          p.bob_plus(ab_prime)};
  for (auto s : all_settings) x[4 + index(s)] = p.clicks(s);
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, v);
  if (scale == 0.0) {
    if (weights) {
      weights->fill(0.0);
      (*weights)[hidden::null_null] = 1.0;
    }
    return {true, 0.0L, 0};
  }
  using Lp = FeasibilityLp<9, 16>;
  Lp::Matrix a{};
  Lp::Rhs b{};
  for (std::size_t k = 0; k < 15; ++k) {
    for (std::size_t side = 0; side < 2; ++side) {
      a[side][k] = hidden::alice_null(k, side) ? 0.0 : 1.0;
      a[2 + side][k] = hidden::bob_null(k, side) ? 0.0 : 1.0;
    }
    for (auto s : all_settings)
      a[4 + index(s)][k] = hidden::outcome(k, s) == Outcome::null_null ? 0.0 : 1.0;
    a[8][k] = scale;
  }
  a[8][15] = 1.0;  // weight of 0000, unscaled
  for (std::size_t i = 0; i < 8; ++i) b[i] = x[i] / scale;
  b[8] = 1.0;
  std::array<double, 16> u{};
  const auto r = Lp::solve(a, b, lp_feasibility_tolerance, weights ? &u : nullptr);
  if (weights) {
    for (std::size_t k = 0; k < 15; ++k) (*weights)[k] = u[k] * scale;
    (*weights)[hidden::null_null] = u[15];
  }
  return r;
}

/// True iff some hidden weights reproduce p and p obeys the detection bounds.
inline bool lhv_membership(const ProbabilityVector& p, const ExperimentParams& params) {
  if (!check_bounds(p, params)) return false;
  if (bell_violation(p) > 0.0) return false;
  return lhv_marginal_feasibility(p).feasible;
}

struct LhvDrawStats {
  std::uint64_t candidates = 0;
  std::uint64_t accepted = 0;
  std::uint64_t rejected_coincidence = 0;
  std::uint64_t rejected_null_event = 0;
  std::uint64_t rejected_alice_single = 0;
  std::uint64_t rejected_bob_single = 0;

  LhvDrawStats& operator+=(const LhvDrawStats& o) {
    candidates += o.candidates;
    accepted += o.accepted;
    rejected_coincidence += o.rejected_coincidence;
    rejected_null_event += o.rejected_null_event;
    rejected_alice_single += o.rejected_alice_single;
    rejected_bob_single += o.rejected_bob_single;
    return *this;
  }
};

/// Sixteen Gamma(1/8) variates scaled into the gamma part of the simplex; the
/// remaining 1 - gamma sits on the all-null assignment.
inline HiddenWeights::Values draw_pinned_weights(double gamma, Engine& engine) {
  std::gamma_distribution<double> g(0.125, 1.0);
  HiddenWeights::Values y{};
  double total = 0.0;
  do {
    total = 0.0;
    for (auto& v : y) {
      v = g(engine);
      total += v;
    }
  } while (!(total > 0.0));
  for (auto& v : y) v = gamma * (v / total);
  y[hidden::null_null] += 1.0 - gamma;
  return y;
}

inline HiddenWeights mix_weights(const std::array<HiddenWeights::Values, 4>& w, double epsilon) {
  HiddenWeights::Values m{};
  double sum = 0.0;
  for (std::size_t k = 0; k < 16; ++k) {
    m[k] = (1.0 - 3.0 * epsilon) * w[0][k] + epsilon * (w[1][k] + w[2][k] + w[3][k]);
    sum += m[k];
  }
  for (auto& v : m) v /= sum;
  return HiddenWeights(m);
}

/// One accepted LHV prior draw; rejections are tallied in `stats`.
inline ProbabilityVector lhv_draw(const ExperimentParams& params, double epsilon, Engine& engine,
                                  LhvDrawStats& stats) {
  for (;;) {
    std::array<HiddenWeights::Values, 4> w;
    for (auto& x : w) x = draw_pinned_weights(params.gamma, engine);
    ++stats.candidates;
    ProbabilityVector p = probabilities_from_weights(mix_weights(w, epsilon));
    switch (first_bound_violation(p, params)) {
      case BoundViolation::none: ++stats.accepted; return p;
      case BoundViolation::coincidence: ++stats.rejected_coincidence; break;
      case BoundViolation::null_event: ++stats.rejected_null_event; break;
      case BoundViolation::alice_single: ++stats.rejected_alice_single; break;
      case BoundViolation::bob_single: ++stats.rejected_bob_single; break;
    }
  }
}

}  // namespace bellev

#endif  // BELLEV_LHV_HPP
