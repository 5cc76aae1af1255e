#ifndef BELLEV_PROBABILITY_HPP
#define BELLEV_PROBABILITY_HPP

// Probability-space data model for the two-party, two-setting, click/no-click
// scheme: sixteen per-setting outcome probabilities, their eight-parameter
// no-signaling form, event counts, and the multinomial log-likelihood.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>

#include "bellev/error.hpp"

namespace bellev {

/// Joint measurement setting. The index is 2*[Alice primed] + [Bob primed].
enum class Setting : std::uint8_t { ab = 0, ab_prime = 1, a_prime_b = 2, a_prime_b_prime = 3 };

/// Outcome of one trigger signal: which detectors fired (+) or stayed silent (0).
enum class Outcome : std::uint8_t { plus_plus = 0, plus_null = 1, null_plus = 2, null_null = 3 };

inline constexpr std::array<Setting, 4> all_settings{
    Setting::ab, Setting::ab_prime, Setting::a_prime_b, Setting::a_prime_b_prime};
inline constexpr std::array<Outcome, 4> all_outcomes{
    Outcome::plus_plus, Outcome::plus_null, Outcome::null_plus, Outcome::null_null};

constexpr std::size_t index(Setting s) { return static_cast<std::size_t>(s); }
constexpr std::size_t index(Outcome o) { return static_cast<std::size_t>(o); }
constexpr std::size_t cell(Setting s, Outcome o) { return 4 * index(s) + index(o); }
constexpr std::size_t alice_side(Setting s) { return index(s) >> 1; }  // 0: a, 1: a'
constexpr std::size_t bob_side(Setting s) { return index(s) & 1; }     // 0: b, 1: b'
constexpr Setting make_setting(std::size_t alice, std::size_t bob) {
  return static_cast<Setting>(2 * alice + bob);
}

constexpr std::string_view to_string(Setting s) {
  switch (s) {
    case Setting::ab: return "ab";
    case Setting::ab_prime: return "ab'";
    case Setting::a_prime_b: return "a'b";
    case Setting::a_prime_b_prime: return "a'b'";
  }
  return "?";
}

constexpr std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::plus_plus: return "++";
    case Outcome::plus_null: return "+0";
    case Outcome::null_plus: return "0+";
    case Outcome::null_null: return "00";
  }
  return "?";
}

inline constexpr double simplex_tolerance = 1e-12;

/// Sixteen cell probabilities with only the per-setting simplex enforced.
/// Relative frequencies live here; they need not respect no-signaling.
class CellProbabilities {
 public:
  using Values = std::array<double, 16>;

  CellProbabilities() { values_.fill(0.0); for (auto s : all_settings) values_[cell(s, Outcome::null_null)] = 1.0; }

  explicit CellProbabilities(const Values& values) : values_(values) {
    for (auto s : all_settings) {
      double sum = 0.0;
      for (auto o : all_outcomes) {
        const double v = values_[cell(s, o)];
        if (!(v >= -simplex_tolerance && v <= 1.0 + simplex_tolerance))
          throw Error(ErrorKind::OutOfSimplex,
                      "probability " + std::to_string(v) + " for setting " +
                          std::string(to_string(s)) + " outside [0,1]");
        sum += v;
      }
      if (std::abs(sum - 1.0) > simplex_tolerance)
        throw Error(ErrorKind::OutOfSimplex, "setting " + std::string(to_string(s)) +
                                                 " sums to " + std::to_string(sum));
    }
  }

  double operator()(Setting s, Outcome o) const { return values_[cell(s, o)]; }
  double operator[](std::size_t i) const { return values_[i]; }
  const Values& values() const { return values_; }

  /// p^(S)_{++} + p^(S)_{+0} + p^(S)_{0+}, computed without cancellation against p_00.
  double clicks(Setting s) const {
    return values_[cell(s, Outcome::plus_plus)] + values_[cell(s, Outcome::plus_null)] +
           values_[cell(s, Outcome::null_plus)];
  }
  double alice_plus(Setting s) const {
    return values_[cell(s, Outcome::plus_plus)] + values_[cell(s, Outcome::plus_null)];
  }
  double bob_plus(Setting s) const {
    return values_[cell(s, Outcome::plus_plus)] + values_[cell(s, Outcome::null_plus)];
  }

 private:
  Values values_;
};

/// Eight-parameter form: the four single-click probabilities and the four
/// null-event probabilities.
struct ReducedProbabilities {
  std::array<double, 2> alice_plus{};  // p_+^(a), p_+^(a')
  std::array<double, 2> bob_plus{};    // p_+^(b), p_+^(b')
  std::array<double, 4> null_event{};  // p^(S)_00 indexed by Setting

  double operator[](std::size_t i) const {
    return i < 2 ? alice_plus[i] : i < 4 ? bob_plus[i - 2] : null_event[i - 4];
  }
  double& operator[](std::size_t i) {
    return i < 2 ? alice_plus[i] : i < 4 ? bob_plus[i - 2] : null_event[i - 4];
  }
  friend bool operator==(const ReducedProbabilities&, const ReducedProbabilities&) = default;
};

/// Maximum violation of the no-signaling equalities.
inline double no_signaling_defect(const CellProbabilities& p) {
  using enum Setting;
  return std::max({std::abs(p.alice_plus(ab) - p.alice_plus(ab_prime)),
                   std::abs(p.alice_plus(a_prime_b) - p.alice_plus(a_prime_b_prime)),
                   std::abs(p.bob_plus(ab) - p.bob_plus(a_prime_b)),
                   std::abs(p.bob_plus(ab_prime) - p.bob_plus(a_prime_b_prime))});
}

/// Cell probabilities obeying the simplex and no-signaling constraints; the
/// redundancy is re-validated on construction.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(const CellProbabilities& cells) : cells_(cells) {
    const double defect = no_signaling_defect(cells_);
    if (defect > simplex_tolerance)
      throw Error(ErrorKind::NoSignalingViolation,
                  "marginals differ by " + std::to_string(defect));
  }
  explicit ProbabilityVector(const CellProbabilities::Values& values)
      : ProbabilityVector(CellProbabilities(values)) {}

  double operator()(Setting s, Outcome o) const { return cells_(s, o); }
  double operator[](std::size_t i) const { return cells_[i]; }
  const CellProbabilities& cells() const { return cells_; }
  operator const CellProbabilities&() const { return cells_; }  // NOLINT

  ReducedProbabilities reduced() const {
    using enum Setting;
    ReducedProbabilities r;
    r.alice_plus = {cells_.alice_plus(ab), cells_.alice_plus(a_prime_b)};
    r.bob_plus = {cells_.bob_plus(ab), cells_.bob_plus(ab_prime)};
    for (auto s : all_settings) r.null_event[index(s)] = cells_(s, Outcome::null_null);
    return r;
  }

 private:
  CellProbabilities cells_;
};

/// Completes the reduced form into all sixteen probabilities.
inline ProbabilityVector reconstruct_full(const ReducedProbabilities& r) {
  for (std::size_t i = 0; i < 8; ++i)
    if (!(r[i] >= 0.0 && r[i] <= 1.0))
      throw Error(ErrorKind::OutOfSimplex, "reduced parameter " + std::to_string(i) +
                                               " = " + std::to_string(r[i]));
  CellProbabilities::Values v{};
  for (auto s : all_settings) {
    const double pa = r.alice_plus[alice_side(s)];
    const double pb = r.bob_plus[bob_side(s)];
    const double p00 = r.null_event[index(s)];
    std::array<double, 4> q{pa + pb + p00 - 1.0, 1.0 - p00 - pb, 1.0 - p00 - pa, p00};
    for (auto& x : q) {
      if (x < -simplex_tolerance || x > 1.0 + simplex_tolerance)
        throw Error(ErrorKind::OutOfSimplex, "reconstructed probability " + std::to_string(x) +
                                                 " for setting " + std::string(to_string(s)));
      x = std::clamp(x, 0.0, 1.0);
    }
    for (auto o : all_outcomes) v[cell(s, o)] = q[index(o)];
  }
  // Clamping moves entries by at most the tolerance; renormalization is not needed.
  return ProbabilityVector(CellProbabilities(v));
}

/// Reduced form of raw cell probabilities; throws when no-signaling fails.
inline ReducedProbabilities reduce(const CellProbabilities& p) {
  return ProbabilityVector(p).reduced();
}
inline ReducedProbabilities reduce(const ProbabilityVector& p) { return p.reduced(); }

/// Observed counts n^(S)_{ab} for one run.
class EventCounts {
 public:
  using Values = std::array<std::uint64_t, 16>;

  EventCounts() { counts_.fill(0); }
  explicit EventCounts(const Values& counts) : counts_(counts) {
    long double constant = 0.0L;
    for (auto n : counts_) {
      total_ += n;
      constant -= std::lgamma(static_cast<long double>(n) + 1.0L);
    }
    constant += std::lgamma(static_cast<long double>(total_) + 1.0L) -
                static_cast<long double>(total_) * std::log(4.0L);
    log_combinatorial_ = constant;
  }

  std::uint64_t operator()(Setting s, Outcome o) const { return counts_[cell(s, o)]; }
  std::uint64_t operator[](std::size_t i) const { return counts_[i]; }
  const Values& values() const { return counts_; }
  std::uint64_t total() const { return total_; }
  std::uint64_t setting_total(Setting s) const {
    std::uint64_t t = 0;
    for (auto o : all_outcomes) t += counts_[cell(s, o)];
    return t;
  }
  /// ln[N!/4^N / prod n!], the stopping-rule factor of the multinomial likelihood.
  long double log_combinatorial() const { return log_combinatorial_; }

  friend EventCounts operator+(const EventCounts& x, const EventCounts& y) {
    Values v{};
    for (std::size_t i = 0; i < 16; ++i) v[i] = x.counts_[i] + y.counts_[i];
    return EventCounts(v);
  }
  friend bool operator==(const EventCounts& x, const EventCounts& y) { return x.counts_ == y.counts_; }

 private:
  Values counts_{};
  std::uint64_t total_ = 0;
  long double log_combinatorial_ = 0.0L;
};

/// Per-setting relative frequencies. Settings with no events get p_00 = 1.
inline CellProbabilities relative_frequencies(const EventCounts& d) {
  CellProbabilities::Values v{};
  for (auto s : all_settings) {
    const auto total = d.setting_total(s);
    for (auto o : all_outcomes)
      v[cell(s, o)] = total == 0 ? (o == Outcome::null_null ? 1.0 : 0.0)
                                 : static_cast<double>(d(s, o)) / static_cast<double>(total);
  }
  return CellProbabilities(v);
}

/// True when the observed marginals agree across the other party's settings
/// within `z` binomial standard errors (tolerance shrinks like 1/sqrt(N)).
inline bool counts_consistent_with_no_signaling(const EventCounts& d, double z = 5.0) {
  const auto f = relative_frequencies(d);
  auto agree = [&](double f1, Setting s1, double f2, Setting s2) {
    const double n1 = static_cast<double>(d.setting_total(s1));
    const double n2 = static_cast<double>(d.setting_total(s2));
    if (n1 == 0 || n2 == 0) return true;
    const double se = std::sqrt(f1 * (1 - f1) / n1 + f2 * (1 - f2) / n2);
    return std::abs(f1 - f2) <= z * se + simplex_tolerance;
  };
  using enum Setting;
  return agree(f.alice_plus(ab), ab, f.alice_plus(ab_prime), ab_prime) &&
         agree(f.alice_plus(a_prime_b), a_prime_b, f.alice_plus(a_prime_b_prime), a_prime_b_prime) &&
         agree(f.bob_plus(ab), ab, f.bob_plus(a_prime_b), a_prime_b) &&
         agree(f.bob_plus(ab_prime), ab_prime, f.bob_plus(a_prime_b_prime), a_prime_b_prime);
}

/// Apparatus parameters of one experiment. Angles are stored in radians.
struct ExperimentParams {
  double gamma = 1.0;    // trigger-to-pair probability
  double theta_a = 0.0;  // angle between Alice's settings
  double theta_b = 0.0;  // angle between Bob's settings
  double eta_a = 1.0;
  double eta_b = 1.0;

  static ExperimentParams from_degrees(double gamma, double theta_a_deg, double theta_b_deg,
                                       double eta_a, double eta_b) {
    ExperimentParams p{gamma, theta_a_deg * std::numbers::pi / 180.0,
                       theta_b_deg * std::numbers::pi / 180.0, eta_a, eta_b};
    p.validate();
    return p;
  }

  ExperimentParams with_gamma(double g) const {
    ExperimentParams p = *this;
    p.gamma = g;
    p.validate();
    return p;
  }

  double theta_a_deg() const { return theta_a * 180.0 / std::numbers::pi; }
  double theta_b_deg() const { return theta_b * 180.0 / std::numbers::pi; }

  void validate() const {
    auto check = [](bool ok, const char* what) {
      if (!ok) throw Error(ErrorKind::InvalidArgument, what);
    };
    check(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0,1]");
    check(theta_a > 0.0 && theta_a < std::numbers::pi, "theta_A must lie in (0,180) degrees");
    check(theta_b > 0.0 && theta_b < std::numbers::pi, "theta_B must lie in (0,180) degrees");
    check(eta_a > 0.0 && eta_a <= 1.0, "eta_A must lie in (0,1]");
    check(eta_b > 0.0 && eta_b <= 1.0, "eta_B must lie in (0,1]");
  }

  friend bool operator==(const ExperimentParams&, const ExperimentParams&) = default;
};

/// ln p for cell i; null cells near 1 go through log1p of the click sum.
inline long double log_cell(const CellProbabilities& p, std::size_t i) {
  if (i % 4 == index(Outcome::null_null) && p[i] > 0.5)
    return std::log1p(-static_cast<long double>(p.clicks(static_cast<Setting>(i / 4))));
  return std::log(static_cast<long double>(p[i]));
}

/// Natural-log multinomial likelihood including the N!/4^N combinatorial factor.
/// Returns -infinity when a cell with a positive count has zero probability.
inline double log_likelihood(const EventCounts& d, const CellProbabilities& p) {
  long double sum = d.log_combinatorial();
  for (std::size_t i = 0; i < 16; ++i) {
    const auto n = d[i];
    if (n == 0) continue;
    if (p[i] <= 0.0) return -std::numeric_limits<double>::infinity();
    sum += static_cast<long double>(n) * log_cell(p, i);
  }
  return static_cast<double>(sum);
}

inline double log_likelihood(const EventCounts& d, const ProbabilityVector& p) {
  return log_likelihood(d, p.cells());
}

/// First-order change in log_likelihood when every cell moves by one ulp of 1.
/// Two estimates closer than a few of these are indistinguishable in double.
inline double likelihood_resolution(const EventCounts& d, const CellProbabilities& p) {
  double r = 0.0;
  for (std::size_t i = 0; i < 16; ++i)
    if (d[i] > 0 && p[i] > 0.0) r += static_cast<double>(d[i]) / p[i];
  return std::numeric_limits<double>::epsilon() * r;
}

inline double likelihood_resolution(const EventCounts& d, const ProbabilityVector& p) {
  return likelihood_resolution(d, p.cells());
}

/// Flags the -infinity case of log_likelihood.
inline bool zero_probability_with_count(const EventCounts& d, const CellProbabilities& p) {
  for (std::size_t i = 0; i < 16; ++i)
    if (d[i] > 0 && p[i] <= 0.0) return true;
  return false;
}

inline double to_log10(double natural_log) { return natural_log / std::numbers::ln10; }

}  // namespace bellev

#endif  // BELLEV_PROBABILITY_HPP
