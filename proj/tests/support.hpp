#ifndef BELLEV_TESTS_SUPPORT_HPP
#define BELLEV_TESTS_SUPPORT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <vector>
#include <string>

#include "bellev/bellev.hpp"

#ifndef BELLEV_TEST_CACHE
#define BELLEV_TEST_CACHE ""
#endif

namespace support {

/// Prior samples shared by all tests of one binary and, through the on-disk
/// cache, across binaries.
inline const bellev::PriorSample& prior(const bellev::ExperimentParams& p, std::uint64_t n,
                                        std::uint64_t seed = 1) {
  static std::map<std::string, std::unique_ptr<bellev::PriorSample>> memo;
  const auto key = bellev::cache::key_name(p, n, 0.001, seed);
  auto& slot = memo[key];
  if (!slot) slot = std::make_unique<bellev::PriorSample>(bellev::load_or_build_prior(p, n, 0.001, seed, BELLEV_TEST_CACHE));
  return *slot;
}

inline bellev::ExperimentParams boulder(double gamma = 0.000722) {
  return bellev::find_preset("boulder")->with_gamma(gamma);
}

inline double binomial_sd(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

inline bellev::EventCounts counts(std::initializer_list<std::uint64_t> v) {
  bellev::EventCounts::Values a{};
  std::size_t i = 0;
  for (auto x : v) a[i++] = x;
  return bellev::EventCounts(a);
}

/// Chi-square statistic of single-setting probabilities against the
/// Dirichlet(1/2, 1/2, 1/2, 1/2) law. Conditional Beta CDFs map each point to
/// three independent uniforms, binned 4 x 4 x 4.
inline double dirichlet_half_chi_square(const std::vector<std::array<double, 4>>& q) {
  const double pi = std::numbers::pi;
  std::array<double, 64> hist{};
  auto bin = [](double u) { return std::min(3, static_cast<int>(4.0 * u)); };
  for (const auto& x : q) {
    const double r1 = 1.0 - x[0], r2 = r1 - x[1];
    const double u1 = (2.0 / pi) * (std::asin(std::sqrt(x[0])) + std::sqrt(x[0] * r1));
    const double u2 = std::sqrt(std::clamp(x[1] / r1, 0.0, 1.0));
    const double u3 = (2.0 / pi) * std::asin(std::sqrt(std::clamp(x[2] / r2, 0.0, 1.0)));
    hist[16 * bin(u1) + 4 * bin(u2) + bin(u3)] += 1.0;
  }
  const double expected = static_cast<double>(q.size()) / 64.0;
  double chi2 = 0.0;
  for (double h : hist) chi2 += (h - expected) * (h - expected) / expected;
  return chi2;
}

/// Upper 1% point of chi-square with 63 degrees of freedom.
inline constexpr double chi_square_63_one_percent = 92.010;

}  // namespace support

#endif  // BELLEV_TESTS_SUPPORT_HPP
