#ifndef BELLEV_BIAS_CHECK_HPP
#define BELLEV_BIAS_CHECK_HPP

// Prior-bias check: mock-true probabilities from each region, simulated data,
// and a tally of the resulting in-favor verdicts.

#include <algorithm>
#include <array>
#include <numeric>
#include <random>
#include <vector>

#include "bellev/error.hpp"
#include "bellev/evidence.hpp"
#include "bellev/prior.hpp"
#include "bellev/probability.hpp"
#include "bellev/random.hpp"

namespace bellev {

/// N trigger signals with uniformly random settings: sequential conditional
/// binomials over the sixteen (setting, outcome) cells.
inline EventCounts simulate_data(const CellProbabilities& p, std::uint64_t n, Engine& engine) {
  EventCounts::Values c{};
  std::uint64_t left = n;
  double mass = 1.0;
  for (std::size_t k = 0; k < 16 && left > 0; ++k) {
    const double pk = p[k] / 4.0;
    if (k == 15 || pk >= mass) {
      c[k] = left;
      left = 0;
      break;
    }
    const double q = std::clamp(pk / mass, 0.0, 1.0);
    if (q > 0.0) {
      std::binomial_distribution<std::uint64_t> b(left, q);
      c[k] = b(engine);
      left -= c[k];
    }
    mass -= pk;
    if (mass <= 0.0) break;
  }
  if (left > 0) {
    // Rounding left the tail without mass; put the remainder where the probability is.
    std::size_t k = 15;
    while (k > 0 && p[k] <= 0.0) --k;
    c[k] += left;
  }
  return EventCounts(c);
}

struct BiasTally {
  std::size_t mocks_per_region = 0;
  std::uint64_t trigger_signals = 0;
  std::array<std::array<std::uint64_t, 3>, 3> in_favor{};  // [mock region][favored region]
  std::array<std::uint64_t, 3> multi_favor{};              // datasets favoring more than one region
  std::array<std::uint64_t, 3> without_favor{};
  std::array<std::uint64_t, 3> without_against{};
  std::array<bool, 3> with_replacement{};
  std::array<std::size_t, 3> region_points{};

  std::uint64_t row_total(Region r) const {
    const auto& row = in_favor[static_cast<std::size_t>(r)];
    return row[0] + row[1] + row[2];
  }
  double rate(Region mock, Region favored) const {
    return mocks_per_region == 0 ? 0.0
                                 : static_cast<double>(in_favor[static_cast<std::size_t>(mock)]
                                                               [static_cast<std::size_t>(favored)]) /
                                       static_cast<double>(mocks_per_region);
  }
  friend bool operator==(const BiasTally&, const BiasTally&) = default;
};

struct BiasOptions {
  double neutral_band = 0.0;
  unsigned workers = default_workers();
};

/// Mock indices for one region: without replacement when the region holds at
/// least `m` points, with replacement otherwise.
inline std::vector<std::size_t> draw_mocks(const std::vector<std::size_t>& members, std::size_t m, Engine& engine,
                                           bool& replacement) {
  std::vector<std::size_t> out;
  out.reserve(m);
  replacement = members.size() < m;
  if (replacement) {
    std::uniform_int_distribution<std::size_t> u(0, members.size() - 1);
    for (std::size_t i = 0; i < m; ++i) out.push_back(members[u(engine)]);
    return out;
  }
  // Partial Fisher-Yates.
  std::vector<std::size_t> pool = members;
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> u(i, pool.size() - 1);
    std::swap(pool[i], pool[u(engine)]);
    out.push_back(pool[i]);
  }
  return out;
}

/// Mock-true points are split evenly between the two samplers that populate a
/// region (only "both" is reached by both), then drawn per sampler.
inline BiasTally run_bias_check(const PriorSample& prior, std::size_t mocks_per_region, std::uint64_t n,
                                std::uint64_t seed, const BiasOptions& opt = {}) {
  BiasTally t;
  t.mocks_per_region = mocks_per_region;
  t.trigger_signals = n;
  std::array<std::array<std::vector<std::size_t>, 2>, 3> members;
  for (std::size_t i = 0; i < prior.points.size(); ++i)
    members[static_cast<std::size_t>(prior.points[i].region)][static_cast<std::size_t>(prior.points[i].origin)]
        .push_back(i);
  std::array<std::vector<std::size_t>, 3> mocks;
  for (auto r : all_regions) {
    const auto ri = static_cast<std::size_t>(r);
    const auto& m = members[ri];
    t.region_points[ri] = m[0].size() + m[1].size();
    if (mocks_per_region == 0) continue;
    if (t.region_points[ri] == 0)
      throw Error(ErrorKind::InsufficientRegionPoints,
                  "prior sample has no points in region " + std::string(to_string(r)));
    const std::size_t first = m[1].empty() ? mocks_per_region : m[0].empty() ? 0 : (mocks_per_region + 1) / 2;
    const std::array<std::size_t, 2> share{first, mocks_per_region - first};
    for (std::size_t o = 0; o < 2; ++o) {
      if (share[o] == 0) continue;
      Engine e = substream(seed, StreamComponent::bias_mocks, 2 * ri + o);
      bool repl = false;
      const auto drawn = draw_mocks(m[o], share[o], e, repl);
      mocks[ri].insert(mocks[ri].end(), drawn.begin(), drawn.end());
      t.with_replacement[ri] = t.with_replacement[ri] || repl;
    }
  }

  const LogProbabilityTable table(prior, opt.workers);
  const std::size_t total = 3 * mocks_per_region;
  std::vector<std::array<Verdict, 3>> verdict(total);
  parallel_for(total, opt.workers, [&](std::size_t j) {
    const std::size_t ri = j / mocks_per_region;
    const std::size_t point = mocks[ri][j % mocks_per_region];
    Engine e = substream(seed, StreamComponent::bias_data, j);
    const auto d = simulate_data(prior.points[point].p, n, e);
    EvidenceOptions eo;
    eo.workers = 1;
    eo.neutral_band = opt.neutral_band;
    // The mock stands in for a fresh prior draw, so its own sample point is left out.
    eo.exclude = point;
    verdict[j] = verdicts(posterior_contents(table, prior.contents, d, eo), opt.neutral_band);
  });
  for (std::size_t j = 0; j < total; ++j) {
    const std::size_t ri = j / mocks_per_region;
    int favored = 0, against = 0;
    for (std::size_t c = 0; c < 3; ++c) {
      if (verdict[j][c] == Verdict::in_favor) {
        ++t.in_favor[ri][c];
        ++favored;
      }
      if (verdict[j][c] == Verdict::against) ++against;
    }
    if (favored > 1) ++t.multi_favor[ri];
    if (favored == 0) ++t.without_favor[ri];
    if (against == 0) ++t.without_against[ri];
  }
  return t;
}

}  // namespace bellev

#endif  // BELLEV_BIAS_CHECK_HPP
