#ifndef BELLEV_EVIDENCE_HPP
#define BELLEV_EVIDENCE_HPP

// Posterior contents of the three regions by likelihood-weighting the prior
// sample, and the in-favor / against verdicts.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "bellev/prior.hpp"
#include "bellev/probability.hpp"
#include "bellev/random.hpp"

namespace bellev {

enum class Verdict { in_favor, against, neutral };

constexpr std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::in_favor: return "in favor";
    case Verdict::against: return "against";
    case Verdict::neutral: return "neutral";
  }
  return "?";
}

struct RegionEvidence {
  Region region = Region::qm_only;
  double prior = 0.0;
  double posterior = 0.0;       // 0 when below_representable
  double log10_posterior = 0.0;
  bool below_representable = false;
  Verdict verdict = Verdict::neutral;
};

struct EvidenceReport {
  std::string dataset;
  ExperimentParams params;
  std::array<RegionEvidence, 3> regions{};
  double max_log_likelihood = 0.0;  // natural log, over the sample
  double effective_sample_size = 0.0;
  std::size_t weighted_points = 0;   // points with relative weight above e^-30
  bool degenerate_weights = false;

  const RegionEvidence& operator[](Region r) const { return regions[static_cast<std::size_t>(r)]; }
  RegionEvidence& operator[](Region r) { return regions[static_cast<std::size_t>(r)]; }
};

struct EvidenceOptions {
  std::size_t degenerate_floor = 10;
  double neutral_band = 0.0;
  unsigned workers = default_workers();
  std::optional<std::size_t> exclude;  // leave this sample point out
};

inline constexpr double representable_floor = 1e-320;

inline Verdict verdict_for(double posterior, double prior, double band = 0.0) {
  if (posterior - prior > band) return Verdict::in_favor;
  if (prior - posterior > band) return Verdict::against;
  return Verdict::neutral;
}

inline std::array<Verdict, 3> verdicts(const EvidenceReport& r, double band = 0.0) {
  std::array<Verdict, 3> v{};
  for (std::size_t i = 0; i < 3; ++i) v[i] = verdict_for(r.regions[i].posterior, r.regions[i].prior, band);
  return v;
}

/// ln p for every cell of every prior point, laid out point-major.
class LogProbabilityTable {
 public:
  explicit LogProbabilityTable(const PriorSample& prior, unsigned workers = default_workers())
      : n_(prior.points.size()), logs_(16 * prior.points.size()), origin_(n_), region_(n_) {
    parallel_for((n_ + 4095) / 4096, workers, [&](std::size_t c) {
      const std::size_t end = std::min(n_, (c + 1) * 4096);
      for (std::size_t i = c * 4096; i < end; ++i) {
        const auto& pt = prior.points[i];
        for (std::size_t k = 0; k < 16; ++k)
          logs_[16 * i + k] = pt.p[k] > 0.0 ? static_cast<double>(log_cell(pt.p.cells(), k))
                                            : -std::numeric_limits<double>::infinity();
        origin_[i] = pt.origin;
        region_[i] = pt.region;
      }
    });
    for (auto o : origin_) ++per_origin_[static_cast<std::size_t>(o)];
  }

  std::size_t size() const { return n_; }
  Origin origin(std::size_t i) const { return origin_[i]; }
  Region region(std::size_t i) const { return region_[i]; }
  std::size_t origin_count(Origin o) const { return per_origin_[static_cast<std::size_t>(o)]; }

  double log_likelihood(std::size_t i, const EventCounts& d) const {
    const double* l = &logs_[16 * i];
    double sum = 0.0;
    for (std::size_t k = 0; k < 16; ++k) {
      const auto n = d[k];
      if (n == 0) continue;
      if (l[k] == -std::numeric_limits<double>::infinity()) return l[k];
      sum += static_cast<double>(n) * l[k];
    }
    return static_cast<double>(d.log_combinatorial()) + sum;
  }

 private:
  std::size_t n_;
  std::vector<double> logs_;
  std::vector<Origin> origin_;
  std::vector<Region> region_;
  std::array<std::size_t, 2> per_origin_{};
};

/// Self-normalized importance sampling with the prior sample as proposal; each
/// point carries prior weight 1/(2 n_origin).  Log-sum-exp is taken per region
/// so that contents far below the double range keep a finite log10 value.
inline EvidenceReport posterior_contents(const LogProbabilityTable& table, const PriorContents& prior,
                                         const EventCounts& d, const EvidenceOptions& opt = {}) {
  EvidenceReport rep;
  for (auto r : all_regions) {
    rep[r].region = r;
    rep[r].prior = prior[r];
  }
  const std::size_t n = table.size();
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "empty prior sample");
  if (d.total() == 0) {
    for (auto r : all_regions) {
      rep[r].posterior = prior[r];
      rep[r].log10_posterior = prior[r] > 0 ? std::log10(prior[r]) : -std::numeric_limits<double>::infinity();
      rep[r].verdict = Verdict::neutral;
    }
    rep.effective_sample_size = static_cast<double>(n);
    rep.weighted_points = n;
    return rep;
  }
  std::vector<double> ll(n), logw(n);
  const bool leave_out = opt.exclude && *opt.exclude < n;
  std::array<std::size_t, 2> per_origin{table.origin_count(Origin::qm_sampler),
                                        table.origin_count(Origin::lhv_sampler)};
  if (leave_out) --per_origin[static_cast<std::size_t>(table.origin(*opt.exclude))];
  const double log_prior[2] = {-std::log(2.0 * static_cast<double>(std::max<std::size_t>(1, per_origin[0]))),
                               -std::log(2.0 * static_cast<double>(std::max<std::size_t>(1, per_origin[1])))};
  parallel_for((n + 8191) / 8192, opt.workers, [&](std::size_t c) {
    const std::size_t end = std::min(n, (c + 1) * 8192);
    for (std::size_t i = c * 8192; i < end; ++i) {
      ll[i] = table.log_likelihood(i, d);
      logw[i] = ll[i] + log_prior[static_cast<std::size_t>(table.origin(i))];
    }
  });
  if (leave_out) ll[*opt.exclude] = logw[*opt.exclude] = -std::numeric_limits<double>::infinity();
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  std::array<double, 3> region_max{neg_inf, neg_inf, neg_inf};
  double ll_max = neg_inf;
  for (std::size_t i = 0; i < n; ++i) {
    auto& m = region_max[static_cast<std::size_t>(table.region(i))];
    m = std::max(m, logw[i]);
    ll_max = std::max(ll_max, ll[i]);
  }
  const double global_max = *std::max_element(region_max.begin(), region_max.end());
  if (global_max == neg_inf)
    throw Error(ErrorKind::ZeroProbabilityWithCount, "every prior point has zero likelihood");
  rep.max_log_likelihood = ll_max;

  // Log of the region sums, each shifted by its own maximum.
  std::array<std::vector<double>, 3> terms;
  std::vector<double> global_terms, global_sq;
  global_terms.reserve(n);
  global_sq.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(table.region(i));
    if (leave_out && i == *opt.exclude) continue;
    if (region_max[r] != neg_inf) terms[r].push_back(std::exp(logw[i] - region_max[r]));
    const double rel = logw[i] - global_max;
    const double w = std::exp(rel);
    global_terms.push_back(w);
    global_sq.push_back(w * w);
    if (rel > -30.0) ++rep.weighted_points;
  }
  std::array<double, 3> log_sum{};
  for (std::size_t r = 0; r < 3; ++r)
    log_sum[r] = region_max[r] == neg_inf ? neg_inf : region_max[r] + std::log(pairwise_sum(terms[r]));
  const double total_max = *std::max_element(log_sum.begin(), log_sum.end());
  double acc = 0.0;
  for (double l : log_sum)
    if (l != neg_inf) acc += std::exp(l - total_max);
  const double log_total = total_max + std::log(acc);

  for (auto r : all_regions) {
    const double lc = log_sum[static_cast<std::size_t>(r)] - log_total;
    auto& e = rep[r];
    e.log10_posterior = lc / std::numbers::ln10;
    const double c = std::exp(lc);
    e.below_representable = !(c >= representable_floor);
    e.posterior = e.below_representable ? 0.0 : std::min(1.0, c);
    e.verdict = verdict_for(e.posterior, e.prior, opt.neutral_band);
  }
  const double sw = pairwise_sum(global_terms), sw2 = pairwise_sum(global_sq);
  rep.effective_sample_size = sw * sw / sw2;
  rep.degenerate_weights = rep.weighted_points < opt.degenerate_floor;
  return rep;
}

inline EvidenceReport posterior_contents(const PriorSample& prior, const EventCounts& d,
                                         const EvidenceOptions& opt = {}) {
  LogProbabilityTable table(prior, opt.workers);
  auto rep = posterior_contents(table, prior.contents, d, opt);
  rep.params = prior.params;
  return rep;
}

/// Every other point of each component (parity 0 or 1), for split-sample checks.
inline PriorSample half_sample(const PriorSample& s, int parity) {
  PriorSample h;
  h.params = s.params;
  h.epsilon = s.epsilon;
  h.seed = s.seed;
  h.per_component = 0;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const std::size_t local = i < s.per_component ? i : i - s.per_component;
    if (static_cast<int>(local % 2) == parity) h.points.push_back(s.points[i]);
  }
  h.per_component = h.points.size() / 2;
  h.contents = detail::count_regions(h.points);
  return h;
}

}  // namespace bellev

#endif  // BELLEV_EVIDENCE_HPP
