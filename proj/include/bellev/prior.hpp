#ifndef BELLEV_PRIOR_HPP
#define BELLEV_PRIOR_HPP

// The two-component prior sample, region labels, prior contents and the
// sampling-error intervals of the contents.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "bellev/error.hpp"
#include "bellev/lhv.hpp"
#include "bellev/probability.hpp"
#include "bellev/quantum.hpp"
#include "bellev/random.hpp"

namespace bellev {

inline constexpr const char* code_version = "bellev-1.0.0";

enum class Origin : std::uint8_t { qm_sampler = 0, lhv_sampler = 1 };
enum class Region : std::uint8_t { qm_only = 0, both = 1, lhv_only = 2 };

inline constexpr std::array<Region, 3> all_regions{Region::qm_only, Region::both, Region::lhv_only};

constexpr std::string_view to_string(Region r) {
  switch (r) {
    case Region::qm_only: return "QM only";
    case Region::both: return "both";
    case Region::lhv_only: return "LHV only";
  }
  return "?";
}

constexpr std::string_view to_string(Origin o) { return o == Origin::qm_sampler ? "QM" : "LHV"; }

struct LabeledSample {
  ProbabilityVector p;
  Origin origin;
  Region region;
  ReducedProbabilities reduced;  // the stored form; p = reconstruct_full(reduced)

  static LabeledSample make(const ReducedProbabilities& r, Origin o, Region g) {
    return {reconstruct_full(r), o, g, r};
  }
};

struct PriorContents {
  std::uint64_t n1 = 0, n2 = 0;  // QM subsample: QM only, both
  std::uint64_t n3 = 0, n4 = 0;  // LHV subsample: LHV only, both
  double qm_only = 0.0, both = 0.0, lhv_only = 0.0;

  static PriorContents from_counts(std::uint64_t n1, std::uint64_t n2, std::uint64_t n3,
                                   std::uint64_t n4) {
    if (n1 + n2 == 0 || n3 + n4 == 0)
      throw Error(ErrorKind::InvalidArgument, "empty prior subsample");
    PriorContents c{n1, n2, n3, n4};
    const double a = static_cast<double>(n1) / static_cast<double>(n1 + n2);
    const double b = static_cast<double>(n3) / static_cast<double>(n3 + n4);
    c.qm_only = 0.5 * a;
    c.lhv_only = 0.5 * b;
    c.both = 0.5 * ((1.0 - a) + (1.0 - b));
    return c;
  }

  double operator[](Region r) const {
    return r == Region::qm_only ? qm_only : r == Region::both ? both : lhv_only;
  }
};

struct Interval {
  double lo = 0.0, hi = 0.0;
};

struct ContentInterval {
  double mle = 0.0;
  double variance = 0.0;
  Interval one_sigma;
  Interval plausible;
};

/// Binomial sampling error of a fraction n1 / (n1 + n2).
inline ContentInterval content_intervals(std::uint64_t n1, std::uint64_t n2) {
  const std::uint64_t n = n1 + n2;
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "n1 + n2 must be positive");
  const long double ln = n, l1 = n1, l2 = n2;
  ContentInterval r;
  r.mle = static_cast<double>(l1 / ln);
  r.variance = static_cast<double>(l1 * l2 / (ln * ln * ln));
  const double sd = std::sqrt(r.variance);
  r.one_sigma = {r.mle - sd, r.mle + sd};
  // log of C(n,n1) a^n1 (1-a)^n2 (n+1); the plausible set is where this is >= 0.
  const long double lconst = std::lgamma(ln + 1) - std::lgamma(l1 + 1) - std::lgamma(l2 + 1) +
                             std::log(ln + 1);
  auto g = [&](long double a) {
    long double v = lconst;
    if (n1 > 0) v += l1 * std::log(a);
    if (n2 > 0) v += l2 * std::log1p(-a);
    return v;
  };
  auto bisect = [&](long double inside, long double outside) {
    while (std::abs(outside - inside) > 1e-13L) {
      const long double mid = 0.5L * (inside + outside);
      (g(mid) >= 0 ? inside : outside) = mid;
    }
    return static_cast<double>(0.5L * (inside + outside));
  };
  const long double mode = l1 / ln;
  r.plausible.lo = n1 == 0 ? 0.0 : bisect(mode, 0.0L);
  r.plausible.hi = n2 == 0 ? 1.0 : bisect(mode, 1.0L);
  return r;
}

struct PriorSample {
  ExperimentParams params;
  double epsilon = 0.001;
  std::uint64_t seed = 0;
  std::uint64_t per_component = 0;
  std::vector<LabeledSample> points;
  PriorContents contents;
  LhvDrawStats lhv_stats;
};

namespace detail {

inline std::string describe_point(const CellProbabilities& p) {
  std::ostringstream os;
  os.precision(17);
  os << "[";
  for (std::size_t i = 0; i < 16; ++i) os << (i ? ", " : "") << p[i];
  os << "]";
  return os.str();
}

template <class Fn>
auto classify_or_report(const ProbabilityVector& p, Fn&& fn) {
  try {
    return fn(p);
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(e.what()) + " at point " + describe_point(p));
  }
}

inline constexpr std::size_t prior_chunk = 2048;

inline PriorContents count_regions(const std::vector<LabeledSample>& pts) {
  std::uint64_t n[4] = {0, 0, 0, 0};
  for (const auto& s : pts) {
    if (s.origin == Origin::qm_sampler)
      ++n[s.region == Region::qm_only ? 0 : 1];
    else
      ++n[s.region == Region::lhv_only ? 2 : 3];
  }
  return PriorContents::from_counts(n[0], n[1], n[2], n[3]);
}

}  // namespace detail

/// Draws n points from each sampler and labels every point by region.
/// Deterministic in (params, n, epsilon, seed) for any worker count.
inline PriorSample build_prior(const ExperimentParams& params, std::uint64_t n_per_component,
                               double epsilon, std::uint64_t seed, unsigned workers = default_workers()) {
  if (n_per_component == 0) throw Error(ErrorKind::InvalidArgument, "empty prior sample");
  if (!(epsilon >= 0.0 && epsilon < 1.0 / 3.0))
    throw Error(ErrorKind::InvalidArgument, "epsilon must lie in [0,1/3)");
  params.validate();
  const std::size_t n = n_per_component;
  std::vector<std::optional<LabeledSample>> slots(2 * n);
  const std::size_t chunks = (n + detail::prior_chunk - 1) / detail::prior_chunk;
  std::vector<LhvDrawStats> stats(chunks);
  parallel_for(2 * chunks, workers, [&](std::size_t job) {
    const bool qm = job < chunks;
    const std::size_t c = qm ? job : job - chunks;
    Engine engine = substream(seed, qm ? StreamComponent::qm_prior : StreamComponent::lhv_prior, c);
    const std::size_t begin = c * detail::prior_chunk, end = std::min(n, begin + detail::prior_chunk);
    // Points are kept as reconstructions of their reduced form so that a cache
    // round trip reproduces them bit for bit.
    for (std::size_t i = begin; i < end; ++i) {
      if (qm) {
        const auto r = qm_draw(params, epsilon, engine).reduced();
        const ProbabilityVector p = reconstruct_full(r);
        const bool local = detail::classify_or_report(
            p, [&](const ProbabilityVector& x) { return lhv_membership(x, params); });
        slots[i] = LabeledSample{p, Origin::qm_sampler, local ? Region::both : Region::qm_only, r};
      } else {
        const auto r = lhv_draw(params, epsilon, engine, stats[c]).reduced();
        const ProbabilityVector p = reconstruct_full(r);
        const bool quantum = detail::classify_or_report(
            p, [&](const ProbabilityVector& x) { return is_qm_member(x, params); });
        slots[n + i] = LabeledSample{p, Origin::lhv_sampler, quantum ? Region::both : Region::lhv_only, r};
      }
    }
  });
  PriorSample out;
  out.params = params;
  out.epsilon = epsilon;
  out.seed = seed;
  out.per_component = n;
  out.points.reserve(2 * n);
  for (auto& s : slots) out.points.push_back(std::move(*s));
  for (const auto& s : stats) out.lhv_stats += s;
  out.contents = detail::count_regions(out.points);
  return out;
}

/// Prior contents of the first `n` points of each component (a seed-prefix subsample).
inline PriorContents prefix_contents(const PriorSample& s, std::uint64_t n) {
  if (n == 0 || n > s.per_component) throw Error(ErrorKind::InvalidArgument, "bad prefix size");
  std::vector<LabeledSample> sub;
  sub.reserve(2 * n);
  for (std::uint64_t i = 0; i < n; ++i) sub.push_back(s.points[i]);
  for (std::uint64_t i = 0; i < n; ++i) sub.push_back(s.points[s.per_component + i]);
  return detail::count_regions(sub);
}

// Binary cache: header, then one fixed-width record per point
// (8 reduced probabilities as doubles, origin byte, region byte).

namespace cache {

inline constexpr char magic[8] = {'B', 'E', 'L', 'L', 'E', 'V', 'P', 'S'};
inline constexpr std::uint32_t format_version = 1;

struct Header {
  char magic[8];
  std::uint32_t version;
  std::uint32_t reserved;
  double gamma, theta_a, theta_b, eta_a, eta_b;
  double epsilon;
  std::uint64_t seed;
  std::uint64_t per_component;
  char code[32];
  std::uint64_t lhv_stats[6];
};

inline std::string key_name(const ExperimentParams& p, std::uint64_t n, double eps, std::uint64_t seed) {
  std::ostringstream os;
  os.precision(10);
  os << "prior_g" << p.gamma << "_ta" << p.theta_a_deg() << "_tb" << p.theta_b_deg() << "_ea"
     << p.eta_a << "_eb" << p.eta_b << "_n" << n << "_e" << eps << "_s" << seed << ".bin";
  return os.str();
}

inline void write(const PriorSample& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
  Header h{};
  std::memcpy(h.magic, magic, 8);
  h.version = format_version;
  h.gamma = s.params.gamma;
  h.theta_a = s.params.theta_a;
  h.theta_b = s.params.theta_b;
  h.eta_a = s.params.eta_a;
  h.eta_b = s.params.eta_b;
  h.epsilon = s.epsilon;
  h.seed = s.seed;
  h.per_component = s.per_component;
  std::strncpy(h.code, code_version, sizeof h.code - 1);
  const auto& st = s.lhv_stats;
  const std::uint64_t stats[6] = {st.candidates, st.accepted, st.rejected_coincidence,
                                  st.rejected_null_event, st.rejected_alice_single, st.rejected_bob_single};
  std::memcpy(h.lhv_stats, stats, sizeof stats);
  out.write(reinterpret_cast<const char*>(&h), sizeof h);
  for (const auto& pt : s.points) {
    const auto& r = pt.reduced;
    double v[8];
    for (std::size_t i = 0; i < 8; ++i) v[i] = r[i];
    out.write(reinterpret_cast<const char*>(v), sizeof v);
    const char tags[2] = {static_cast<char>(pt.origin), static_cast<char>(pt.region)};
    out.write(tags, 2);
  }
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path);
}

/// Reads a cache; returns nullopt when the file is absent or keyed differently.
inline std::optional<PriorSample> read(const std::string& path, const ExperimentParams& params,
                                       std::uint64_t n, double eps, std::uint64_t seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  Header h{};
  in.read(reinterpret_cast<char*>(&h), sizeof h);
  if (!in || std::memcmp(h.magic, magic, 8) != 0) throw Error(ErrorKind::IoError, "not a prior cache: " + path);
  if (h.version != format_version || std::strncmp(h.code, code_version, sizeof h.code) != 0 ||
      h.gamma != params.gamma || h.theta_a != params.theta_a || h.theta_b != params.theta_b ||
      h.eta_a != params.eta_a || h.eta_b != params.eta_b || h.epsilon != eps || h.seed != seed ||
      h.per_component != n)
    return std::nullopt;
  PriorSample s;
  s.params = params;
  s.epsilon = eps;
  s.seed = seed;
  s.per_component = n;
  s.lhv_stats = {h.lhv_stats[0], h.lhv_stats[1], h.lhv_stats[2],
                 h.lhv_stats[3], h.lhv_stats[4], h.lhv_stats[5]};
  s.points.reserve(2 * n);
  for (std::uint64_t i = 0; i < 2 * n; ++i) {
    double v[8];
    char tags[2];
    in.read(reinterpret_cast<char*>(v), sizeof v);
    in.read(tags, 2);
    if (!in) throw Error(ErrorKind::IoError, "truncated prior cache: " + path);
    ReducedProbabilities r;
    for (std::size_t k = 0; k < 8; ++k) r[k] = v[k];
    s.points.push_back(LabeledSample::make(r, static_cast<Origin>(tags[0]), static_cast<Region>(tags[1])));
  }
  s.contents = detail::count_regions(s.points);
  return s;
}

}  // namespace cache

/// build_prior with an on-disk cache in `dir` (empty dir disables caching).
inline PriorSample load_or_build_prior(const ExperimentParams& params, std::uint64_t n, double eps,
                                       std::uint64_t seed, const std::string& dir,
                                       unsigned workers = default_workers()) {
  if (dir.empty()) return build_prior(params, n, eps, seed, workers);
  const std::string path = dir + "/" + cache::key_name(params, n, eps, seed);
  if (auto s = cache::read(path, params, n, eps, seed)) return std::move(*s);
  PriorSample s = build_prior(params, n, eps, seed, workers);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  // Written aside and renamed so a concurrent reader never sees a partial file.
  const std::string tmp = path + ".tmp" + std::to_string(::getpid());
  cache::write(s, tmp);
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot move " + tmp + " to " + path + ": " + ec.message());
  return s;
}

}  // namespace bellev

#endif  // BELLEV_PRIOR_HPP
