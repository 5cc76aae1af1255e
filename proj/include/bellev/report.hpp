#ifndef BELLEV_REPORT_HPP
#define BELLEV_REPORT_HPP

// JSON and text renderings of pipeline results, plus execution profiles.

#include <nlohmann/json.hpp>

#include <cstdio>
#include <iomanip>
#include <sstream>
#include <string>

#include "bellev/bias_check.hpp"
#include "bellev/datasets.hpp"
#include "bellev/evidence.hpp"
#include "bellev/mle.hpp"
#include "bellev/prior.hpp"

namespace bellev {

struct Profile {
  std::string name;
  std::uint64_t sample_size = 0;  // per prior component
  std::size_t mocks = 0;          // bias-check mocks per region
};

inline Profile profile_by_name(const std::string& name) {
  if (name == "paper") return {"paper", 1000000, 10000};
  if (name == "ci") return {"ci", 100000, 200};
  throw Error(ErrorKind::InvalidArgument, "unknown profile '" + name + "' (paper or ci)");
}

inline std::string format_g(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline std::string format_f(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline nlohmann::json cells_to_json(const CellProbabilities& p) {
  nlohmann::json j = nlohmann::json::object();
  for (auto s : all_settings) {
    nlohmann::json row = nlohmann::json::object();
    for (auto o : all_outcomes) row[std::string(to_string(o))] = p(s, o);
    j[std::string(to_string(s))] = row;
  }
  return j;
}

inline nlohmann::json counts_to_json(const EventCounts& d) {
  nlohmann::json j = nlohmann::json::object();
  for (auto s : all_settings) {
    nlohmann::json row = nlohmann::json::object();
    for (auto o : all_outcomes) row[std::string(to_string(o))] = d(s, o);
    j[std::string(to_string(s))] = row;
  }
  j["total"] = d.total();
  return j;
}

inline nlohmann::json interval_to_json(const ContentInterval& c) {
  return {{"mle", c.mle},
          {"variance", c.variance},
          {"one_sigma", {c.one_sigma.lo, c.one_sigma.hi}},
          {"plausible", {c.plausible.lo, c.plausible.hi}}};
}

inline nlohmann::json prior_to_json(const PriorSample& s) {
  const auto& c = s.contents;
  const auto a = content_intervals(c.n1, c.n2);
  const auto b = content_intervals(c.n3, c.n4);
  return {{"params", params_to_json(s.params)},
          {"per_component", s.per_component},
          {"epsilon", s.epsilon},
          {"seed", s.seed},
          {"counts", {{"n1", c.n1}, {"n2", c.n2}, {"n3", c.n3}, {"n4", c.n4}}},
          {"contents", {{"QM only", c.qm_only}, {"both", c.both}, {"LHV only", c.lhv_only}}},
          {"qm_only_fraction", interval_to_json(a)},
          {"lhv_only_fraction", interval_to_json(b)},
          {"S_QM_only_bounds",
           {{"one_sigma", {a.one_sigma.lo / 2, a.one_sigma.hi / 2}},
            {"plausible", {a.plausible.lo / 2, a.plausible.hi / 2}}}},
          {"S_LHV_only_bounds",
           {{"one_sigma", {b.one_sigma.lo / 2, b.one_sigma.hi / 2}},
            {"plausible", {b.plausible.lo / 2, b.plausible.hi / 2}}}},
          {"lhv_draws",
           {{"candidates", s.lhv_stats.candidates}, {"accepted", s.lhv_stats.accepted}, {"rejected_null_event", s.lhv_stats.rejected_null_event}}}};
}

inline std::string prior_table(const PriorSample& s) {
  std::ostringstream os;
  const auto& c = s.contents;
  os << "prior sample: " << s.per_component << " per component, epsilon " << format_g(s.epsilon) << ", seed "
     << s.seed << "\n";
  os << "  n1 (QM only) " << c.n1 << "  n2 (both) " << c.n2 << "  n3 (LHV only) " << c.n3 << "  n4 (both) "
     << c.n4 << "\n";
  const auto a = content_intervals(c.n1, c.n2);
  const auto b = content_intervals(c.n3, c.n4);
  os << "  S(QM only)  " << format_f(c.qm_only, 6) << "  plausible (" << format_f(a.plausible.lo / 2, 6) << ", "
     << format_f(a.plausible.hi / 2, 6) << ")\n";
  os << "  S(both)     " << format_f(c.both, 6) << "\n";
  os << "  S(LHV only) " << format_f(c.lhv_only, 6) << "  plausible (" << format_f(b.plausible.lo / 2, 6) << ", "
     << format_f(b.plausible.hi / 2, 6) << ")\n";
  return os.str();
}

inline std::string content_string(const RegionEvidence& e) {
  if (e.below_representable) return "0 (log10 " + format_f(e.log10_posterior, 2) + ")";
  if (e.posterior >= 1e-6) return format_f(e.posterior, 6);
  return format_g(e.posterior, 3);
}

inline nlohmann::json evidence_to_json(const EvidenceReport& r) {
  nlohmann::json regions = nlohmann::json::array();
  for (const auto& e : r.regions) {
    nlohmann::json j{{"region", std::string(to_string(e.region))},
                     {"prior", e.prior},
                     {"log10_posterior", e.log10_posterior},
                     {"below_representable", e.below_representable},
                     {"verdict", std::string(to_string(e.verdict))}};
    if (!e.below_representable) j["posterior"] = e.posterior;
    regions.push_back(j);
  }
  return {{"dataset", r.dataset},
          {"params", params_to_json(r.params)},
          {"regions", regions},
          {"max_log10_likelihood", to_log10(r.max_log_likelihood)},
          {"effective_sample_size", r.effective_sample_size},
          {"weighted_points", r.weighted_points},
          {"degenerate_weights", r.degenerate_weights}};
}

inline std::string evidence_table(const EvidenceReport& r) {
  std::ostringstream os;
  os << "evidence for " << r.dataset << " at gamma = " << format_g(r.params.gamma) << "\n";
  os << std::left << std::setw(10) << "  region" << std::setw(12) << "prior" << std::setw(26) << "posterior"
     << "verdict\n";
  for (const auto& e : r.regions)
    os << "  " << std::left << std::setw(10) << to_string(e.region) << std::setw(12) << format_f(e.prior, 4)
       << std::setw(26) << content_string(e) << to_string(e.verdict) << "\n";
  os << "  effective sample size " << format_g(r.effective_sample_size, 4);
  if (r.degenerate_weights) os << " (only " << r.weighted_points << " points carry weight)";
  os << "\n";
  return os.str();
}

inline nlohmann::json mle_to_json(const MleResult& m) {
  return {{"log10_likelihood", m.log10_likelihood()},
          {"log_likelihood", m.log_likelihood},
          {"probabilities", cells_to_json(m.p.cells())},
          {"bell_violation", bell_violation(m.p.cells())},
          {"iterations", m.diagnostics.iterations},
          {"gradient_norm", m.diagnostics.gradient_norm},
          {"duality_gap", m.diagnostics.duality_gap},
          {"start_spread", m.diagnostics.start_spread}};
}

/// Probabilities of the ++, +0, 0+ cells scaled by 1e6, one column per estimate.
inline std::string probability_table(const std::vector<std::pair<std::string, CellProbabilities>>& cols) {
  std::ostringstream os;
  os << "  10^6 x p     ";
  for (const auto& c : cols) os << std::right << std::setw(12) << c.first;
  os << "\n";
  for (auto s : all_settings)
    for (auto o : {Outcome::plus_plus, Outcome::plus_null, Outcome::null_plus}) {
      os << "  " << std::left << std::setw(5) << to_string(s) << std::setw(7) << to_string(o);
      for (const auto& c : cols) os << std::right << std::setw(12) << format_f(1e6 * c.second(s, o), 2);
      os << "\n";
    }
  return os.str();
}

inline nlohmann::json scan_point_to_json(const GammaScanPoint& p) {
  return {{"gamma", p.gamma},
          {"log10_L_qm", to_log10(p.qm_log_likelihood)},
          {"log10_L_lhv", to_log10(p.lhv_log_likelihood)},
          {"eberhard_violated", p.eberhard_violated},
          {"phi_b", p.phi_target_qm}};
}

inline std::string scan_csv(const std::vector<GammaScanPoint>& scan) {
  std::ostringstream os;
  os << "gamma,log10_L_qm,log10_L_lhv,eberhard_violated,phi_b\n";
  for (const auto& p : scan)
    os << format_g(p.gamma, 10) << ',' << format_f(to_log10(p.qm_log_likelihood), 6) << ','
       << format_f(to_log10(p.lhv_log_likelihood), 6) << ',' << (p.eberhard_violated ? 1 : 0) << ','
       << format_f(p.phi_target_qm, 6) << "\n";
  return os.str();
}

inline nlohmann::json tally_to_json(const BiasTally& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (auto r : all_regions) {
    const auto i = static_cast<std::size_t>(r);
    nlohmann::json favor = nlohmann::json::object();
    for (auto c : all_regions) favor[std::string(to_string(c))] = t.in_favor[i][static_cast<std::size_t>(c)];
    rows.push_back({{"mock_region", std::string(to_string(r))},
                    {"in_favor", favor},
                    {"multi_favor", t.multi_favor[i]},
                    {"without_favor", t.without_favor[i]},
                    {"without_against", t.without_against[i]},
                    {"with_replacement", t.with_replacement[i]},
                    {"region_points", t.region_points[i]}});
  }
  return {{"mocks_per_region", t.mocks_per_region}, {"trigger_signals", t.trigger_signals}, {"rows", rows}};
}

inline std::string tally_table(const BiasTally& t) {
  std::ostringstream os;
  os << "bias check: " << t.mocks_per_region << " mocks per region, N = " << t.trigger_signals << "\n";
  os << "  mock region   in favor of:  QM only      both  LHV only   multi\n";
  for (auto r : all_regions) {
    const auto i = static_cast<std::size_t>(r);
    os << "  " << std::left << std::setw(26) << to_string(r) << std::right;
    for (std::size_t c = 0; c < 3; ++c) os << std::setw(c == 0 ? 9 : 10) << t.in_favor[i][c];
    os << std::setw(8) << t.multi_favor[i];
    if (t.with_replacement[i]) os << "  (drawn with replacement)";
    os << "\n";
  }
  return os.str();
}

}  // namespace bellev

#endif  // BELLEV_REPORT_HPP
