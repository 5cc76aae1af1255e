#ifndef BELLEV_DATASETS_HPP
#define BELLEV_DATASETS_HPP

// Bundled event counts, experiment presets, counts files and JSON parameter files.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bellev/error.hpp"
#include "bellev/probability.hpp"
#include "bellev/quantum.hpp"

namespace bellev {

struct Preset {
  std::string name;
  ExperimentParams params;
};

inline const std::vector<Preset>& presets() {
  static const std::vector<Preset> p{
      {"delft", ExperimentParams::from_degrees(1.0, 90.0, 80.6, 0.971, 0.963)},
      {"vienna", ExperimentParams::from_degrees(0.0035, 64.0, 64.0, 0.786, 0.762)},
      {"boulder", ExperimentParams::from_degrees(0.0005, 60.2, 60.2, 0.747, 0.756)},
      {"munich", ExperimentParams::from_degrees(1.0, 90.0, 90.0, 0.975, 0.975)},
  };
  return p;
}

inline std::optional<ExperimentParams> find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return p.params;
  return std::nullopt;
}

struct DatasetBundle {
  std::string name;        // e.g. "boulder-5"
  std::string experiment;  // preset name, empty for files
  std::string run;
  EventCounts counts;
  std::optional<std::uint64_t> declared_total;
  std::optional<double> best_gamma;
  std::optional<TargetCriterion> target;

  std::optional<ExperimentParams> params() const {
    auto p = find_preset(experiment);
    if (p && best_gamma) p = p->with_gamma(*best_gamma);
    return p;
  }
};

namespace detail {

inline EventCounts rows(std::array<std::array<std::uint64_t, 4>, 4> r) {
  EventCounts::Values v{};
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t o = 0; o < 4; ++o) v[4 * s + o] = r[s][o];
  return EventCounts(v);
}

inline DatasetBundle bundle(std::string name, std::string experiment, std::string run, EventCounts counts,
                            std::uint64_t total, std::optional<double> gamma, std::optional<TargetCriterion> target) {
  return {std::move(name), std::move(experiment), std::move(run), counts, total, gamma, target};
}

}  // namespace detail

inline const std::vector<DatasetBundle>& bundled_datasets() {
  static const std::vector<DatasetBundle> all = [] {
    using detail::bundle;
    using detail::rows;
    const auto boulder = TargetCriterion::threshold(0.75, 10.85 * std::numbers::pi / 180.0);
    const auto vienna = TargetCriterion::threshold();
    const auto delft = TargetCriterion::max_violation(Setting::a_prime_b_prime, 1.0);
    const auto munich1 = TargetCriterion::max_violation(Setting::a_prime_b_prime, -1.0);
    const auto munich2 = TargetCriterion::max_violation(Setting::a_prime_b, -1.0);
    const auto d1 = rows({{{23, 3, 4, 23}, {33, 11, 5, 30}, {22, 10, 6, 24}, {4, 20, 21, 6}}});
    const auto d2 = rows({{{21, 7, 3, 21}, {25, 2, 4, 23}, {19, 11, 6, 23}, {5, 24, 23, 11}}});
    std::vector<DatasetBundle> v;
    v.push_back(bundle("boulder-1", "boulder", "1", rows({{{1257, 629, 600, 43917556},
                                                           {1417, 554, 4549, 43908718},
                                                           {1281, 4341, 554, 43899021},
                                                           {11, 5640, 6030, 43894942}}}),
                       175647100, 0.000722, boulder));
    v.push_back(bundle("boulder-3", "boulder", "3", rows({{{3800, 1936, 1812, 131804979},
                                                           {4091, 1682, 13781, 131777583},
                                                           {3853, 12840, 1669, 131749135},
                                                           {60, 16614, 17934, 131752503}}}),
                       527164272, 0.000722, boulder));
    v.push_back(bundle("boulder-5", "boulder", "5", rows({{{6378, 3289, 3147, 221732456},
                                                           {6794, 2825, 23230, 221686486},
                                                           {6486, 21358, 2818, 221635498},
                                                           {106, 27562, 30000, 221603322}}}),
                       886791755, 0.000722, boulder));
    v.push_back(bundle("boulder-7", "boulder", "7", rows({{{8820, 4640, 4433, 311074665},
                                                           {9512, 3963, 32709, 310997997},
                                                           {9237, 30040, 4037, 310933331},
                                                           {159, 38632, 42034, 311010823}}}),
                       1244205032, 0.000722, boulder));
    v.push_back(bundle("vienna-6", "vienna", "6", rows({{{159976, 83743, 86270, 960597110},
                                                         {166265, 78407, 370252, 960099455},
                                                         {179813, 482787, 66435, 960381485},
                                                         {9354, 655290, 525368, 959756526}}}),
                       3843698536, 0.00296, vienna));
    v.push_back(bundle("vienna-7", "vienna", "7", rows({{{141439, 73391, 76224, 875392736},
                                                         {146831, 67941, 326768, 874976534},
                                                         {158338, 425067, 58742, 875239860},
                                                         {8392, 576445, 463985, 874651457}}}),
                       3502784150, 0.00287, vienna));
    v.push_back(bundle("vienna-8", "vienna", "8", rows({{{377000, 192092, 202207, 2497825793},
                                                         {387481, 182789, 858681, 2496663605},
                                                         {422674, 1119219, 156022, 2497626620},
                                                         {22502, 1519578, 1223007, 2495916922}}}),
                       9994696192, 0.00264, vienna));
    v.push_back(bundle("delft-1", "delft", "1", d1, 245, std::nullopt, delft));
    v.push_back(bundle("delft-2", "delft", "2", d2, 228, std::nullopt, delft));
    v.push_back(bundle("delft-1+2", "delft", "1+2", d1 + d2, 473, std::nullopt, delft));
    v.push_back(bundle("munich-1", "munich", "1", rows({{{778, 2621, 2770, 804},
                                                         {809, 2629, 2708, 816},
                                                         {873, 2686, 2644, 730},
                                                         {2696, 966, 902, 2453}}}),
                       27885, std::nullopt, munich1));
    v.push_back(bundle("munich-2", "munich", "2", rows({{{817, 2596, 2873, 742},
                                                         {696, 2570, 2788, 772},
                                                         {2783, 787, 840, 2503},
                                                         {865, 2620, 2640, 791}}}),
                       27683, std::nullopt, munich2));
    return v;
  }();
  return all;
}

/// Counts file: optional "#" comments, an optional header row starting with
/// "setting", four rows "<setting> n++ n+0 n0+ n00" with settings ab, ab',
/// a'b, a'b', and an optional "total <N>" line.
inline DatasetBundle parse_counts(std::istream& in, const std::string& name = "file") {
  EventCounts::Values v{};
  std::array<bool, 4> seen{};
  std::optional<std::uint64_t> total;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::ParseError, name + ":" + std::to_string(lineno) + ": " + what);
  };
  auto number = [&](const std::string& tok) -> std::uint64_t {
    if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); }))
      fail("expected a non-negative integer, got '" + tok + "'");
    try {
      return std::stoull(tok);
    } catch (const std::out_of_range&) {
      fail("count out of range: " + tok);
    }
    return 0;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok[0] == "setting" || tok[0] == "S") continue;
    if (tok[0] == "total") {
      if (tok.size() != 2) fail("expected 'total <N>'");
      if (total) fail("duplicate total line");
      total = number(tok[1]);
      continue;
    }
    std::optional<Setting> s;
    for (auto x : all_settings)
      if (tok[0] == to_string(x)) s = x;
    if (!s) fail("unknown setting '" + tok[0] + "'");
    if (tok.size() != 5) fail("expected four counts after the setting");
    if (seen[index(*s)]) fail("duplicate row for setting " + tok[0]);
    seen[index(*s)] = true;
    for (auto o : all_outcomes) v[cell(*s, o)] = number(tok[1 + index(o)]);
  }
  for (auto x : all_settings)
    if (!seen[index(x)]) throw Error(ErrorKind::ParseError, name + ": missing row for setting " + std::string(to_string(x)));
  DatasetBundle b;
  b.name = name;
  b.counts = EventCounts(v);
  b.declared_total = total;
  if (total && *total != b.counts.total())
    throw Error(ErrorKind::TotalMismatch, name + ": declared total " + std::to_string(*total) +
                                              " but the counts sum to " + std::to_string(b.counts.total()));
  return b;
}

inline void write_counts(std::ostream& out, const EventCounts& d) {
  out << "setting n++ n+0 n0+ n00\n";
  for (auto s : all_settings) {
    out << to_string(s);
    for (auto o : all_outcomes) out << ' ' << d[cell(s, o)];
    out << '\n';
  }
  out << "total " << d.total() << '\n';
}

/// A bundled id or a path to a counts file.
inline DatasetBundle load_dataset(const std::string& name_or_path) {
  for (const auto& b : bundled_datasets())
    if (b.name == name_or_path) {
      if (b.declared_total && *b.declared_total != b.counts.total())
        throw Error(ErrorKind::TotalMismatch, "bundled dataset " + b.name + " does not sum to its total");
      return b;
    }
  std::ifstream in(name_or_path);
  if (!in) throw Error(ErrorKind::IoError, "no bundled dataset or readable file named '" + name_or_path + "'");
  return parse_counts(in, name_or_path);
}

inline ExperimentParams params_from_json(const nlohmann::json& j) {
  try {
    ExperimentParams base;
    if (j.contains("preset")) {
      const auto p = find_preset(j.at("preset").get<std::string>());
      if (!p) throw Error(ErrorKind::ParseError, "unknown preset " + j.at("preset").get<std::string>());
      base = *p;
    } else {
      for (const char* key : {"gamma", "theta_A_deg", "theta_B_deg", "eta_A", "eta_B"})
        if (!j.contains(key)) throw Error(ErrorKind::ParseError, std::string("params missing field ") + key);
    }
    const double g = j.value("gamma", base.gamma);
    const double ta = j.value("theta_A_deg", base.theta_a_deg());
    const double tb = j.value("theta_B_deg", base.theta_b_deg());
    const double ea = j.value("eta_A", base.eta_a);
    const double eb = j.value("eta_B", base.eta_b);
    return ExperimentParams::from_degrees(g, ta, tb, ea, eb);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("params: ") + e.what());
  }
}

inline nlohmann::json params_to_json(const ExperimentParams& p) {
  return {{"gamma", p.gamma}, {"theta_A_deg", p.theta_a_deg()}, {"theta_B_deg", p.theta_b_deg()},
          {"eta_A", p.eta_a}, {"eta_B", p.eta_b}};
}

/// A preset name, a bundled dataset id (its preset with the best gamma), or a JSON file.
inline ExperimentParams load_params(const std::string& name_or_path) {
  if (auto p = find_preset(name_or_path)) return *p;
  for (const auto& b : bundled_datasets())
    if (b.name == name_or_path) return *b.params();
  std::ifstream in(name_or_path);
  if (!in) throw Error(ErrorKind::IoError, "no preset or readable params file named '" + name_or_path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, name_or_path + ": " + e.what());
  }
  return params_from_json(j);
}

}  // namespace bellev

#endif  // BELLEV_DATASETS_HPP
