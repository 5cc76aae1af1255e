// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--property-tests PATH] [--known-red N,...] [--only N,...]
//
// Exits 0 when the failing criteria are exactly the --known-red set, so a
// documented shortfall stays visible without hiding new regressions.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>

#include "bellev/bellev.hpp"

#ifndef BELLEV_TEST_CACHE
#define BELLEV_TEST_CACHE ""
#endif

using namespace bellev;

namespace {

class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      failures_ << (failures_.tellp() > 0 ? "; " : "") << what;
    }
  }
  void near(double value, double expected, double tol, const std::string& what) {
    std::ostringstream s;
    s << std::setprecision(6) << what << " = " << value << " (expected " << expected << " +- " << tol << ")";
    expect(std::abs(value - expected) <= tol, s.str());
  }
  void note(const std::string& s) { notes_ << (notes_.tellp() > 0 ? "; " : "") << s; }
  bool pass() const { return pass_; }
  std::string failures() const { return failures_.str(); }
  std::string notes() const { return notes_.str(); }

 private:
  bool pass_ = true;
  std::ostringstream failures_, notes_;
};

std::string fmt(double x, int digits = 6) {
  std::ostringstream s;
  s << std::setprecision(digits) << x;
  return s.str();
}

const PriorSample& prior(const ExperimentParams& p, std::uint64_t n) {
  static std::map<std::string, std::unique_ptr<PriorSample>> memo;
  auto& slot = memo[cache::key_name(p, n, 0.001, 1)];
  if (!slot) slot = std::make_unique<PriorSample>(load_or_build_prior(p, n, 0.001, 1, BELLEV_TEST_CACHE));
  return *slot;
}

ExperimentParams boulder(double gamma) { return find_preset("boulder")->with_gamma(gamma); }

double binomial_sd(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

/// Time-limited optimization: records the slowest call.
template <class F>
MleResult timed(F&& f, double& slowest) {
  const auto t0 = std::chrono::steady_clock::now();
  auto r = f();
  slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return r;
}

void criterion1(Check& c) {
  const auto d = load_dataset("boulder-5").counts;
  double slowest = 0.0;
  const auto qm = timed([&] { return qm_mle(d, boulder(0.000722)); }, slowest);
  c.near(qm.log10_likelihood(), -46.59, 0.02, "QM at 0.000722");
  c.near(timed([&] { return qm_mle(d, boulder(0.0005)); }, slowest).log10_likelihood(), -711.52, 0.1, "QM at 0.0005");
  double lo = 1e300, hi = -1e300;
  for (double g : {0.0005, 0.0006, 0.0007, 0.000722, 0.0008, 0.0009}) {
    const double v = timed([&] { return lhv_mle(d, boulder(g)); }, slowest).log10_likelihood();
    c.near(v, -57.64, 0.05, "LHV at " + fmt(g));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  c.expect(hi - lo <= 0.01, "LHV drift " + fmt(hi - lo));
  const auto ns = timed([&] { return nosignaling_mle(d, boulder(0.000722)); }, slowest);
  c.near(ns.log10_likelihood(), -46.54, 0.02, "no-signaling ceiling");
  c.expect(ns.log10_likelihood() - qm.log10_likelihood() <= 0.061,
           "QM below ceiling by " + fmt(ns.log10_likelihood() - qm.log10_likelihood()));
  c.expect(slowest <= 120.0, "slowest optimization " + fmt(slowest) + " s");
  c.note("QM " + fmt(qm.log10_likelihood()) + ", LHV " + fmt(lo) + ".." + fmt(hi) + ", ceiling " +
         fmt(ns.log10_likelihood()) + ", slowest " + fmt(slowest, 3) + " s");
}

void criterion2(Check& c) {
  GammaScanOptions opt;
  opt.with_lhv = false;
  const auto t0 = std::chrono::steady_clock::now();
  const auto b = estimate_gamma(load_dataset("boulder-5").counts, *find_preset("boulder"), 0.0005, 0.0009,
                                std::nullopt, opt);
  c.near(b.gamma_hat, 0.000722, 1e-5, "Boulder gamma");
  const std::pair<const char*, double> cases[] = {{"vienna-6", 0.00296}, {"vienna-7", 0.00287}, {"vienna-8", 0.00264}};
  std::string seen = "Boulder " + fmt(b.gamma_hat, 4);
  for (const auto& [name, expected] : cases) {
    const auto data = load_dataset(name).counts;
    const auto est = estimate_gamma(data, *find_preset("vienna"), 0.0025, 0.0034, std::nullopt, opt);
    c.near(est.gamma_hat, expected, 3e-5, std::string(name) + " gamma");
    const auto own = load_params(name);
    const double gap = qm_mle(data, own).log10_likelihood() - lhv_mle(data, own).log10_likelihood();
    c.expect(gap >= 10.0, std::string(name) + " QM over LHV by " + fmt(gap) + " log10");
    seen += ", " + std::string(name) + " " + fmt(est.gamma_hat, 4) + " (QM-LHV " + fmt(gap, 4) + ")";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.expect(secs <= 4 * 1800.0, "runtime " + fmt(secs) + " s");
  c.note(seen);
}

void criterion3(Check& c) {
  struct Case {
    const char* name;
    ExperimentParams params;
    double qm, both, lhv;
  };
  const Case cases[] = {{"Boulder", boulder(0.000722), 0.0006, 0.5025, 0.4969},
                        {"Vienna ds6", load_params("vienna-6"), 0.0018, 0.5018, 0.4964},
                        {"Delft", load_params("delft-1"), 0.1512, 0.3627, 0.4860},
                        {"Munich run 1", load_params("munich-1"), 0.0769, 0.4267, 0.4964}};
  const double n = 1e5;
  for (const auto& k : cases) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& s = prior(k.params, 100000);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // Contents are halves of subsample fractions; "both" draws on both subsamples.
    const double sa = 0.5 * binomial_sd(2 * k.qm, n), sb = 0.5 * binomial_sd(2 * k.lhv, n);
    c.near(s.contents.qm_only, k.qm, 4 * sa, std::string(k.name) + " QM only");
    c.near(s.contents.both, k.both, 4 * std::hypot(sa, sb), std::string(k.name) + " both");
    c.near(s.contents.lhv_only, k.lhv, 4 * sb, std::string(k.name) + " LHV only");
    c.expect(secs <= 3600.0, std::string(k.name) + " build " + fmt(secs) + " s");
    c.note(std::string(k.name) + " " + fmt(s.contents.qm_only, 4) + "/" + fmt(s.contents.both, 4) + "/" +
           fmt(s.contents.lhv_only, 4));
  }
}

void criterion4(Check& c) {
  const auto boulder5 = load_dataset("boulder-5").counts;
  const auto cal = posterior_contents(prior(boulder(0.000722), 100000), boulder5);
  c.expect(cal[Region::qm_only].posterior == 1.0, "Boulder 0.000722 QM only " + fmt(cal[Region::qm_only].posterior));
  c.expect(cal[Region::both].log10_posterior < -100 && cal[Region::lhv_only].log10_posterior < -100,
           "Boulder 0.000722 non-QM contents not below 1e-100");
  const auto nom = posterior_contents(prior(boulder(0.0005), 100000), boulder5);
  c.expect(nom[Region::both].posterior == 1.0, "Boulder 0.0005 both " + fmt(nom[Region::both].posterior));
  c.expect(nom[Region::qm_only].log10_posterior < -100 && nom[Region::lhv_only].log10_posterior < -100,
           "Boulder 0.0005 other contents not below 1e-100");
  for (const char* name : {"vienna-6", "vienna-7", "vienna-8", "munich-1", "munich-2"}) {
    const auto b = load_dataset(name);
    const auto r = posterior_contents(prior(*b.params(), 100000), b.counts);
    c.expect(r[Region::qm_only].posterior == 1.0 && r[Region::both].below_representable &&
                 r[Region::lhv_only].below_representable,
             std::string(name) + " contents " + fmt(r[Region::qm_only].posterior) + "/" +
                 fmt(r[Region::both].posterior) + "/" + fmt(r[Region::lhv_only].posterior));
  }
  // The tiny Delft posteriors rest on a handful of points, so they need the full-size sample.
  const auto delft = load_dataset("delft-1");
  const auto r = posterior_contents(prior(*delft.params(), 1000000), delft.counts);
  c.expect(r[Region::qm_only].posterior >= 0.9999, "Delft QM only " + fmt(r[Region::qm_only].posterior));
  c.near(r[Region::both].log10_posterior, std::log10(1.2e-7), 1.0, "Delft log10 both");
  c.near(r[Region::lhv_only].log10_posterior, std::log10(4.5e-8), 1.0, "Delft log10 LHV only");
  c.note("Delft run 1 (10^6 prior): both " + fmt(r[Region::both].posterior, 3) + ", LHV only " +
         fmt(r[Region::lhv_only].posterior, 3));
}

void criterion5(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto qm = content_intervals(1210, 998790), lhv = content_intervals(993805, 6195);
  const double tol = 5e-7;
  c.near(qm.plausible.lo, 0.001066, tol, "QM plausible lo");
  c.near(qm.plausible.hi, 0.001367, tol, "QM plausible hi");
  c.near(lhv.plausible.lo, 0.993475, tol, "LHV plausible lo");
  c.near(lhv.plausible.hi, 0.994124, tol, "LHV plausible hi");
  c.near(qm.one_sigma.lo / 2, 0.000588, tol, "S QM one-sigma lo");
  c.near(qm.one_sigma.hi / 2, 0.000622, tol, "S QM one-sigma hi");
  c.near(qm.plausible.lo / 2, 0.000533, tol, "S QM plausible lo");
  c.near(qm.plausible.hi / 2, 0.000683, tol, "S QM plausible hi");
  c.near(lhv.one_sigma.lo / 2, 0.496863, tol, "S LHV one-sigma lo");
  c.near(lhv.one_sigma.hi / 2, 0.496942, tol, "S LHV one-sigma hi");
  c.near(lhv.plausible.lo / 2, 0.496738, tol, "S LHV plausible lo");
  c.near(lhv.plausible.hi / 2, 0.497062, tol, "S LHV plausible hi");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.expect(secs < 1.0, "runtime " + fmt(secs) + " s");
}

void criterion6(Check& c) {
  const auto data = load_dataset("boulder-5");
  const auto freq = relative_frequencies(data.counts);
  const struct {
    double gamma, target, qm, lhv;
  } table[] = {{0.0005, 0.1164, 0.0462, 0.0056}, {0.000722, 0.0106, 0.0014, 0.0047}};
  for (const auto& row : table) {
    const auto params = boulder(row.gamma);
    const auto target = probabilities_from_state(target_state(params, *data.target), params);
    const std::string g = " at " + fmt(row.gamma);
    c.near(bhattacharyya_angle(freq, target, row.gamma), row.target, 0.001, "target" + g);
    c.near(bhattacharyya_angle(freq, qm_mle(data.counts, params).p, row.gamma), row.qm, 0.001, "QM-MLE" + g);
    c.near(bhattacharyya_angle(freq, lhv_mle(data.counts, params).p, row.gamma), row.lhv, 0.0015, "LHV-MLE" + g);
  }
  for (const char* name : {"delft-1", "delft-2", "delft-1+2", "munich-1", "munich-2"}) {
    const auto b = load_dataset(name);
    const auto t = triangle_report(b.counts, *b.params(), *b.target);
    c.expect(t.satisfies_triangle_inequality(), std::string(name) + " triangle inequality");
  }
}

void criterion7(Check& c) {
  const std::pair<const char*, double> cases[] = {
      {"delft-1", 7.2}, {"delft-2", 3.1}, {"delft-1+2", 12}, {"munich-1", 4.1e3}, {"munich-2", 6.5e15}};
  std::string seen;
  for (const auto& [name, ratio] : cases) {
    const auto b = load_dataset(name);
    const double r = qm_mle(b.counts, *b.params()).log10_likelihood() - lhv_mle(b.counts, *b.params()).log10_likelihood();
    c.near(r, std::log10(ratio), std::log10(1.5), std::string(name) + " log10 ratio");
    seen += (seen.empty() ? "" : ", ") + std::string(name) + " " + fmt(std::pow(10.0, r), 3);
  }
  c.note(seen);
}

void expect_rates(Check& c, const BiasTally& t, const std::string& name,
                  const std::array<std::array<double, 3>, 3>& published, double published_mocks) {
  const double m = static_cast<double>(t.mocks_per_region);
  for (auto mock : all_regions)
    for (auto fav : all_regions) {
      const double p = published[static_cast<std::size_t>(mock)][static_cast<std::size_t>(fav)] / published_mocks;
      // Binomial spread of our rate and of the published rate combined.
      const double sd = std::sqrt(p * (1.0 - p) * (1.0 / m + 1.0 / published_mocks));
      c.near(t.rate(mock, fav), p, 3 * sd,
             name + " " + std::string(to_string(mock)) + " mocks favoring " + std::string(to_string(fav)));
    }
  for (auto r : all_regions) {
    const auto i = static_cast<std::size_t>(r);
    c.expect(t.without_favor[i] == 0 && t.without_against[i] == 0,
             name + " " + std::string(to_string(r)) + " mock without a favor/against verdict");
  }
}

std::string rows(const BiasTally& t) {
  std::string s;
  for (auto r : all_regions) {
    const auto& row = t.in_favor[static_cast<std::size_t>(r)];
    s += (s.empty() ? "" : " | ") + std::to_string(row[0]) + " " + std::to_string(row[1]) + " " + std::to_string(row[2]);
  }
  return s;
}

void criterion8(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  // The QM-only region needs the full-size sample: 10^5 points leave about a
  // hundred mock candidates there.
  const auto& bp = prior(boulder(0.000722), 1000000);
  const auto bt = run_bias_check(bp, 200, load_dataset("boulder-5").counts.total(), 1);
  c.expect(bt.in_favor[1][0] == 0 && bt.in_favor[2][0] == 0, "Boulder QM-only leakage");
  expect_rates(c, bt, "Boulder", {{{8809, 1278, 0}, {0, 8365, 1635}, {0, 145, 9855}}}, 10000);
  const auto& dp = prior(load_params("delft-1"), 100000);
  const auto dt = run_bias_check(dp, 200, load_dataset("delft-1").counts.total(), 1);
  expect_rates(c, dt, "Delft", {{{971, 153, 0}, {65, 810, 216}, {8, 48, 958}}}, 1000);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.expect(secs <= 7200.0, "runtime " + fmt(secs) + " s");
  c.note("Boulder " + rows(bt) + "; Delft " + rows(dt));
}

void criterion9(Check& c, const std::string& property_tests) {
  if (property_tests.empty()) {
    c.expect(false, "no --property-tests binary given");
    return;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const int status = std::system((property_tests + " --gtest_brief=1 > /dev/null").c_str());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.expect(status == 0, "property suite exit status " + std::to_string(status));
  c.expect(secs <= 600.0, "runtime " + fmt(secs) + " s");
  c.note("property suite " + fmt(secs, 3) + " s");
}

std::set<int> parse_list(const std::string& s) {
  std::set<int> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty()) out.insert(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::string property_tests;
  std::set<int> known_red, only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (i + 1 < argc && a == "--property-tests") property_tests = argv[++i];
    else if (i + 1 < argc && a == "--known-red") known_red = parse_list(argv[++i]);
    else if (i + 1 < argc && a == "--only") only = parse_list(argv[++i]);
    else {
      std::cerr << "usage: acceptance [--property-tests PATH] [--known-red N,...] [--only N,...]\n";
      return 2;
    }
  }
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"Boulder maximum likelihoods", criterion1},
      {"gamma self-calibration", criterion2},
      {"prior contents", criterion3},
      {"posterior verdicts", criterion4},
      {"sampling-error intervals", criterion5},
      {"Bhattacharyya table and triangles", criterion6},
      {"likelihood-ratio table", criterion7},
      {"bias-check tallies", criterion8},
      {"property suites", [&](Check& c) { criterion9(c, property_tests); }},
  };
  std::set<int> failed;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(n)) continue;
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!c.pass()) failed.insert(n);
    std::cout << "criterion " << n << ": " << (c.pass() ? "PASS" : "FAIL") << "  " << criteria[i].first << "  ("
              << std::fixed << std::setprecision(1) << secs << " s)" << std::defaultfloat;
    if (!c.pass() && known_red.count(n)) std::cout << "  [known]";
    std::cout << "\n";
    if (!c.failures().empty()) std::cout << "    failed: " << c.failures() << "\n";
    if (!c.notes().empty()) std::cout << "    measured: " << c.notes() << "\n";
    std::cout.flush();
  }
  std::set<int> expected;
  for (int n : known_red)
    if (only.empty() || only.count(n)) expected.insert(n);
  if (failed != expected) {
    for (int n : expected)
      if (!failed.count(n)) std::cout << "criterion " << n << " was listed as known red but passed\n";
    return 1;
  }
  return 0;
}
