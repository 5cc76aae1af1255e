// bellev: evidence, maximum-likelihood and bias-check pipeline for Bell-test counts.

#include <CLI11.hpp>
#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "bellev/bellev.hpp"

namespace fs = std::filesystem;
using namespace bellev;
using nlohmann::json;

namespace {

struct Options {
  std::string dataset;
  std::string params;
  std::optional<double> gamma;
  std::uint64_t seed = 1;
  std::string profile = "ci";
  std::string out;
  std::string cache;
  std::optional<std::uint64_t> sample_size;
  std::optional<std::size_t> mocks;
  double epsilon = 0.001;
  std::string range;
  int grid = 41;
  unsigned workers = default_workers();
  double neutral_band = 0.0;
};

// Held for the lifetime of the process once taken.
class CacheLock {
 public:
  explicit CacheLock(const std::string& dir) {
    if (dir.empty()) return;
    fs::create_directories(dir);
    const std::string path = dir + "/.lock";
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
    if (fd_ < 0) throw Error(ErrorKind::IoError, "cannot open " + path);
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      std::cerr << "waiting for the cache lock on " << dir << "\n";
      if (::flock(fd_, LOCK_EX) != 0) throw Error(ErrorKind::IoError, "cannot lock " + path);
    }
  }
  ~CacheLock() {
    if (fd_ >= 0) ::close(fd_);
  }
  CacheLock(const CacheLock&) = delete;
  CacheLock& operator=(const CacheLock&) = delete;

 private:
  int fd_ = -1;
};

std::string cache_dir(const Options& o) {
  if (!o.cache.empty()) return o.cache;
  if (!o.out.empty()) return o.out + "/cache";
  return {};
}

std::optional<DatasetBundle> dataset_of(const Options& o) {
  if (o.dataset.empty()) return std::nullopt;
  return load_dataset(o.dataset);
}

ExperimentParams resolve_params(const Options& o, const std::optional<DatasetBundle>& b) {
  ExperimentParams p;
  if (!o.params.empty())
    p = load_params(o.params);
  else if (b && b->params())
    p = *b->params();
  else
    throw Error(ErrorKind::InvalidArgument, "--params is required for datasets without a bundled preset");
  if (o.gamma) p = p.with_gamma(*o.gamma);
  p.validate();
  return p;
}

TargetCriterion criterion_of(const std::optional<DatasetBundle>& b) {
  return b && b->target ? *b->target : TargetCriterion::threshold();
}

std::string dataset_name(const std::optional<DatasetBundle>& b) { return b ? b->name : std::string("none"); }

std::pair<double, double> parse_range(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw Error(ErrorKind::InvalidArgument, "--range expects lo:hi");
  try {
    return {std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidArgument, "--range expects lo:hi, got " + s);
  }
}

std::optional<std::pair<double, double>> default_range(const std::optional<DatasetBundle>& b) {
  if (!b) return std::nullopt;
  if (b->experiment == "boulder") return std::pair{0.0005, 0.0009};
  if (b->experiment == "vienna") return std::pair{0.0025, 0.0034};
  return std::nullopt;
}

void write_file(const Options& o, const std::string& name, const std::string& content) {
  if (o.out.empty()) return;
  fs::create_directories(o.out);
  std::ofstream f(o.out + "/" + name);
  if (!f) throw Error(ErrorKind::IoError, "cannot write " + o.out + "/" + name);
  f << content;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json run_info(const Options& o, const Profile& prof) {
  return {{"profile", prof.name}, {"seed", o.seed}, {"epsilon", o.epsilon}, {"code_version", code_version}};
}

PriorSample prior_for(const Options& o, const Profile& prof, const ExperimentParams& p) {
  const std::uint64_t n = o.sample_size.value_or(prof.sample_size);
  return load_or_build_prior(p, n, o.epsilon, o.seed, cache_dir(o), o.workers);
}

// Each stage returns its JSON and appends its text rendering.

json stage_prior(const Options& o, const Profile& prof, const PriorSample& s, std::string& text) {
  text += prior_table(s);
  json j = prior_to_json(s);
  j["run"] = run_info(o, prof);
  return j;
}

json stage_evidence(const Options& o, const PriorSample& s, const DatasetBundle& b, std::string& text) {
  EvidenceOptions eo;
  eo.workers = o.workers;
  eo.neutral_band = o.neutral_band;
  auto r = posterior_contents(s, b.counts, eo);
  r.dataset = b.name;
  text += evidence_table(r);
  return evidence_to_json(r);
}

json stage_mle(const Options& o, const ExperimentParams& p, const DatasetBundle& b,
               const std::optional<TargetCriterion>& criterion, std::string& text) {
  MleOptions mo;
  mo.workers = o.workers;
  const auto qm = qm_mle(b.counts, p, mo);
  const auto lhv = lhv_mle(b.counts, p, mo);
  const auto ns = nosignaling_mle(b.counts, p, mo);
  const double ratio = to_log10(qm.log_likelihood - lhv.log_likelihood);
  json j{{"dataset", b.name},
         {"params", params_to_json(p)},
         {"qm", mle_to_json(qm)},
         {"lhv", mle_to_json(lhv)},
         {"nosignaling", mle_to_json(ns)},
         {"log10_ratio_qm_lhv", ratio}};
  std::vector<std::pair<std::string, CellProbabilities>> cols{{"frequency", relative_frequencies(b.counts)}};
  if (criterion) {
    const auto target = probabilities_from_state(target_state(p, *criterion), p);
    j["target"] = {{"probabilities", cells_to_json(target.cells())},
                   {"log10_likelihood", to_log10(log_likelihood(b.counts, target))}};
    cols.emplace_back("target", target.cells());
  }
  cols.emplace_back("QM-MLE", qm.p.cells());
  cols.emplace_back("LHV-MLE", lhv.p.cells());
  text += "maximum likelihood for " + b.name + " at gamma = " + format_g(p.gamma) + "\n";
  text += "  log10 L   QM " + format_f(qm.log10_likelihood(), 3) + "   LHV " + format_f(lhv.log10_likelihood(), 3) +
          "   no-signaling " + format_f(ns.log10_likelihood(), 3) + "\n";
  text += "  QM/LHV likelihood ratio " + format_g(std::pow(10.0, ratio), 3) + "\n";
  text += probability_table(cols);
  return j;
}

json stage_bhattacharyya(const Options& o, const ExperimentParams& p, const DatasetBundle& b,
                         const TargetCriterion& criterion, std::string& text) {
  MleOptions mo;
  mo.workers = o.workers;
  const auto freq = relative_frequencies(b.counts);
  const auto target = probabilities_from_state(target_state(p, criterion), p);
  const auto qm = qm_mle(b.counts, p, mo);
  const auto lhv = lhv_mle(b.counts, p, mo);
  const double ft = bhattacharyya_angle(freq, target, p.gamma);
  const double fq = bhattacharyya_angle(freq, qm.p, p.gamma);
  const double fl = bhattacharyya_angle(freq, lhv.p, p.gamma);
  const double tq = bhattacharyya_angle(target, qm.p, p.gamma);
  TriangleReport tri{p.gamma, ft, fq, tq};
  text += "Bhattacharyya angles for " + b.name + " at gamma = " + format_g(p.gamma) + "\n";
  text += "  frequencies vs target " + format_f(ft, 4) + "   vs QM-MLE " + format_f(fq, 4) + "   vs LHV-MLE " +
          format_f(fl, 4) + "\n";
  text += "  target vs QM-MLE " + format_f(tq, 4) + "   triangle inequality " +
          (tri.satisfies_triangle_inequality() ? "holds" : "VIOLATED") + "\n";
  return {{"dataset", b.name},
          {"gamma", p.gamma},
          {"freq_target", ft},
          {"freq_qm", fq},
          {"freq_lhv", fl},
          {"target_qm", tq},
          {"triangle_inequality", tri.satisfies_triangle_inequality()}};
}

json stage_gamma(const Options& o, const ExperimentParams& p, const DatasetBundle& b,
                 const std::optional<TargetCriterion>& criterion, std::pair<double, double> range,
                 std::vector<GammaScanPoint>& rows, std::string& text) {
  GammaScanOptions go;
  go.grid = o.grid;
  go.workers = o.workers;
  auto est = estimate_gamma(b.counts, p, range.first, range.second, criterion, go);
  rows = est.scan;
  MleOptions single = go.mle;
  single.workers = o.workers;
  const auto refined = gamma_scan_point(b.counts, p, est.gamma_hat, criterion, true, single);
  rows.insert(std::upper_bound(rows.begin(), rows.end(), refined,
                               [](const auto& x, const auto& y) { return x.gamma < y.gamma; }),
              refined);
  text += "gamma estimate for " + b.name + ": " + format_g(est.gamma_hat, 6) + "  (log10 L_QM " +
          format_f(to_log10(est.qm_log_likelihood), 3) + ")\n";
  json scan = json::array();
  for (const auto& r : rows) scan.push_back(scan_point_to_json(r));
  return {{"dataset", b.name},
          {"range", {range.first, range.second}},
          {"gamma_hat", est.gamma_hat},
          {"log10_L_qm", to_log10(est.qm_log_likelihood)},
          {"scan", scan}};
}

json stage_bias(const Options& o, const Profile& prof, const PriorSample& s, const DatasetBundle& b,
                std::string& text) {
  BiasOptions bo;
  bo.workers = o.workers;
  bo.neutral_band = o.neutral_band;
  const auto t = run_bias_check(s, o.mocks.value_or(prof.mocks), b.counts.total(), o.seed, bo);
  text += tally_table(t);
  json j = tally_to_json(t);
  j["dataset"] = b.name;
  j["params"] = params_to_json(s.params);
  j["run"] = run_info(o, prof);
  return j;
}

DatasetBundle require_dataset(const std::optional<DatasetBundle>& b) {
  if (!b) throw Error(ErrorKind::InvalidArgument, "a dataset (bundled id or counts file) is required");
  return *b;
}

int cmd_prior(const Options& o) {
  const auto prof = profile_by_name(o.profile);
  const auto b = dataset_of(o);
  const auto p = resolve_params(o, b);
  CacheLock lock(cache_dir(o));
  std::string text;
  const auto s = prior_for(o, prof, p);
  const json j = stage_prior(o, prof, s, text);
  std::cout << text;
  write_file(o, "prior.json", dump(j));
  return 0;
}

int cmd_evidence(const Options& o) {
  const auto prof = profile_by_name(o.profile);
  const auto b = require_dataset(dataset_of(o));
  const auto p = resolve_params(o, b);
  CacheLock lock(cache_dir(o));
  std::string text;
  const auto s = prior_for(o, prof, p);
  json j = stage_evidence(o, s, b, text);
  j["prior"] = stage_prior(o, prof, s, text);
  std::cout << text;
  write_file(o, "evidence-" + b.name + ".json", dump(j));
  return 0;
}

int cmd_mle(const Options& o) {
  const auto b = require_dataset(dataset_of(o));
  const auto p = resolve_params(o, b);
  std::string text;
  const json j = stage_mle(o, p, b, criterion_of(b), text);
  std::cout << text;
  write_file(o, "mle-" + b.name + ".json", dump(j));
  return 0;
}

int cmd_gamma_scan(const Options& o) {
  const auto b = require_dataset(dataset_of(o));
  const auto p = resolve_params(o, b);
  const auto range = o.range.empty() ? default_range(b) : std::optional{parse_range(o.range)};
  if (!range) throw Error(ErrorKind::InvalidArgument, "--range lo:hi is required for this dataset");
  std::vector<GammaScanPoint> rows;
  std::string text;
  const json j = stage_gamma(o, p, b, criterion_of(b), *range, rows, text);
  std::cerr << text;
  std::cout << scan_csv(rows);
  write_file(o, "gamma-scan-" + b.name + ".csv", scan_csv(rows));
  write_file(o, "gamma-scan-" + b.name + ".json", dump(j));
  return 0;
}

int cmd_bhattacharyya(const Options& o) {
  const auto b = require_dataset(dataset_of(o));
  const auto p = resolve_params(o, b);
  std::string text;
  const json j = stage_bhattacharyya(o, p, b, criterion_of(b), text);
  std::cout << text;
  write_file(o, "bhattacharyya-" + b.name + ".json", dump(j));
  return 0;
}

int cmd_bias_check(const Options& o) {
  const auto prof = profile_by_name(o.profile);
  const auto b = require_dataset(dataset_of(o));
  const auto p = resolve_params(o, b);
  CacheLock lock(cache_dir(o));
  std::string text;
  const auto s = prior_for(o, prof, p);
  const json j = stage_bias(o, prof, s, b, text);
  std::cout << text;
  write_file(o, "bias-check-" + b.name + ".json", dump(j));
  return 0;
}

int exit_code(const Error& e) { return is_numerical_failure(e.kind()) ? 3 : 2; }

int cmd_reproduce(Options o) {
  const auto prof = profile_by_name(o.profile);
  const auto b = require_dataset(dataset_of(o));
  if (o.out.empty()) o.out = "report-" + b.name;
  const auto nominal = resolve_params(o, b);
  const auto criterion = criterion_of(b);
  CacheLock lock(cache_dir(o));

  json report{{"dataset", b.name}, {"counts", counts_to_json(b.counts)}, {"run", run_info(o, prof)}};
  json failures = json::array();
  std::string text = "report for " + b.name + " (" + prof.name + " profile)\n\n";
  int code = 0;
  auto stage = [&](const std::string& name, auto&& fn) {
    try {
      report[name] = fn();
      text += "\n";
      return true;
    } catch (const Error& e) {
      failures.push_back({{"stage", name}, {"error", e.what()}});
      text += "[" + name + "] failed: " + e.what() + "\n\n";
      if (code == 0) code = exit_code(e);
      return false;
    }
  };

  // Gamma candidates: the preset value and, where the data calibrate it, the estimate.
  std::vector<ExperimentParams> gammas{nominal};
  if (const auto range = o.gamma ? std::nullopt : default_range(b)) {
    const auto preset = find_preset(b.experiment)->with_gamma(nominal.gamma);
    std::vector<GammaScanPoint> rows;
    double g_hat = 0.0;
    if (stage("gamma_estimate", [&] {
          json j = stage_gamma(o, preset, b, criterion, *range, rows, text);
          g_hat = j.at("gamma_hat");
          write_file(o, "gamma-scan.csv", scan_csv(rows));
          return j;
        })) {
      gammas = {find_preset(b.experiment)->with_gamma(g_hat)};
      if (b.experiment == "boulder") gammas.insert(gammas.begin(), *find_preset(b.experiment));
    }
  }

  std::optional<PriorSample> prior;
  for (const auto& p : gammas) {
    const std::string tag = "gamma=" + format_g(p.gamma, 6);
    prior.reset();
    stage("prior " + tag, [&] {
      prior = prior_for(o, prof, p);
      return stage_prior(o, prof, *prior, text);
    });
    if (prior) stage("evidence " + tag, [&] { return stage_evidence(o, *prior, b, text); });
    stage("mle " + tag, [&] { return stage_mle(o, p, b, criterion, text); });
    stage("bhattacharyya " + tag, [&] { return stage_bhattacharyya(o, p, b, criterion, text); });
  }
  // The bias check runs at the last (calibrated) gamma only.
  if (prior) stage("bias_check", [&] { return stage_bias(o, prof, *prior, b, text); });
  report["failures"] = failures;
  std::cout << text;
  write_file(o, "report.json", dump(report));
  write_file(o, "report.txt", text);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian evidence, maximum-likelihood and bias-check analysis of Bell-test counts"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool with_dataset) {
    if (with_dataset)
      sub->add_option("dataset", o.dataset, "bundled dataset id (e.g. boulder-5) or counts file");
    sub->add_option("--params", o.params, "preset name (delft, vienna, boulder, munich) or JSON file");
    sub->add_option("--gamma", o.gamma, "override gamma");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--profile", o.profile, "paper or ci")->check(CLI::IsMember({"paper", "ci"}));
    sub->add_option("--out", o.out, "directory for JSON/CSV output");
    sub->add_option("--cache", o.cache, "prior cache directory (default <out>/cache)");
    sub->add_option("--sample-size", o.sample_size, "prior points per component");
    sub->add_option("--epsilon", o.epsilon, "prior mixing epsilon");
    sub->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
  };

  auto* prior = app.add_subcommand("prior", "build a prior sample and report region contents");
  common(prior, true);
  auto* evidence = app.add_subcommand("evidence", "posterior contents and verdicts for a dataset");
  common(evidence, true);
  evidence->add_option("--neutral-band", o.neutral_band, "|C - S| at or below this is neutral");
  auto* mle = app.add_subcommand("mle", "QM, LHV and no-signaling maximum likelihood");
  common(mle, true);
  auto* scan = app.add_subcommand("gamma-scan", "QM and LHV maxima over a gamma range (CSV)");
  common(scan, true);
  scan->add_option("--range", o.range, "gamma range lo:hi");
  scan->add_option("--grid", o.grid, "grid points")->check(CLI::Range(3, 100000));
  auto* bhat = app.add_subcommand("bhattacharyya", "Bhattacharyya angles between frequencies, target and MLEs");
  common(bhat, true);
  auto* bias = app.add_subcommand("bias-check", "prior bias check with simulated datasets");
  common(bias, true);
  bias->add_option("--mocks", o.mocks, "mocks per region (default from profile)");
  bias->add_option("--neutral-band", o.neutral_band, "|C - S| at or below this is neutral");
  auto* repro = app.add_subcommand("reproduce", "full analysis of one dataset");
  common(repro, true);
  repro->add_option("--mocks", o.mocks, "mocks per region (default from profile)");
  repro->add_option("--grid", o.grid, "gamma grid points")->check(CLI::Range(3, 100000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*prior) return cmd_prior(o);
    if (*evidence) return cmd_evidence(o);
    if (*mle) return cmd_mle(o);
    if (*scan) return cmd_gamma_scan(o);
    if (*bhat) return cmd_bhattacharyya(o);
    if (*bias) return cmd_bias_check(o);
    if (*repro) return cmd_reproduce(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
