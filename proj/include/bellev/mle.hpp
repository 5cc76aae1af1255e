#ifndef BELLEV_MLE_HPP
#define BELLEV_MLE_HPP

// Maximum-likelihood estimation over the QM, LHV and no-signaling sets,
// gamma calibration, and Bhattacharyya angles.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "bellev/barrier.hpp"
#include "bellev/error.hpp"
#include "bellev/lhv.hpp"
#include "bellev/probability.hpp"
#include "bellev/quantum.hpp"
#include "bellev/random.hpp"

namespace bellev {

struct MleDiagnostics {
  int iterations = 0;            // Newton steps of the best start
  double gradient_norm = 0.0;    // stationarity residual, see each estimator
  double duality_gap = 0.0;      // nats
  double start_spread = 0.0;     // max - min log-likelihood over starts, nats
  std::vector<double> stage_objective;
  std::vector<std::vector<double>> penalized;
};

using MleWitness = std::variant<DensityMatrix, HiddenWeights, ReducedProbabilities>;

struct MleResult {
  ProbabilityVector p;
  MleWitness witness;
  double log_likelihood = 0.0;  // natural log, combinatorial constant included
  MleDiagnostics diagnostics;

  double log10_likelihood() const { return to_log10(log_likelihood); }
};

struct MleOptions {
  int starts = 5;
  std::uint64_t seed = 20170101;
  double agreement = 1e-6;  // nats
  unsigned workers = 1;
  BarrierOptions barrier{};
};

namespace detail {

inline LogTerm affine_term(const Eigen::VectorXd& a, double b, std::uint64_t n, bool complement = false) {
  LogTerm t;
  t.a = a;
  t.b = b;
  t.count = static_cast<double>(n);
  t.complement = complement;
  return t;
}

/// Click cells enter as p = a.x + b; each 00 cell as one minus its setting's clicks.
inline void add_cell_terms(BarrierProblem& pr, const EventCounts& d,
                           const std::array<Eigen::VectorXd, 16>& a, const std::array<double, 16>& b) {
  for (auto s : all_settings) {
    Eigen::VectorXd ca = Eigen::VectorXd::Zero(pr.dim);
    double cb = 0.0;
    for (auto o : {Outcome::plus_plus, Outcome::plus_null, Outcome::null_plus}) {
      const auto k = cell(s, o);
      pr.terms.push_back(affine_term(a[k], b[k], d[k]));
      ca += a[k];
      cb += b[k];
    }
    pr.terms.push_back(affine_term(ca, cb, d[cell(s, Outcome::null_null)], true));
  }
}

inline void append_rows(BarrierProblem& pr, const std::vector<std::pair<Eigen::VectorXd, double>>& rows) {
  pr.g.resize(static_cast<Eigen::Index>(rows.size()), pr.dim);
  pr.h.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    pr.g.row(static_cast<Eigen::Index>(i)) = rows[i].first.transpose();
    pr.h(static_cast<Eigen::Index>(i)) = rows[i].second;
  }
}

struct StartOutcome {
  BarrierResult result;
  double log_likelihood = 0.0;
  std::optional<Error> error;
};

template <class Build, class Starts, class Evaluate>
MleResult multistart(const EventCounts& d, const BarrierProblem& pr, const MleOptions& opt, Starts&& make_start,
                     Evaluate&& evaluate, Build&& build) {
  const int n = std::max(1, opt.starts);
  std::vector<StartOutcome> out(static_cast<std::size_t>(n));
  parallel_for(out.size(), opt.workers, [&](std::size_t i) {
    try {
      BarrierSolver solver(pr, opt.barrier);
      out[i].result = solver.solve(make_start(i));
      out[i].log_likelihood = evaluate(out[i].result.x);
    } catch (const Error& e) {
      if (!is_numerical_failure(e.kind())) throw;
      out[i].error = e;
    }
  });
  std::size_t best = out.size();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].error) throw Error(ErrorKind::ConvergenceFailure, std::string("start ") + std::to_string(i) +
                                                                     ": " + out[i].error->what());
    lo = std::min(lo, out[i].log_likelihood);
    if (out[i].log_likelihood > hi) {
      hi = out[i].log_likelihood;
      best = i;
    }
  }
  MleResult r = build(out[best].result.x);
  // With huge counts the starts only agree to the resolution of the likelihood itself.
  const double tolerance = opt.agreement + 4.0 * likelihood_resolution(d, r.p);
  if (hi - lo > tolerance)
    throw Error(ErrorKind::ConvergenceFailure,
                "starts disagree by " + std::to_string(hi - lo) + " in log-likelihood");
  r.log_likelihood = out[best].log_likelihood;
  r.diagnostics.iterations = out[best].result.iterations;
  r.diagnostics.duality_gap = out[best].result.duality_gap;
  r.diagnostics.start_spread = hi - lo;
  r.diagnostics.stage_objective = out[best].result.stage_objective;
  r.diagnostics.penalized = std::move(out[best].result.penalized);
  return r;
}

}  // namespace detail

/// dl/drho = sum_k n_k M_k / p_k for the detection operators M_k.
inline Matrix4 qm_likelihood_operator(const EventCounts& d, const ExperimentParams& params, const Matrix4& rho) {
  const auto m = cell_operators(params);
  Matrix4 g = Matrix4::Zero();
  for (std::size_t k = 0; k < 16; ++k)
    if (d[k] > 0) g += (static_cast<double>(d[k]) / (m[k].cwiseProduct(rho)).sum()) * m[k];
  return g;
}

/// Log-likelihood without the combinatorial constant as a function of a real
/// factor A with rho = A^T A / tr(A^T A).
inline double qm_factor_objective(const EventCounts& d, const ExperimentParams& params, const Matrix4& a) {
  const Matrix4 rho = a.transpose() * a / (a.transpose() * a).trace();
  const auto m = cell_operators(params);
  double f = 0.0;
  for (std::size_t k = 0; k < 16; ++k)
    if (d[k] > 0) f += static_cast<double>(d[k]) * std::log((m[k].cwiseProduct(rho)).sum());
  return f;
}

inline Matrix4 qm_factor_gradient(const EventCounts& d, const ExperimentParams& params, const Matrix4& a) {
  const double t = (a.transpose() * a).trace();
  const Matrix4 rho = a.transpose() * a / t;
  const Matrix4 g = qm_likelihood_operator(d, params, rho);
  return (2.0 / t) * (a * g - (rho.cwiseProduct(g)).sum() * a);
}

/// Gradient of the log-likelihood in the sixteen hidden weights (unconstrained ambient space).
inline std::array<double, 16> lhv_weight_gradient(const EventCounts& d, const HiddenWeights::Values& w) {
  std::array<double, 16> p{};
  for (auto s : all_settings)
    for (std::size_t k = 0; k < 16; ++k) p[cell(s, hidden::outcome(k, s))] += w[k];
  std::array<double, 16> g{};
  for (std::size_t k = 0; k < 16; ++k)
    for (auto s : all_settings) {
      const auto c = cell(s, hidden::outcome(k, s));
      if (d[c] > 0) g[k] += static_cast<double>(d[c]) / p[c];
    }
  return g;
}

inline double lhv_weight_objective(const EventCounts& d, const HiddenWeights::Values& w) {
  std::array<double, 16> p{};
  for (auto s : all_settings)
    for (std::size_t k = 0; k < 16; ++k) p[cell(s, hidden::outcome(k, s))] += w[k];
  double f = 0.0;
  for (std::size_t c = 0; c < 16; ++c)
    if (d[c] > 0) f += static_cast<double>(d[c]) * std::log(p[c]);
  return f;
}

/// Maximizes over two-qubit real density matrices in Pauli coordinates, with
/// positivity kept by a log-det barrier.
inline MleResult qm_mle(const EventCounts& d, const ExperimentParams& params, const MleOptions& opt = {}) {
  params.validate();
  const auto m = cell_operators(params);
  const auto& ops = pauli::operators();
  BarrierProblem pr;
  pr.dim = 9;
  std::array<Eigen::VectorXd, 16> a;
  std::array<double, 16> b{};
  for (std::size_t k = 0; k < 16; ++k) {
    a[k].resize(9);
    for (int i = 0; i < 9; ++i) a[k](i) = (m[k].cwiseProduct(ops[static_cast<std::size_t>(i)])).sum() / 4.0;
    b[k] = m[k].trace() / 4.0;
  }
  detail::add_cell_terms(pr, d, a, b);
  pr.psd.push_back(Matrix4::Identity() / 4.0);
  for (const auto& o : ops) pr.psd.push_back(o / 4.0);

  auto to_coords = [](const Eigen::VectorXd& x) {
    pauli::Coords c{};
    for (std::size_t i = 0; i < 9; ++i) c[i] = x(static_cast<Eigen::Index>(i));
    return c;
  };
  auto start = [&](std::size_t i) -> Eigen::VectorXd {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(9);
    if (i == 0) return x;
    Engine e = substream(opt.seed, StreamComponent::mle_starts, i);
    const auto c = pauli::coords(random_pure_state(e).matrix());
    for (std::size_t j = 0; j < 9; ++j) x(static_cast<Eigen::Index>(j)) = 0.5 * c[j];
    return x;
  };
  auto evaluate = [&](const Eigen::VectorXd& x) {
    return log_likelihood(d, probabilities_from_coords(to_coords(x), params));
  };
  auto build = [&](const Eigen::VectorXd& x) {
    const auto c = to_coords(x);
    DensityMatrix rho(pauli::matrix(c));
    MleResult r{probabilities_from_coords(c, params), rho, 0.0, {}};
    // Stationarity on the trace-one slice: G rho = tr(rho G) rho at an optimum.
    const Matrix4 g = qm_likelihood_operator(d, params, rho.matrix());
    const double lam = (rho.matrix().cwiseProduct(g)).sum();
    r.diagnostics.gradient_norm = (g * rho.matrix() - lam * rho.matrix()).norm() / std::max(1.0, lam);
    return r;
  };
  return detail::multistart(d, pr, opt, start, evaluate, build);
}

namespace detail {

inline double lhv_start_scale(const ExperimentParams& p) {
  return 0.5 * std::min({p.eta_a * p.eta_b / 4.0, 1.0 / 12.0, p.eta_a / 8.0, p.eta_b / 8.0,
                         1.0 / (15.0 * p.gamma)});
}

inline HiddenWeights::Values lhv_weights_from(const Eigen::VectorXd& v, double gamma) {
  HiddenWeights::Values w{};
  double clicks = 0.0;
  for (std::size_t k = 0; k < 15; ++k) {
    w[k] = gamma * std::max(0.0, v(static_cast<Eigen::Index>(k)));
    clicks += w[k];
  }
  w[hidden::null_null] = std::max(0.0, 1.0 - clicks);
  return w;
}

}  // namespace detail

/// Maximizes over hidden weights w_k = gamma v_k (k < 15), w_0000 = 1 - sum,
/// subject to the detection bounds.
inline MleResult lhv_mle(const EventCounts& d, const ExperimentParams& params, const MleOptions& opt = {}) {
  params.validate();
  const double g = params.gamma;
  BarrierProblem pr;
  pr.dim = 15;
  std::array<Eigen::VectorXd, 16> a;
  std::array<double, 16> b{};
  for (auto& x : a) x = Eigen::VectorXd::Zero(15);
  for (auto s : all_settings)
    for (std::size_t k = 0; k < 15; ++k) {
      const auto o = hidden::outcome(k, s);
      if (o != Outcome::null_null) a[cell(s, o)](static_cast<Eigen::Index>(k)) = g;
    }
  detail::add_cell_terms(pr, d, a, b);

  std::vector<std::pair<Eigen::VectorXd, double>> rows;
  for (int k = 0; k < 15; ++k) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(15);
    r(k) = -1.0;
    rows.emplace_back(r, 0.0);
  }
  rows.emplace_back(Eigen::VectorXd::Constant(15, g), 1.0);
  for (auto s : all_settings) {
    rows.emplace_back(a[cell(s, Outcome::plus_plus)] / g, params.eta_a * params.eta_b);
    rows.emplace_back((a[cell(s, Outcome::plus_plus)] + a[cell(s, Outcome::plus_null)] +
                       a[cell(s, Outcome::null_plus)]) / g, 1.0);
  }
  using enum Setting;
  rows.emplace_back((a[cell(ab, Outcome::plus_plus)] + a[cell(ab, Outcome::plus_null)]) / g, params.eta_a);
  rows.emplace_back((a[cell(a_prime_b, Outcome::plus_plus)] + a[cell(a_prime_b, Outcome::plus_null)]) / g,
                    params.eta_a);
  rows.emplace_back((a[cell(ab, Outcome::plus_plus)] + a[cell(ab, Outcome::null_plus)]) / g, params.eta_b);
  rows.emplace_back((a[cell(ab_prime, Outcome::plus_plus)] + a[cell(ab_prime, Outcome::null_plus)]) / g,
                    params.eta_b);
  detail::append_rows(pr, rows);

  const double s0 = detail::lhv_start_scale(params);
  auto start = [&](std::size_t i) -> Eigen::VectorXd {
    Eigen::VectorXd x = Eigen::VectorXd::Constant(15, s0);
    if (i == 0) return x;
    Engine e = substream(opt.seed, StreamComponent::mle_starts, 100 + i);
    std::uniform_real_distribution<double> u(0.2, 1.8);
    for (int k = 0; k < 15; ++k) x(k) *= u(e);
    return x;
  };
  auto evaluate = [&](const Eigen::VectorXd& x) {
    return log_likelihood(d, probabilities_from_weights(HiddenWeights(detail::lhv_weights_from(x, g))));
  };
  auto build = [&](const Eigen::VectorXd& x) {
    HiddenWeights w(detail::lhv_weights_from(x, g));
    MleResult r{probabilities_from_weights(w), w, 0.0, {}};
    // Largest gradient component along directions that move mass off w_0000.
    const auto grad = lhv_weight_gradient(d, w.values());
    double worst = 0.0;
    for (std::size_t k = 0; k < 15; ++k)
      if (w[k] > 1e-9 * g) worst = std::max(worst, std::abs(grad[k] - grad[hidden::null_null]) * w[k]);
    r.diagnostics.gradient_norm = worst / std::max(1.0, static_cast<double>(d.total()));
    return r;
  };
  return detail::multistart(d, pr, opt, start, evaluate, build);
}

namespace detail {

/// y = (p+^a, p+^a', p+^b, p+^b', p++^ab, p++^ab', p++^a'b, p++^a'b') / gamma.
inline ReducedProbabilities reduced_from(const Eigen::VectorXd& y, double gamma) {
  ReducedProbabilities r;
  for (int i = 0; i < 2; ++i) {
    r.alice_plus[static_cast<std::size_t>(i)] = gamma * y(i);
    r.bob_plus[static_cast<std::size_t>(i)] = gamma * y(2 + i);
  }
  for (auto s : all_settings) {
    const double clicks = y(alice_side(s)) + y(2 + bob_side(s)) - y(4 + static_cast<int>(index(s)));
    r.null_event[index(s)] = 1.0 - gamma * clicks;
  }
  return r;
}

inline ProbabilityVector nosignaling_probabilities(const Eigen::VectorXd& y, double gamma) {
  CellProbabilities::Values v{};
  for (auto s : all_settings) {
    const double pa = y(alice_side(s)), pb = y(2 + bob_side(s)), pp = y(4 + static_cast<int>(index(s)));
    v[cell(s, Outcome::plus_plus)] = gamma * std::max(0.0, pp);
    v[cell(s, Outcome::plus_null)] = gamma * std::max(0.0, pa - pp);
    v[cell(s, Outcome::null_plus)] = gamma * std::max(0.0, pb - pp);
    v[cell(s, Outcome::null_null)] = 1.0 - gamma * (pa + pb - pp);
  }
  return ProbabilityVector(CellProbabilities(v));
}

}  // namespace detail

/// Maximizes over all no-signaling probabilities that obey the detection bounds.
inline MleResult nosignaling_mle(const EventCounts& d, const ExperimentParams& params,
                                 const MleOptions& opt = {}) {
  params.validate();
  const double g = params.gamma;
  BarrierProblem pr;
  pr.dim = 8;
  std::array<Eigen::VectorXd, 16> a;
  std::array<double, 16> b{};
  std::vector<std::pair<Eigen::VectorXd, double>> rows;
  auto unit = [](int i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(8);
    e(i) = 1.0;
    return e;
  };
  for (auto s : all_settings) {
    const Eigen::VectorXd ea = unit(alice_side(s)), eb = unit(2 + bob_side(s)), ec = unit(4 + static_cast<int>(index(s)));
    a[cell(s, Outcome::plus_plus)] = g * ec;
    a[cell(s, Outcome::plus_null)] = g * (ea - ec);
    a[cell(s, Outcome::null_plus)] = g * (eb - ec);
    a[cell(s, Outcome::null_null)] = Eigen::VectorXd::Zero(8);
    rows.emplace_back(-ec, 0.0);
    rows.emplace_back(ec - ea, 0.0);
    rows.emplace_back(ec - eb, 0.0);
    rows.emplace_back(ec, params.eta_a * params.eta_b);
    rows.emplace_back(ea + eb - ec, std::min(1.0, 1.0 / g));
  }
  for (int i = 0; i < 2; ++i) {
    rows.emplace_back(unit(i), params.eta_a);
    rows.emplace_back(unit(2 + i), params.eta_b);
  }
  detail::add_cell_terms(pr, d, a, b);
  detail::append_rows(pr, rows);

  const double t = 0.25 * std::min({params.eta_a, params.eta_b, 1.0});
  const double c0 = 0.5 * std::min(t, params.eta_a * params.eta_b);
  auto start = [&](std::size_t i) -> Eigen::VectorXd {
    Eigen::VectorXd y(8);
    y << 2 * t, 2 * t, 2 * t, 2 * t, c0, c0, c0, c0;
    if (i == 0) return y;
    Engine e = substream(opt.seed, StreamComponent::mle_starts, 200 + i);
    std::uniform_real_distribution<double> u(0.6, 1.0);
    for (int k = 0; k < 4; ++k) y(k) *= u(e);
    for (int k = 4; k < 8; ++k) y(k) = c0 * 0.5 * u(e);
    return y;
  };
  auto evaluate = [&](const Eigen::VectorXd& y) {
    return log_likelihood(d, detail::nosignaling_probabilities(y, g));
  };
  auto build = [&](const Eigen::VectorXd& y) {
    return MleResult{detail::nosignaling_probabilities(y, g), detail::reduced_from(y, g), 0.0, {}};
  };
  return detail::multistart(d, pr, opt, start, evaluate, build);
}

/// Angle between two probability sets after rescaling the click cells by
/// 1/(4 gamma); each setting then carries mass 1/4.
inline double bhattacharyya_angle(const CellProbabilities& p, const CellProbabilities& q, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw Error(ErrorKind::InvalidArgument, "gamma must lie in (0,1]");
  auto rescale = [&](const CellProbabilities& x) {
    std::array<double, 16> r{};
    for (auto s : all_settings) {
      double clicks = 0.0;
      for (auto o : {Outcome::plus_plus, Outcome::plus_null, Outcome::null_plus}) {
        r[cell(s, o)] = x(s, o) / (4.0 * gamma);
        clicks += x(s, o);
      }
      const double q00 = (gamma - clicks) / (4.0 * gamma);
      if (q00 < -1e-9)
        throw Error(ErrorKind::NegativeQ, "setting " + std::string(to_string(s)) + " has " +
                                              std::to_string(clicks) + " clicks for gamma " +
                                              std::to_string(gamma));
      r[cell(s, Outcome::null_null)] = std::max(0.0, q00);
    }
    return r;
  };
  const auto a = rescale(p), b = rescale(q);
  // 2 asin(|sqrt a - sqrt b| / 2) equals acos(F) for unit-sum vectors and keeps precision near 0.
  double dist2 = 0.0;
  for (std::size_t k = 0; k < 16; ++k) {
    const double diff = std::sqrt(a[k]) - std::sqrt(b[k]);
    dist2 += diff * diff;
  }
  return 2.0 * std::asin(std::min(1.0, std::sqrt(dist2) / 2.0));
}

struct TriangleReport {
  double gamma = 0.0;
  double freq_target = 0.0;
  double freq_qm = 0.0;
  double target_qm = 0.0;

  bool satisfies_triangle_inequality(double slack = 1e-12) const {
    return freq_target <= freq_qm + target_qm + slack && freq_qm <= freq_target + target_qm + slack &&
           target_qm <= freq_target + freq_qm + slack;
  }
};

inline TriangleReport triangle_report(const EventCounts& d, const ExperimentParams& params,
                                      const TargetCriterion& criterion, const MleOptions& opt = {}) {
  const auto target = probabilities_from_state(target_state(params, criterion), params);
  const auto qm = qm_mle(d, params, opt);
  const auto freq = relative_frequencies(d);
  TriangleReport t;
  t.gamma = params.gamma;
  t.freq_target = bhattacharyya_angle(freq, target, params.gamma);
  t.freq_qm = bhattacharyya_angle(freq, qm.p, params.gamma);
  t.target_qm = bhattacharyya_angle(target, qm.p, params.gamma);
  return t;
}

struct GammaScanPoint {
  double gamma = 0.0;
  double qm_log_likelihood = 0.0;   // natural log
  double lhv_log_likelihood = 0.0;  // natural log
  bool eberhard_violated = false;
  double phi_target_qm = 0.0;
};

struct GammaEstimate {
  double gamma_hat = 0.0;
  double qm_log_likelihood = 0.0;
  std::vector<GammaScanPoint> scan;
};

struct GammaScanOptions {
  int grid = 41;
  double width = 1e-6;
  bool with_lhv = true;
  unsigned workers = default_workers();
  MleOptions mle{};
};

inline GammaScanPoint gamma_scan_point(const EventCounts& d, const ExperimentParams& params, double gamma,
                                       const std::optional<TargetCriterion>& criterion, bool with_lhv,
                                       const MleOptions& opt) {
  const auto p = params.with_gamma(gamma);
  GammaScanPoint pt;
  pt.gamma = gamma;
  const auto qm = qm_mle(d, p, opt);
  pt.qm_log_likelihood = qm.log_likelihood;
  pt.eberhard_violated = bell_violation(qm.p) > 0.0;
  if (with_lhv) pt.lhv_log_likelihood = lhv_mle(d, p, opt).log_likelihood;
  if (criterion)
    pt.phi_target_qm = bhattacharyya_angle(probabilities_from_state(target_state(p, *criterion), p), qm.p, gamma);
  return pt;
}

/// Grid scan of the QM and LHV maxima over gamma, then golden-section
/// refinement of the QM maximum around the best grid point.
inline GammaEstimate estimate_gamma(const EventCounts& d, const ExperimentParams& params, double lo, double hi,
                                    const std::optional<TargetCriterion>& criterion = std::nullopt,
                                    const GammaScanOptions& opt = {}) {
  if (!(lo > 0.0 && hi < 1.0 && lo < hi)) throw Error(ErrorKind::InvalidArgument, "gamma range must lie in (0,1)");
  if (opt.grid < 3) throw Error(ErrorKind::InvalidArgument, "gamma grid needs at least 3 points");
  GammaEstimate est;
  est.scan.resize(static_cast<std::size_t>(opt.grid));
  MleOptions inner = opt.mle;
  inner.workers = 1;
  parallel_for(est.scan.size(), opt.workers, [&](std::size_t i) {
    const double g = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(opt.grid - 1);
    est.scan[i] = gamma_scan_point(d, params, g, criterion, opt.with_lhv, inner);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < est.scan.size(); ++i)
    if (est.scan[i].qm_log_likelihood > est.scan[best].qm_log_likelihood) best = i;
  if (best == 0 || best + 1 == est.scan.size())
    throw Error(ErrorKind::RangeMaximumAtBoundary,
                "QM maximum at gamma = " + std::to_string(est.scan[best].gamma) + ", the edge of the range");
  MleOptions single = opt.mle;
  single.workers = opt.workers;
  auto f = [&](double g) { return qm_mle(d, params.with_gamma(g), single).log_likelihood; };
  const auto [g_hat, f_hat] =
      detail::golden_max(f, est.scan[best - 1].gamma, est.scan[best + 1].gamma, opt.width);
  est.gamma_hat = g_hat;
  est.qm_log_likelihood = f_hat;
  return est;
}

}  // namespace bellev

#endif  // BELLEV_MLE_HPP
