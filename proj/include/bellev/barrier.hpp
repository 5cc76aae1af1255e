#ifndef BELLEV_BARRIER_HPP
#define BELLEV_BARRIER_HPP

// Log-barrier interior-point maximization of
//   f(x) = sum_k n_k log p_k(x),   p_k affine in x (or one minus an affine form),
// over a polyhedron {G x < h}, optionally intersected with {sum_i x_i B_i + B_0 > 0}
// for symmetric 4x4 B's.  f is concave, so the central path leads to the global maximum.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "bellev/error.hpp"

namespace bellev {

struct LogTerm {
  Eigen::VectorXd a;
  double b = 0.0;
  double count = 0.0;
  bool complement = false;  // p = 1 - (a.x + b)

  double q(const Eigen::VectorXd& x) const { return a.dot(x) + b; }
  double p(const Eigen::VectorXd& x) const { return complement ? 1.0 - q(x) : q(x); }
  double log_p(const Eigen::VectorXd& x) const {
    return complement ? std::log1p(-q(x)) : std::log(q(x));
  }
};

struct BarrierProblem {
  int dim = 0;
  std::vector<LogTerm> terms;
  Eigen::MatrixXd g;  // rows of linear inequalities g x < h
  Eigen::VectorXd h;
  std::vector<Eigen::Matrix4d> psd;  // psd[0] + sum_i x_i psd[i+1] > 0 when non-empty
};

struct BarrierOptions {
  double mu_initial = 0.0;  // 0: total count, which keeps the start near the central path
  double mu_final = 1e-12;
  double accept_gap = 1e-6;  // a later stage that breaks down keeps the iterate of the last stage under this gap
  double mu_factor = 0.1;
  double newton_tolerance = 1e-11;  // half squared Newton decrement
  int max_newton_per_stage = 200;
};

struct BarrierResult {
  Eigen::VectorXd x;
  double objective = 0.0;       // f(x) without the constant
  double duality_gap = 0.0;     // bound on f* - f(x)
  int iterations = 0;
  std::vector<double> stage_objective;      // f at the end of each barrier stage
  std::vector<std::vector<double>> penalized;  // barrier objective after each line-searched step
};

class BarrierSolver {
 public:
  explicit BarrierSolver(const BarrierProblem& pr, BarrierOptions opt = {}) : pr_(pr), opt_(opt) {}

  double objective(const Eigen::VectorXd& x) const {
    double f = 0.0;
    for (const auto& t : pr_.terms)
      if (t.count > 0) f += t.count * t.log_p(x);
    return f;
  }

  bool feasible(const Eigen::VectorXd& x) const {
    for (const auto& t : pr_.terms)
      if (t.count > 0 && !(t.p(x) > 0.0)) return false;
    if (pr_.g.rows() > 0 && !((pr_.h - pr_.g * x).array() > 0.0).all()) return false;
    if (!pr_.psd.empty()) {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(psd_matrix(x), Eigen::EigenvaluesOnly);
      if (!(es.eigenvalues()(0) > 0.0)) return false;
    }
    return true;
  }

  /// Barrier objective to be minimized: -f(x) - mu * (sum log slack + log det).
  double penalized(const Eigen::VectorXd& x, double mu) const {
    if (!feasible(x)) return std::numeric_limits<double>::infinity();
    double v = -objective(x);
    if (pr_.g.rows() > 0) v -= mu * (pr_.h - pr_.g * x).array().log().sum();
    if (!pr_.psd.empty()) {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(psd_matrix(x), Eigen::EigenvaluesOnly);
      v -= mu * es.eigenvalues().array().log().sum();
    }
    return v;
  }

  BarrierResult solve(Eigen::VectorXd x) const {
    if (!feasible(x)) throw Error(ErrorKind::InvalidArgument, "barrier start is not strictly feasible");
    BarrierResult r;
    const int m = static_cast<int>(pr_.g.rows()) + (pr_.psd.empty() ? 0 : 4);
    double mu0 = opt_.mu_initial;
    if (mu0 <= 0.0) {
      mu0 = 1.0;
      for (const auto& t : pr_.terms) mu0 += t.count;
    }
    for (double mu = mu0;; mu *= opt_.mu_factor) {
      if (mu < opt_.mu_final) mu = opt_.mu_final;
      std::vector<double> trace;
      trace.push_back(penalized(x, mu));
      const Eigen::VectorXd stage_start = x;
      const auto fail = [&](const char* what) {
        if (!r.stage_objective.empty() && r.duality_gap <= opt_.accept_gap) return false;
        throw Error(ErrorKind::ConvergenceFailure, what);
      };
      bool broke_down = false;
      double blind_dec2 = std::numeric_limits<double>::infinity();
      int k = 0;
      for (; k < opt_.max_newton_per_stage; ++k) {
        Eigen::VectorXd grad;
        Eigen::MatrixXd hess;
        derivatives(x, mu, grad, hess);
        // Symmetric diagonal scaling; the barrier Hessian is badly scaled near the boundary.
        const Eigen::VectorXd dscale = hess.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
        const Eigen::MatrixXd scaled = dscale.asDiagonal() * hess * dscale.asDiagonal();
        Eigen::LDLT<Eigen::MatrixXd> ldlt(scaled);
        Eigen::VectorXd dx = dscale.asDiagonal() * ldlt.solve(Eigen::VectorXd(-grad.cwiseProduct(dscale)));
        if (!dx.allFinite() || ldlt.info() != Eigen::Success) {
          broke_down = !fail("singular Newton system");
          break;
        }
        const double dec2 = -grad.dot(dx);
        double step = 1.0, f0 = trace.back(), f1 = 0.0;
        if (dec2 / 2.0 <= opt_.newton_tolerance) break;
        // Below this the objective cannot verify a decrease, but the decrement
        // comes from the gradient and stays accurate. Deep inside the quadratic
        // region a full step is safe, so take it while the decrement shrinks.
        const double roundoff = 1e-14 * (1.0 + std::abs(f0));
        if (dec2 / 2.0 <= roundoff) {
          if (!(dec2 < blind_dec2) || !feasible(x + dx)) break;
          blind_dec2 = dec2;
          x += dx;
          ++r.iterations;
          continue;
        }
        int halvings = 0;
        for (;; step *= 0.5, ++halvings) {
          f1 = penalized(x + step * dx, mu);
          if (f1 <= f0 - 0.25 * step * dec2) break;
          if (halvings > 60) break;
        }
        if (!(f1 <= f0 - 0.25 * step * dec2)) {
          if (dec2 / 2.0 <= 1e3 * roundoff) break;
          broke_down = !fail("line search failed");
          break;
        }
        x += step * dx;
        trace.push_back(f1);
        ++r.iterations;
        if (step * dx.lpNorm<Eigen::Infinity>() < 1e-15 * (1.0 + x.lpNorm<Eigen::Infinity>())) break;
      }
      if (k == opt_.max_newton_per_stage) broke_down = !fail("Newton iteration limit in barrier stage");
      if (broke_down) {
        x = stage_start;
        break;
      }
      r.penalized.push_back(std::move(trace));
      r.stage_objective.push_back(objective(x));
      r.duality_gap = m * mu;
      if (mu <= opt_.mu_final) break;
    }
    r.x = x;
    r.objective = objective(x);
    return r;
  }

 private:
  Eigen::Matrix4d psd_matrix(const Eigen::VectorXd& x) const {
    Eigen::Matrix4d m = pr_.psd[0];
    for (int i = 0; i < pr_.dim; ++i) m += x(i) * pr_.psd[i + 1];
    return m;
  }

  void derivatives(const Eigen::VectorXd& x, double mu, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
    const int n = pr_.dim;
    grad = Eigen::VectorXd::Zero(n);
    hess = Eigen::MatrixXd::Zero(n, n);
    for (const auto& t : pr_.terms) {
      if (t.count <= 0) continue;
      const double p = t.p(x);
      const double s = t.complement ? -1.0 : 1.0;
      grad -= (t.count * s / p) * t.a;
      hess.noalias() += (t.count / (p * p)) * t.a * t.a.transpose();
    }
    if (pr_.g.rows() > 0) {
      const Eigen::VectorXd inv = (pr_.h - pr_.g * x).cwiseInverse();
      grad += mu * pr_.g.transpose() * inv;
      hess.noalias() += mu * pr_.g.transpose() * inv.cwiseAbs2().asDiagonal() * pr_.g;
    }
    if (!pr_.psd.empty()) {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(psd_matrix(x));
      const Eigen::Matrix4d minv =
          es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
      std::vector<Eigen::Matrix4d> y(n);
      for (int i = 0; i < n; ++i) {
        y[i] = minv * pr_.psd[i + 1];
        grad(i) -= mu * y[i].trace();
      }
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          const double v = mu * (y[i] * y[j]).trace();
          hess(i, j) += v;
          if (i != j) hess(j, i) += v;
        }
    }
  }

  const BarrierProblem& pr_;
  BarrierOptions opt_;
};

}  // namespace bellev

#endif  // BELLEV_BARRIER_HPP
