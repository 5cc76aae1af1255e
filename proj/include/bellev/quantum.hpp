#ifndef BELLEV_QUANTUM_HPP
#define BELLEV_QUANTUM_HPP

// Real two-qubit states, the Born-rule map to detection probabilities,
// QM-membership of a probability vector, and target states.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <optional>
#include <random>

#include "bellev/error.hpp"
#include "bellev/probability.hpp"
#include "bellev/random.hpp"

namespace bellev {

using Matrix4 = Eigen::Matrix4d;
using Vector4 = Eigen::Vector4d;

class DensityMatrix {
 public:
  DensityMatrix() : m_(Matrix4::Identity() / 4.0) {}

  explicit DensityMatrix(const Matrix4& m) : m_(m) {
    if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > 1e-14)
      throw Error(ErrorKind::InvalidArgument, "density matrix not symmetric");
    if (std::abs(m_.trace() - 1.0) > 1e-14)
      throw Error(ErrorKind::InvalidArgument, "density matrix trace differs from 1");
    if (min_eigenvalue() < -1e-12)
      throw Error(ErrorKind::InvalidArgument, "density matrix not positive semidefinite");
  }

  /// rho = A^T A / tr(A^T A), symmetrized.
  static DensityMatrix from_factor(const Matrix4& a) {
    Matrix4 m = a.transpose() * a;
    m = 0.5 * (m + m.transpose()).eval();
    const double tr = m.trace();
    if (!(tr > 0.0)) throw Error(ErrorKind::InvalidArgument, "zero factor");
    return DensityMatrix(m / tr);
  }

  static DensityMatrix pure(const Vector4& psi) {
    const double n2 = psi.squaredNorm();
    if (!(n2 > 0.0)) throw Error(ErrorKind::InvalidArgument, "zero state vector");
    Matrix4 m = psi * psi.transpose() / n2;
    m = 0.5 * (m + m.transpose()).eval();
    m /= m.trace();
    return DensityMatrix(m);
  }

  const Matrix4& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }
  double purity() const { return (m_ * m_).trace(); }
  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix4> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
  }

 private:
  Matrix4 m_;
};

/// Setting directions as (x, z) components; a, a' sit at +-theta_A/2 from the z axis.
struct SettingVectors {
  std::array<Eigen::Vector2d, 2> alice;  // a, a'
  std::array<Eigen::Vector2d, 2> bob;    // b, b'

  static SettingVectors from(const ExperimentParams& p) {
    const double sa = std::sin(p.theta_a / 2), ca = std::cos(p.theta_a / 2);
    const double sb = std::sin(p.theta_b / 2), cb = std::cos(p.theta_b / 2);
    return {{Eigen::Vector2d(sa, ca), Eigen::Vector2d(-sa, ca)},
            {Eigen::Vector2d(sb, cb), Eigen::Vector2d(-sb, cb)}};
  }
};

namespace pauli {

/// Expectation-value coordinates of a real two-qubit state:
/// X1, Z1, X2, Z2, XX, ZX, XZ, ZZ, YY (first factor acts on Alice's qubit).
using Coords = std::array<double, 9>;

inline const std::array<Matrix4, 9>& operators() {
  static const std::array<Matrix4, 9> ops = [] {
    Eigen::Matrix2d i2 = Eigen::Matrix2d::Identity(), x, z, iy;
    x << 0, 1, 1, 0;
    z << 1, 0, 0, -1;
    iy << 0, 1, -1, 0;  // i*sigma_y; (i sigma_y) x (i sigma_y) = -sigma_y x sigma_y
    auto kron = [](const Eigen::Matrix2d& a, const Eigen::Matrix2d& b) {
      Matrix4 k;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
      return k;
    };
    return std::array<Matrix4, 9>{kron(x, i2), kron(z, i2), kron(i2, x), kron(i2, z), kron(x, x),
                                  kron(z, x),  kron(x, z),  kron(z, z),  Matrix4(-kron(iy, iy))};
  }();
  return ops;
}

inline Coords coords(const Matrix4& rho) {
  Coords c{};
  const auto& ops = operators();
  for (std::size_t i = 0; i < 9; ++i) c[i] = (rho.cwiseProduct(ops[i])).sum();
  return c;
}

inline Matrix4 matrix(const Coords& c) {
  Matrix4 m = Matrix4::Identity();
  const auto& ops = operators();
  for (std::size_t i = 0; i < 9; ++i) m += c[i] * ops[i];
  return m / 4.0;
}

}  // namespace pauli

namespace detail {

/// Cell probabilities for one setting from the single and joint expectation values.
inline void fill_setting(CellProbabilities::Values& v, Setting s, const ExperimentParams& p,
                         double ea, double eb, double eab) {
  const double pa = 0.5 * (1.0 + ea), pb = 0.5 * (1.0 + eb);
  const double p_pp = 0.25 * (1.0 + ea + eb + eab);  // both projectors
  const double p_pn = 0.25 * (1.0 + ea - eb - eab);  // Alice yes, Bob no
  const double p_np = 0.25 * (1.0 - ea + eb - eab);
  const double g = p.gamma, na = p.eta_a, nb = p.eta_b;
  const double pp = g * na * nb * std::max(p_pp, 0.0);
  const double pn = g * na * ((1.0 - nb) * pa + nb * std::max(p_pn, 0.0));
  const double np = g * nb * ((1.0 - na) * pb + na * std::max(p_np, 0.0));
  v[cell(s, Outcome::plus_plus)] = pp;
  v[cell(s, Outcome::plus_null)] = pn;
  v[cell(s, Outcome::null_plus)] = np;
  v[cell(s, Outcome::null_null)] = 1.0 - (pp + pn + np);
}

}  // namespace detail

/// Detection probabilities for state coordinates x (YY is not needed).
inline ProbabilityVector probabilities_from_coords(const pauli::Coords& x, const ExperimentParams& p) {
  const double sa = std::sin(p.theta_a / 2), ca = std::cos(p.theta_a / 2);
  const double sb = std::sin(p.theta_b / 2), cb = std::cos(p.theta_b / 2);
  CellProbabilities::Values v{};
  for (auto s : all_settings) {
    const double s1 = alice_side(s) == 0 ? 1.0 : -1.0;
    const double s2 = bob_side(s) == 0 ? 1.0 : -1.0;
    const double ea = s1 * sa * x[0] + ca * x[1];
    const double eb = s2 * sb * x[2] + cb * x[3];
    const double eab = s1 * s2 * sa * sb * x[4] + ca * s2 * sb * x[5] + s1 * sa * cb * x[6] +
                       ca * cb * x[7];
    detail::fill_setting(v, s, p, ea, eb, eab);
  }
  return ProbabilityVector(CellProbabilities(v));
}

inline ProbabilityVector probabilities_from_state(const DensityMatrix& rho, const ExperimentParams& p) {
  return probabilities_from_coords(pauli::coords(rho.matrix()), p);
}

/// Operators whose expectation values are the sixteen cell probabilities.
inline std::array<Matrix4, 16> cell_operators(const ExperimentParams& p) {
  const auto sv = SettingVectors::from(p);
  const auto& ops = pauli::operators();
  auto projector = [&](const Eigen::Vector2d& d, int x_op, int z_op) {
    return Matrix4(0.5 * (Matrix4::Identity() + d.x() * ops[x_op] + d.y() * ops[z_op]));
  };
  std::array<Matrix4, 16> m;
  const Matrix4 id = Matrix4::Identity();
  for (auto s : all_settings) {
    const Matrix4 pa = projector(sv.alice[alice_side(s)], 0, 1);
    const Matrix4 pb = projector(sv.bob[bob_side(s)], 2, 3);
    const Matrix4 ya = p.eta_a * pa, yb = p.eta_b * pb;  // clicks given a pair
    m[cell(s, Outcome::plus_plus)] = p.gamma * ya * yb;
    m[cell(s, Outcome::plus_null)] = p.gamma * ya * (id - yb);
    m[cell(s, Outcome::null_plus)] = p.gamma * (id - ya) * yb;
    m[cell(s, Outcome::null_null)] = (1.0 - p.gamma) * id + p.gamma * (id - ya) * (id - yb);
  }
  return m;
}

inline DensityMatrix random_pure_state(Engine& engine) {
  std::normal_distribution<double> normal;
  Vector4 x;
  do {
    for (int i = 0; i < 4; ++i) x(i) = normal(engine);
  } while (x.squaredNorm() == 0.0);
  return DensityMatrix::pure(x);
}

inline DensityMatrix mix_states(const DensityMatrix& primary, const DensityMatrix& r2,
                                const DensityMatrix& r3, const DensityMatrix& r4, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0 / 3.0))
    throw Error(ErrorKind::InvalidArgument, "epsilon must lie in [0,1/3)");
  if (epsilon == 0.0) return primary;
  Matrix4 m = (1.0 - 3.0 * epsilon) * primary.matrix() +
              epsilon * (r2.matrix() + r3.matrix() + r4.matrix());
  m = 0.5 * (m + m.transpose()).eval();
  m /= m.trace();
  return DensityMatrix(m);
}

/// One QM prior draw: a random pure state mixed with three others.
inline ProbabilityVector qm_draw(const ExperimentParams& params, double epsilon, Engine& engine) {
  const DensityMatrix r1 = random_pure_state(engine), r2 = random_pure_state(engine),
                      r3 = random_pure_state(engine), r4 = random_pure_state(engine);
  return probabilities_from_state(mix_states(r1, r2, r3, r4, epsilon), params);
}

struct QmMembership {
  bool member = false;
  double slack = 0.0;  // max over t of the minimum eigenvalue
  double t = 0.0;      // maximizing <sigma_y x sigma_y>
};

inline constexpr double qm_psd_tolerance = -1e-9;

namespace detail {

inline double min_eig(const Matrix4& m) {
  Eigen::SelfAdjointEigenSolver<Matrix4> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// The eight coordinates X1..ZZ recovered from p (YY left at 0).
inline pauli::Coords recover_coords(const ProbabilityVector& p, const ExperimentParams& params) {
  const double sa = std::sin(params.theta_a / 2), ca = std::cos(params.theta_a / 2);
  const double sb = std::sin(params.theta_b / 2), cb = std::cos(params.theta_b / 2);
  const double ga = params.gamma * params.eta_a, gb = params.gamma * params.eta_b;
  const double gab = ga * params.eta_b;
  constexpr double tiny = 1e-13;
  if (std::abs(sa) < tiny || std::abs(ca) < tiny || std::abs(sb) < tiny || std::abs(cb) < tiny ||
      !(gab > 0.0))
    throw Error(ErrorKind::DegenerateGeometry, "singular probability map");
  const auto r = p.reduced();
  std::array<double, 2> ea{}, eb{};
  for (std::size_t i = 0; i < 2; ++i) {
    ea[i] = 2.0 * r.alice_plus[i] / ga - 1.0;
    eb[i] = 2.0 * r.bob_plus[i] / gb - 1.0;
  }
  // Joint values for each setting, indexed [alice side][bob side].
  double e[2][2];
  for (auto s : all_settings) {
    const auto i = alice_side(s), j = bob_side(s);
    e[i][j] = 4.0 * p(s, Outcome::plus_plus) / gab - 1.0 - ea[i] - eb[j];
  }
  pauli::Coords x{};
  x[0] = (ea[0] - ea[1]) / (2.0 * sa);
  x[1] = (ea[0] + ea[1]) / (2.0 * ca);
  x[2] = (eb[0] - eb[1]) / (2.0 * sb);
  x[3] = (eb[0] + eb[1]) / (2.0 * cb);
  x[4] = (e[0][0] - e[0][1] - e[1][0] + e[1][1]) / (4.0 * sa * sb);
  x[5] = (e[0][0] - e[0][1] + e[1][0] - e[1][1]) / (4.0 * ca * sb);
  x[6] = (e[0][0] + e[0][1] - e[1][0] - e[1][1]) / (4.0 * sa * cb);
  x[7] = (e[0][0] + e[0][1] + e[1][0] + e[1][1]) / (4.0 * ca * cb);
  x[8] = 0.0;
  return x;
}

/// Golden-section maximum of the concave f on [lo, hi] to the given width.
/// Stops early once a value reaches `good_enough`.
template <class F>
std::pair<double, double> golden_max(F&& f, double lo, double hi, double width,
                                     double good_enough = std::numeric_limits<double>::infinity()) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > width) {
    if (std::max(f1, f2) >= good_enough) break;
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = f(x1);
    }
  }
  return f1 >= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

}  // namespace detail

/// Full membership test: recovers rho_0 and maximizes its minimum eigenvalue
/// along the sigma_y x sigma_y direction.
inline QmMembership qm_membership(const ProbabilityVector& p, const ExperimentParams& params) {
  const Matrix4 rho0 = pauli::matrix(detail::recover_coords(p, params));
  const Matrix4 yy = pauli::operators()[8] / 4.0;
  auto f = [&](double t) { return detail::min_eig(rho0 + t * yy); };
  const auto [t, value] = detail::golden_max(f, -1.0, 1.0, 1e-12);
  return {value >= qm_psd_tolerance, value, t};
}

/// Boolean form with a cheap necessary-condition screen and early exit.
inline bool is_qm_member(const ProbabilityVector& p, const ExperimentParams& params) {
  const Matrix4 rho0 = pauli::matrix(detail::recover_coords(p, params));
  // YY only touches the anti-diagonal, so the diagonal and these 2x2 minors do not depend on t.
  for (int i = 0; i < 4; ++i)
    if (rho0(i, i) < qm_psd_tolerance) return false;
  constexpr int minors[4][2] = {{0, 1}, {0, 2}, {1, 3}, {2, 3}};
  for (const auto& ij : minors) {
    const int i = ij[0], j = ij[1];
    const double a = rho0(i, i), d = rho0(j, j), b = rho0(i, j);
    const double lmin = 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + b * b);
    if (lmin < qm_psd_tolerance) return false;
  }
  const Matrix4 yy = pauli::operators()[8] / 4.0;
  auto f = [&](double t) { return detail::min_eig(rho0 + t * yy); };
  if (f(0.0) >= qm_psd_tolerance) return true;
  const auto [t, value] = detail::golden_max(f, -1.0, 1.0, 1e-12, qm_psd_tolerance);
  return value >= qm_psd_tolerance;
}

/// Which quantity a target state extremizes.
struct TargetCriterion {
  enum class Kind { threshold_efficiency, max_violation };
  Kind kind = Kind::threshold_efficiency;
  // Efficiency the source was designed for; defaults to the params' efficiencies.
  std::optional<double> design_efficiency;
  // Restricts to states c|u0 u0> + s|u1 u1> with u0 = (cos phi, sin phi) in the
  // sigma_z eigenbasis; phi in radians.
  std::optional<double> schmidt_basis_offset;
  // max_violation only: the setting entering the CHSH sum with a minus sign, and the overall sign.
  Setting odd_setting = Setting::a_prime_b_prime;
  double sign = 1.0;

  static TargetCriterion threshold(std::optional<double> design_eta = std::nullopt,
                                   std::optional<double> basis_offset = std::nullopt) {
    return {Kind::threshold_efficiency, design_eta, basis_offset, Setting::a_prime_b_prime, 1.0};
  }
  static TargetCriterion max_violation(Setting odd = Setting::a_prime_b_prime, double sign = 1.0) {
    return {Kind::max_violation, std::nullopt, std::nullopt, odd, sign};
  }
};

/// Hermitian operator whose expectation value the target state maximizes.
inline Matrix4 target_operator(const ExperimentParams& params, const TargetCriterion& c) {
  ExperimentParams q = params;
  q.gamma = 1.0;
  if (c.design_efficiency) q.eta_a = q.eta_b = *c.design_efficiency;
  const auto m = cell_operators(q);
  if (c.kind == TargetCriterion::Kind::threshold_efficiency) {
    using enum Setting;
    return m[cell(ab, Outcome::plus_plus)] - m[cell(ab_prime, Outcome::plus_null)] -
           m[cell(a_prime_b, Outcome::null_plus)] - m[cell(a_prime_b_prime, Outcome::plus_plus)];
  }
  Matrix4 w = Matrix4::Zero();
  for (auto s : all_settings) {
    const Matrix4 corr = m[cell(s, Outcome::plus_plus)] + m[cell(s, Outcome::null_null)] -
                         m[cell(s, Outcome::plus_null)] - m[cell(s, Outcome::null_plus)];
    w += (s == c.odd_setting ? -1.0 : 1.0) * corr;
  }
  return c.sign * w;
}

/// Pure state maximizing the criterion's Bell operator. The objective is linear
/// in rho, so the maximizer is the top eigenvector (within the pinned Schmidt
/// subspace when requested).
inline DensityMatrix target_state(const ExperimentParams& params, const TargetCriterion& c) {
  Matrix4 w = target_operator(params, c);
  w = 0.5 * (w + w.transpose()).eval();
  Eigen::Matrix<double, 4, Eigen::Dynamic> basis;
  if (c.schmidt_basis_offset) {
    const double phi = *c.schmidt_basis_offset;
    const Eigen::Vector2d u0(std::cos(phi), std::sin(phi)), u1(-std::sin(phi), std::cos(phi));
    basis.resize(4, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        basis(2 * i + j, 0) = u0(i) * u0(j);
        basis(2 * i + j, 1) = u1(i) * u1(j);
      }
  } else {
    basis = Matrix4::Identity();
  }
  const Eigen::MatrixXd reduced = basis.transpose() * w * basis;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(reduced);
  const auto& ev = es.eigenvalues();
  const Eigen::Index top = ev.size() - 1;
  const double scale = std::max(1.0, std::abs(ev(top)));
  if (ev(top) - ev(top - 1) < 1e-8 * scale)
    throw Error(ErrorKind::ConvergenceFailure, "target state not unique");
  Vector4 psi = basis * es.eigenvectors().col(top);
  if (psi(0) < 0) psi = -psi;
  return DensityMatrix::pure(psi);
}

}  // namespace bellev

#endif  // BELLEV_QUANTUM_HPP
