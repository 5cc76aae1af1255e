#include <gtest/gtest.h>

#include "support.hpp"

using namespace bellev;

namespace {

/// Random no-signaling point: uniform singles, joint clicks uniform between
/// the bounds that keep every cell in [0, 1].
ProbabilityVector random_nosignaling(Engine& e) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ReducedProbabilities r;
  for (auto& x : r.alice_plus) x = u(e);
  for (auto& x : r.bob_plus) x = u(e);
  for (auto s : all_settings) {
    const double pa = r.alice_plus[alice_side(s)], pb = r.bob_plus[bob_side(s)];
    const double lo = std::max(0.0, pa + pb - 1.0), hi = std::min(pa, pb);
    r.null_event[index(s)] = 1.0 - pa - pb + (lo + (hi - lo) * u(e));
  }
  return reconstruct_full(r);
}

HiddenWeights::Values random_weights(Engine& e) {
  std::exponential_distribution<double> x(1.0);
  HiddenWeights::Values w{};
  double sum = 0.0;
  for (auto& v : w) sum += (v = x(e));
  for (auto& v : w) v /= sum;
  return w;
}

EventCounts random_counts(Engine& e, std::uint64_t top) {
  std::uniform_int_distribution<std::uint64_t> n(1, top);
  EventCounts::Values v{};
  for (auto& x : v) x = n(e);
  return EventCounts(v);
}

}  // namespace

TEST(Properties, NoSignalingRoundTrip) {
  Engine e = substream(50, StreamComponent::test, 0);
  for (int i = 0; i < 10000; ++i) {
    const auto p = random_nosignaling(e);
    const auto r = p.reduced();
    const auto back = reduce(reconstruct_full(r));
    for (std::size_t k = 0; k < 8; ++k) ASSERT_NEAR(back[k], r[k], 1e-12) << i;
    for (auto s : all_settings) {
      double sum = 0.0;
      for (auto o : all_outcomes) sum += p(s, o);
      ASSERT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(Properties, LikelihoodRatioIgnoresTheCombinatorialFactor) {
  Engine e = substream(51, StreamComponent::test, 0);
  for (int i = 0; i < 200; ++i) {
    const auto d = random_counts(e, 1000000);
    const auto p = random_nosignaling(e), q = random_nosignaling(e);
    long double direct = 0.0L;
    for (std::size_t k = 0; k < 16; ++k)
      direct += static_cast<long double>(d[k]) * (std::log(static_cast<long double>(p[k])) -
                                                  std::log(static_cast<long double>(q[k])));
    const double diff = log_likelihood(d, p) - log_likelihood(d, q);
    EXPECT_NEAR(diff, static_cast<double>(direct), 1e-9 * (1.0 + std::abs(diff)) + 1e-15 * std::abs(static_cast<double>(d.log_combinatorial())));
  }
}

TEST(Properties, QuantumMapIsAffine) {
  Engine e = substream(52, StreamComponent::test, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto params = *find_preset("delft");
  for (int i = 0; i < 1000; ++i) {
    const auto r1 = random_pure_state(e), r2 = random_pure_state(e);
    const double l = u(e);
    Matrix4 m = l * r1.matrix() + (1.0 - l) * r2.matrix();
    m = 0.5 * (m + m.transpose()).eval();
    m /= m.trace();
    const auto mixed = probabilities_from_state(DensityMatrix(m), params);
    const auto a = probabilities_from_state(r1, params), b = probabilities_from_state(r2, params);
    for (std::size_t k = 0; k < 16; ++k) ASSERT_NEAR(mixed[k], l * a[k] + (1.0 - l) * b[k], 1e-14);
  }
}

TEST(Properties, LocalMapIsAffine) {
  Engine e = substream(53, StreamComponent::test, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const auto w1 = random_weights(e), w2 = random_weights(e);
    const double l = u(e);
    HiddenWeights::Values w{};
    double sum = 0.0;
    for (std::size_t k = 0; k < 16; ++k) sum += (w[k] = l * w1[k] + (1.0 - l) * w2[k]);
    for (auto& x : w) x /= sum;
    const auto mixed = probabilities_from_weights(HiddenWeights(w));
    const auto a = probabilities_from_weights(HiddenWeights(w1)), b = probabilities_from_weights(HiddenWeights(w2));
    for (std::size_t k = 0; k < 16; ++k) ASSERT_NEAR(mixed[k], l * a[k] + (1.0 - l) * b[k], 1e-14);
  }
}

TEST(Properties, SampledStatesAreQuantumMembers) {
  Engine e = substream(54, StreamComponent::test, 0);
  for (const char* name : {"boulder", "vienna", "delft", "munich"}) {
    const auto params = *find_preset(name);
    for (int i = 0; i < 1000; ++i) {
      const auto m = qm_membership(qm_draw(params, 0.001, e), params);
      ASSERT_GE(m.slack, qm_psd_tolerance) << name << " " << i;
      ASSERT_TRUE(m.member);
    }
  }
}

TEST(Properties, MinimumEigenvalueIsConcaveAlongTheFreeDirection) {
  Engine e = substream(55, StreamComponent::test, 0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Matrix4 yy = pauli::operators()[8] / 4.0;
  for (int i = 0; i < 1000; ++i) {
    pauli::Coords c{};
    for (std::size_t k = 0; k < 8; ++k) c[k] = u(e);
    const Matrix4 rho0 = pauli::matrix(c);
    std::array<double, 3> t{u(e), u(e), u(e)};
    std::sort(t.begin(), t.end());
    if (t[2] - t[0] < 1e-6) continue;
    auto f = [&](double x) { return detail::min_eig(rho0 + x * yy); };
    const double chord = ((t[2] - t[1]) * f(t[0]) + (t[1] - t[0]) * f(t[2])) / (t[2] - t[0]);
    ASSERT_GE(f(t[1]), chord - 1e-10) << i;
  }
}

TEST(Properties, QuantumSingleSettingMarginalLaw) {
  const auto params = ExperimentParams::from_degrees(1.0, 60, 60, 1.0, 1.0);
  Engine e = substream(56, StreamComponent::test, 0);
  std::vector<std::array<double, 4>> q;
  for (int i = 0; i < 100000; ++i) {
    const auto p = probabilities_from_state(random_pure_state(e), params);
    q.push_back({p(Setting::ab, Outcome::plus_plus), p(Setting::ab, Outcome::plus_null),
                 p(Setting::ab, Outcome::null_plus), p(Setting::ab, Outcome::null_null)});
  }
  EXPECT_LT(support::dirichlet_half_chi_square(q), support::chi_square_63_one_percent);
}

TEST(Properties, ClassifierConsistency) {
  const auto params = *find_preset("delft");
  Engine e = substream(57, StreamComponent::test, 0);
  LhvDrawStats stats;
  int violating = 0;
  for (int i = 0; i < 10000; ++i) {
    ASSERT_TRUE(lhv_membership(lhv_draw(params, 0.001, e, stats), params)) << i;
    const auto q = qm_draw(params, 0.001, e);
    if (bell_violation(q) > 0.0) {
      ++violating;
      ASSERT_FALSE(lhv_membership(q, params)) << i;
    }
  }
  EXPECT_GT(violating, 100);
}

TEST(Properties, QuantumFactorGradient) {
  const auto params = *find_preset("delft");
  Engine e = substream(58, StreamComponent::test, 0);
  std::normal_distribution<double> g;
  for (int i = 0; i < 100; ++i) {
    const auto d = random_counts(e, 1000);
    Matrix4 a;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) a(r, c) = g(e);
    const Matrix4 grad = qm_factor_gradient(d, params, a);
    Matrix4 fd;
    const double h = 1e-5;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        Matrix4 ap = a, am = a;
        ap(r, c) += h;
        am(r, c) -= h;
        fd(r, c) = (qm_factor_objective(d, params, ap) - qm_factor_objective(d, params, am)) / (2 * h);
      }
    ASSERT_LT((fd - grad).cwiseAbs().maxCoeff(), 1e-6 * grad.cwiseAbs().maxCoeff()) << i;
  }
}

TEST(Properties, LocalWeightGradient) {
  Engine e = substream(59, StreamComponent::test, 0);
  for (int i = 0; i < 100; ++i) {
    const auto d = random_counts(e, 1000);
    const auto w = random_weights(e);
    const auto grad = lhv_weight_gradient(d, w);
    double worst = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < 16; ++k) {
      const double h = 1e-6 * w[k];
      auto wp = w, wm = w;
      wp[k] += h;
      wm[k] -= h;
      const double fd = (lhv_weight_objective(d, wp) - lhv_weight_objective(d, wm)) / (2 * h);
      worst = std::max(worst, std::abs(fd - grad[k]));
      scale = std::max(scale, std::abs(grad[k]));
    }
    ASSERT_LT(worst, 1e-6 * scale) << i;
  }
}

TEST(Properties, BhattacharyyaAngleIsAMetric) {
  Engine e = substream(60, StreamComponent::test, 0);
  for (int i = 0; i < 10000; ++i) {
    const auto p = random_nosignaling(e), q = random_nosignaling(e), r = random_nosignaling(e);
    const double pq = bhattacharyya_angle(p, q, 1.0), qp = bhattacharyya_angle(q, p, 1.0);
    const double qr = bhattacharyya_angle(q, r, 1.0), pr = bhattacharyya_angle(p, r, 1.0);
    ASSERT_NEAR(pq, qp, 1e-12);
    ASSERT_LE(pr, pq + qr + 1e-12);
    ASSERT_GE(pq, 0.0);
  }
}

TEST(Properties, BarrierStepsNeverIncreaseThePenalizedObjective) {
  for (const auto& b : bundled_datasets()) {
    const auto params = *b.params();
    for (const auto& r : {qm_mle(b.counts, params), lhv_mle(b.counts, params), nosignaling_mle(b.counts, params)}) {
      ASSERT_FALSE(r.diagnostics.penalized.empty()) << b.name;
      for (const auto& stage : r.diagnostics.penalized)
        for (std::size_t k = 1; k < stage.size(); ++k) ASSERT_LE(stage[k], stage[k - 1]) << b.name;
    }
  }
}

TEST(Properties, PosteriorWithoutDataIsThePrior) {
  const auto s = build_prior(*find_preset("munich"), 500, 0.001, 62);
  const auto r = posterior_contents(s, EventCounts());
  for (auto g : all_regions) EXPECT_EQ(r[g].posterior, s.contents[g]);
}

TEST(Properties, PosteriorSumsToOne) {
  const auto s = build_prior(*find_preset("delft"), 2000, 0.001, 63);
  Engine e = substream(64, StreamComponent::test, 0);
  for (int i = 0; i < 50; ++i) {
    const auto d = simulate_data(s.points[i * 40].p, 300, e);
    const auto r = posterior_contents(s, d);
    double sum = 0.0;
    for (auto g : all_regions) sum += r[g].posterior;
    ASSERT_NEAR(sum, 1.0, 1e-9);
  }
}
