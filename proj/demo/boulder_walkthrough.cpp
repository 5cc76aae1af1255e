// Walks through the Boulder five-trigger run: likelihood maxima, the best gamma,
// a small prior sample, posterior contents and the Bhattacharyya triangle.
//
//   bellev_demo [points per prior component]

#include <cstdlib>
#include <iostream>

#include "bellev/bellev.hpp"

int main(int argc, char** argv) {
  using namespace bellev;
  const std::uint64_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 20000;

  const auto data = load_dataset("boulder-5");
  std::cout << "Boulder run with five trigger signals, N = " << data.counts.total() << "\n\n";

  const auto nominal = *find_preset("boulder");
  const auto criterion = *data.target;

  // The detection probability per trigger is calibrated from the data.
  GammaScanOptions go;
  go.grid = 21;
  go.with_lhv = false;
  const auto est = estimate_gamma(data.counts, nominal, 0.0005, 0.0009, std::nullopt, go);
  std::cout << "best gamma " << format_g(est.gamma_hat, 4) << "\n\n";

  const auto params = nominal.with_gamma(est.gamma_hat);
  const auto qm = qm_mle(data.counts, params);
  const auto lhv = lhv_mle(data.counts, params);
  const auto ns = nosignaling_mle(data.counts, params);
  std::cout << "log10 of the maximal likelihood\n"
            << "  QM           " << format_f(qm.log10_likelihood(), 2) << "\n"
            << "  LHV          " << format_f(lhv.log10_likelihood(), 2) << "\n"
            << "  no-signaling " << format_f(ns.log10_likelihood(), 2) << "\n"
            << "  Eberhard violation of the QM estimate " << format_g(bell_violation(qm.p.cells()), 3) << "\n\n";

  const auto target = probabilities_from_state(target_state(params, criterion), params);
  std::cout << probability_table({{"frequency", relative_frequencies(data.counts)},
                                  {"target", target.cells()},
                                  {"QM-MLE", qm.p.cells()},
                                  {"LHV-MLE", lhv.p.cells()}})
            << "\n";

  const auto tri = triangle_report(data.counts, params, criterion);
  std::cout << "Bhattacharyya angles: frequencies-target " << format_f(tri.freq_target, 4)
            << ", frequencies-QM " << format_f(tri.freq_qm, 4) << ", target-QM " << format_f(tri.target_qm, 4)
            << "\n\n";

  std::cout << "building a prior with " << n << " points per component...\n";
  const auto prior = build_prior(params, n, 0.001, 1);
  std::cout << prior_table(prior) << "\n";
  auto report = posterior_contents(prior, data.counts);
  report.dataset = data.name;
  std::cout << evidence_table(report);
  return 0;
}
