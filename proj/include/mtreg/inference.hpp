#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mtreg/observable.hpp"
#include "mtreg/statespace.hpp"

namespace mtreg {

// A measured value together with the observable it came from and a finite
// box to search for the density-maximizing state.
struct LikelihoodProblem {
  Observable observable;
  std::vector<double> measured;
  std::vector<Interval> search_box;  // one finite interval per state coordinate
};

struct MLEResult {
  State estimate;
  double log_density = 0.0;
  bool converged = false;
  long evaluations = 0;
};

// Maximizes omega -> p(measured | omega) over the search box by multi-start
// Nelder-Mead (8 deterministic starts on a scrambled low-discrepancy grid).
// Deterministic: equal inputs give bitwise-equal results.
MLEResult mle_generic(const LikelihoodProblem& problem,
                      double tolerance = 1e-10, long max_evaluations = 40000);

// Closed-form normal MLE: mean and scale of the n-fold product observable,
// mu_hat = average, sigma_hat = sqrt of the divisor-n mean square deviation.
std::pair<double, double> mle_normal_closed_form(std::span<const double> x);

// density(x | omega) / sup_density; the caller supplies the supremum (for
// example from mle_generic or a closed form). sup_density must be positive.
double likelihood_ratio(const Observable& obs, std::span<const double> x,
                        const State& omega, double sup_density);

}  // namespace mtreg
