#include "mtreg/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mtreg/errors.hpp"
#include "mtreg/rng.hpp"

namespace mtreg {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double halton(int index, int base) {
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * (index % base);
    index /= base;
  }
  return r;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
constexpr int kStarts = 8;

struct Objective {
  const Observable& obs;
  std::span<const double> measured;
  const std::vector<Interval>& box;
  std::shared_ptr<const StateSpace> space;
  mutable long evaluations = 0;

  std::vector<double> clamp(std::span<const double> p) const {
    std::vector<double> q(p.begin(), p.end());
    for (std::size_t d = 0; d < q.size(); ++d) {
      q[d] = std::clamp(q[d], box[d].lo, box[d].hi);
    }
    return q;
  }

  // Log density at the clamped point; -inf where the density vanishes.
  double operator()(std::span<const double> p) const {
    ++evaluations;
    const std::vector<double> q = clamp(p);
    const double lp =
        obs.log_density(measured, State(q, space));
    return std::isnan(lp) ? kNegInf : lp;
  }
};

struct Vertex {
  std::vector<double> x;
  double value = kNegInf;  // log density (maximized)
};

// One Nelder-Mead run from a given start; returns best vertex and whether
// the simplex collapsed below `tolerance` within the evaluation budget.
Vertex nelder_mead(const Objective& f, std::span<const double> start,
                   double step, double tolerance, long budget,
                   bool* converged) {
  const int n = static_cast<int>(start.size());
  std::vector<Vertex> simplex(n + 1);
  simplex[0].x.assign(start.begin(), start.end());
  for (int i = 1; i <= n; ++i) {
    simplex[i].x.assign(start.begin(), start.end());
    const double span = f.box[i - 1].hi - f.box[i - 1].lo;
    double delta = step * span;
    if (delta == 0.0) delta = 1e-8;
    // Step towards the interior so the vertex stays in the box.
    if (simplex[i].x[i - 1] + delta > f.box[i - 1].hi) delta = -delta;
    simplex[i].x[i - 1] += delta;
  }
  for (auto& v : simplex) {
    v.x = f.clamp(v.x);
    v.value = f(v.x);
  }
  auto better = [](const Vertex& a, const Vertex& b) {
    return a.value > b.value;
  };
  const long start_evals = f.evaluations;
  *converged = false;
  while (f.evaluations - start_evals < budget) {
    std::stable_sort(simplex.begin(), simplex.end(), better);
    // Convergence: simplex coordinate diameter below tolerance.
    double diameter = 0.0;
    for (int i = 1; i <= n; ++i) {
      for (int d = 0; d < n; ++d) {
        diameter = std::max(diameter,
                            std::abs(simplex[i].x[d] - simplex[0].x[d]));
      }
    }
    if (diameter < tolerance) {
      *converged = true;
      break;
    }
    // Centroid of all but the worst.
    std::vector<double> centroid(n, 0.0);
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < n; ++d) centroid[d] += simplex[i].x[d];
    }
    for (double& c : centroid) c /= n;
    const Vertex& worst = simplex[n];
    auto along = [&](double coef) {
      std::vector<double> p(n);
      for (int d = 0; d < n; ++d) {
        p[d] = centroid[d] + coef * (centroid[d] - worst.x[d]);
      }
      Vertex v;
      v.x = f.clamp(p);
      v.value = f(v.x);
      return v;
    };
    Vertex reflected = along(1.0);
    if (reflected.value > simplex[0].value) {
      Vertex expanded = along(2.0);
      simplex[n] = expanded.value > reflected.value ? expanded : reflected;
      continue;
    }
    if (reflected.value > simplex[n - 1].value) {
      simplex[n] = reflected;
      continue;
    }
    Vertex contracted = along(reflected.value > worst.value ? 0.5 : -0.5);
    if (contracted.value > std::max(reflected.value, worst.value)) {
      simplex[n] = contracted;
      continue;
    }
    // Shrink towards the best vertex.
    for (int i = 1; i <= n; ++i) {
      for (int d = 0; d < n; ++d) {
        simplex[i].x[d] = simplex[0].x[d] +
                          0.5 * (simplex[i].x[d] - simplex[0].x[d]);
      }
      simplex[i].x = f.clamp(simplex[i].x);
      simplex[i].value = f(simplex[i].x);
    }
  }
  std::stable_sort(simplex.begin(), simplex.end(), better);
  return simplex[0];
}

}  // namespace

MLEResult mle_generic(const LikelihoodProblem& problem, double tolerance,
                      long max_evaluations) {
  const Observable& obs = problem.observable;
  const int dim = obs.state_space().dims();
  if (static_cast<int>(problem.search_box.size()) != dim) {
    throw DomainError("mle_generic: search box must have one interval per "
                      "state coordinate");
  }
  if (static_cast<int>(problem.measured.size()) != obs.value_dim()) {
    throw DomainError("mle_generic: measured value has wrong dimension");
  }
  if (dim > static_cast<int>(std::size(kPrimes))) {
    throw DomainError("mle_generic: state dimension too large for the start "
                      "grid");
  }
  for (int d = 0; d < dim; ++d) {
    const Interval& b = problem.search_box[d];
    if (!b.valid() || std::isinf(b.lo) || std::isinf(b.hi) || !(b.lo < b.hi)) {
      throw DomainError("mle_generic: search box intervals must be finite "
                        "with positive length");
    }
    const Interval& bound = obs.state_space().bounds()[d];
    const bool pos = obs.state_space().positivity()[d];
    if (b.lo < bound.lo || b.hi > bound.hi || (pos && !(b.lo > 0.0))) {
      throw DomainError("mle_generic: search box must lie inside the state "
                        "space");
    }
  }
  if (!(tolerance > 0.0)) {
    throw DomainError("mle_generic: tolerance must be positive");
  }
  if (max_evaluations < kStarts * (dim + 2)) {
    throw DomainError("mle_generic: evaluation budget too small");
  }

  Objective f{obs, problem.measured, problem.search_box,
              std::make_shared<const StateSpace>(obs.state_space())};

  // Deterministic scrambled low-discrepancy start grid: Halton points with a
  // fixed per-coordinate rotation, mapped into the box.
  Vertex best;
  bool best_converged = false;
  const long budget = max_evaluations / kStarts;
  for (int s = 0; s < kStarts; ++s) {
    std::vector<double> start(dim);
    for (int d = 0; d < dim; ++d) {
      const double rot =
          static_cast<double>(rng::mix64(static_cast<std::uint64_t>(d) + 101)) /
          18446744073709551616.0;  // 2^64
      double u = halton(s + 1, kPrimes[d]) + rot;
      u -= std::floor(u);
      // Keep starts off the exact boundary.
      u = 0.02 + 0.96 * u;
      start[d] = problem.search_box[d].lo +
                 u * (problem.search_box[d].hi - problem.search_box[d].lo);
    }
    bool converged = false;
    Vertex v = nelder_mead(f, start, 0.15, tolerance, budget, &converged);
    if (v.value > best.value) {
      best = v;
      best_converged = converged;
    }
  }
  if (best.value == kNegInf || std::isnan(best.value)) {
    throw NoMaximizerError(
        "mle_generic: density vanishes on the entire search box");
  }
  return MLEResult{State(f.clamp(best.x), f.space), best.value,
                   best_converged, f.evaluations};
}

std::pair<double, double> mle_normal_closed_form(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) {
    throw DomainError("mle_normal_closed_form: needs at least one value");
  }
  double sum = 0.0;
  for (double v : x) sum += v;
  const double mu = sum / static_cast<double>(n);
  double ssd = 0.0;
  for (double v : x) ssd += (v - mu) * (v - mu);
  const double sigma = std::sqrt(ssd / static_cast<double>(n));
  return {mu, sigma};
}

double likelihood_ratio(const Observable& obs, std::span<const double> x,
                        const State& omega, double sup_density) {
  if (!(sup_density > 0.0)) {
    throw DomainError("likelihood_ratio: sup_density must be positive");
  }
  return obs.density(x, omega) / sup_density;
}

}  // namespace mtreg
