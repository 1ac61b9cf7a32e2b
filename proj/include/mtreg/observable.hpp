#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "mtreg/event.hpp"
#include "mtreg/statespace.hpp"

namespace mtreg {

enum class ObservableTag { normal, product, image, pullback, composite, custom };

// How a normal observable obtains its scale: a fixed constant, or a
// positivity-masked coordinate of the state.
struct SigmaMode {
  static SigmaMode fixed(double sigma) { return {true, sigma, -1}; }
  static SigmaMode state_coordinate(int index) { return {false, 0.0, index}; }

  bool is_fixed = true;
  double sigma = 1.0;
  int index = -1;
};

namespace detail {
class ObservableImpl;
}

// Probability with an attached Monte Carlo standard error; closed-form
// evaluations report std_error = 0.
struct ProbEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// A density-represented observable: measured-value space R^d plus a kernel
// p(x | omega) and event probabilities over finite rectangle unions.
// Immutable and cheap to copy.
class Observable {
public:
  int value_dim() const;
  const StateSpace& state_space() const;
  ObservableTag tag() const;

  double density(std::span<const double> x, const State& omega) const;
  double log_density(std::span<const double> x, const State& omega) const;

  double event_prob(const Event& xi, const State& omega) const;
  ProbEstimate event_prob_se(const Event& xi, const State& omega) const;

  bool has_sampler() const;
  std::vector<std::vector<double>> sample(const State& omega,
                                          std::uint64_t seed, int count) const;

  Observable with_tag(ObservableTag t) const;

  // internal
  explicit Observable(std::shared_ptr<const detail::ObservableImpl> impl,
                      ObservableTag tag);
  const detail::ObservableImpl& impl() const { return *impl_; }

private:
  std::shared_ptr<const detail::ObservableImpl> impl_;
  ObservableTag tag_;
};

// Normal observable on X = R. The mean is state coordinate 0; sigma comes
// from the mode. fixed(s) lives on R, state_coordinate(i) on R^i x R_+.
Observable make_normal_observable(SigmaMode mode);

// Simultaneous observable of parts sharing one state space: probabilities
// multiply over per-part coordinate blocks.
Observable product_observable(std::vector<Observable> parts);

using PointMap = std::function<std::vector<double>(std::span<const double>)>;
using StateDensity =
    std::function<double(std::span<const double>, const State&)>;

struct McConfig {
  std::uint64_t seed = 0;
  int samples = 100000;
};

// Image observable with a supplied closed-form image density (integrated by
// adaptive quadrature; image must be one-dimensional).
Observable image_observable(const Observable& base, PointMap map,
                            int image_dim, StateDensity image_density);

// Image observable evaluated by seeded Monte Carlo through the base sampler.
Observable image_observable(const Observable& base, PointMap map,
                            int image_dim, McConfig mc);

// Built-in closed form for the sample-mean image of the count-fold normal:
// normal with the same mean and scale sigma / sqrt(count).
Observable make_sample_mean_image(int count, SigmaMode mode);

// One-dimensional observable from a raw density kernel; event probabilities
// go through adaptive quadrature (relative tolerance 1e-10).
Observable make_custom_observable(StateSpace space, StateDensity density);

// Evaluates the observable as a new observable on `source`, reading the
// state through `state_map` first. Building block for causal pullbacks.
Observable compose_with_state_map(const Observable& inner, StateSpace source,
                                  std::function<State(const State&)> state_map);

// Draws `count` i.i.d. measured values at state omega. Deterministic in
// `seed` and independent of any global RNG.
std::vector<std::vector<double>> sample_measurement(const Observable& obs,
                                                    const State& omega,
                                                    std::uint64_t seed,
                                                    int count);

}  // namespace mtreg
