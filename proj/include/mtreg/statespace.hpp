#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "mtreg/errors.hpp"

namespace mtreg {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Closed interval with explicit +/-inf endpoints. Open vs. closed endpoints
// are not tracked: every distribution in this library has a density, so
// boundaries carry no probability.
struct Interval {
  double lo = -kInf;
  double hi = kInf;

  static Interval whole() { return {-kInf, kInf}; }
  static Interval le(double b) { return {-kInf, b}; }
  static Interval ge(double a) { return {a, kInf}; }

  bool valid() const {
    return !std::isnan(lo) && !std::isnan(hi) && lo < kInf && hi > -kInf &&
           lo <= hi;
  }
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool operator==(const Interval&) const = default;
};

// Parameter domain: a box in R^k, optionally with strict positivity on
// selected coordinates (e.g. a scale parameter).
class StateSpace {
public:
  StateSpace(std::vector<Interval> bounds, std::vector<bool> positivity)
      : bounds_(std::move(bounds)), positivity_(std::move(positivity)) {
    validate();
  }

  explicit StateSpace(std::vector<Interval> bounds)
      : bounds_(std::move(bounds)), positivity_(bounds_.size(), false) {
    validate();
  }

  // R^k
  static StateSpace real(int dims) {
    return StateSpace(std::vector<Interval>(check_dims(dims), Interval::whole()));
  }

  // R^{dims-1} x R_+ with the last coordinate strictly positive.
  static StateSpace real_with_positive_last(int dims) {
    std::vector<Interval> b(check_dims(dims), Interval::whole());
    b.back() = Interval{0.0, kInf};
    std::vector<bool> mask(dims, false);
    mask.back() = true;
    return StateSpace(std::move(b), std::move(mask));
  }

  int dims() const { return static_cast<int>(bounds_.size()); }
  const std::vector<Interval>& bounds() const { return bounds_; }
  const std::vector<bool>& positivity() const { return positivity_; }
  bool positive(int i) const { return positivity_[static_cast<std::size_t>(i)]; }

  bool admits(std::span<const double> coords) const {
    if (coords.size() != bounds_.size()) return false;
    for (std::size_t i = 0; i < bounds_.size(); ++i) {
      double x = coords[i];
      if (std::isnan(x) || !bounds_[i].contains(x)) return false;
      if (positivity_[i] && x <= 0.0) return false;
    }
    return true;
  }

  // Same parameter domain, not same object: observables built on two
  // structurally equal spaces are compatible.
  bool operator==(const StateSpace&) const = default;

private:
  void validate() const {
    if (bounds_.empty()) throw DomainError("StateSpace: dims must be >= 1");
    if (positivity_.size() != bounds_.size())
      throw DomainError("StateSpace: positivity mask length mismatch");
    for (std::size_t i = 0; i < bounds_.size(); ++i) {
      if (!bounds_[i].valid())
        throw DomainError("StateSpace: empty or invalid bound interval");
      if (positivity_[i] && bounds_[i].lo < 0.0)
        throw DomainError(
            "StateSpace: positivity-masked coordinate needs lower bound >= 0");
    }
  }
  static int check_dims(int dims) {
    if (dims < 1) throw DomainError("StateSpace: dims must be >= 1");
    return dims;
  }

  std::vector<Interval> bounds_;
  std::vector<bool> positivity_;
};

// A point of a state space. Validated against bounds and positivity on
// construction, so any State in flight is admissible.
class State {
public:
  State(std::vector<double> coords, StateSpace space)
      : coords_(std::move(coords)), space_(std::make_shared<StateSpace>(std::move(space))) {
    if (!space_->admits(coords_))
      throw DomainError("State: coordinates violate the state space");
  }

  State(std::vector<double> coords, std::shared_ptr<const StateSpace> space)
      : coords_(std::move(coords)), space_(std::move(space)) {
    if (!space_->admits(coords_))
      throw DomainError("State: coordinates violate the state space");
  }

  const std::vector<double>& coords() const { return coords_; }
  double operator[](int i) const { return coords_[static_cast<std::size_t>(i)]; }
  int dims() const { return static_cast<int>(coords_.size()); }
  const StateSpace& space() const { return *space_; }
  std::shared_ptr<const StateSpace> space_ptr() const { return space_; }

private:
  std::vector<double> coords_;
  std::shared_ptr<const StateSpace> space_;
};

}  // namespace mtreg
