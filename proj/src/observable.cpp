#include "mtreg/observable.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include "mtreg/errors.hpp"
#include "mtreg/rng.hpp"

namespace mtreg {
namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818684759;
constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490392848;

// P[lo <= Z <= hi] for Z ~ N(mu, sigma), arranged around erf/erfc so that
// neither deep tail loses precision to cancellation.
double gauss_interval_prob(double mu, double sigma, double lo, double hi) {
  if (!(sigma > 0.0)) throw DomainError("gauss_interval_prob: sigma must be positive");
  if (!(lo <= hi)) return 0.0;
  const bool lo_inf = std::isinf(lo) && lo < 0.0;
  const bool hi_inf = std::isinf(hi) && hi > 0.0;
  if (lo_inf && hi_inf) return 1.0;
  const double za = lo_inf ? 0.0 : (lo - mu) / sigma * kInvSqrt2;
  const double zb = hi_inf ? 0.0 : (hi - mu) / sigma * kInvSqrt2;
  double p = 0.0;
  if (lo_inf) {
    p = 0.5 * std::erfc(-zb);
  } else if (hi_inf) {
    p = 0.5 * std::erfc(za);
  } else if (za >= 0.0) {
    p = 0.5 * (std::erfc(za) - std::erfc(zb));
  } else if (zb <= 0.0) {
    p = 0.5 * (std::erfc(-zb) - std::erfc(-za));
  } else {
    p = 0.5 * (std::erf(zb) - std::erf(za));
  }
  return std::clamp(p, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature over possibly unbounded intervals.

double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double fa,
             double b, double fb, double m, double fm, double whole,
             double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(a, fa, m, fm, flm);
  const double right = simpson(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adapt(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adapt(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

double integrate_finite(const std::function<double(double)>& f, double a,
                        double b, double rel_tol) {
  if (!(a < b)) return 0.0;
  // Seed the recursion from a coarse composite pass so narrow features
  // between the initial Simpson nodes are not missed.
  constexpr int kSeed = 16;
  double coarse = 0.0;
  std::vector<double> xs(kSeed + 1), fs(kSeed + 1);
  for (int i = 0; i <= kSeed; ++i) {
    xs[i] = a + (b - a) * static_cast<double>(i) / kSeed;
    fs[i] = f(xs[i]);
  }
  double scale = 0.0;
  for (int i = 0; i < kSeed; ++i) {
    scale += std::abs(fs[i]) * (xs[i + 1] - xs[i]);
  }
  const double tol = std::max(rel_tol * std::max(scale, 1e-300),
                              std::numeric_limits<double>::min());
  for (int i = 0; i < kSeed; ++i) {
    const double m = 0.5 * (xs[i] + xs[i + 1]);
    const double fm = f(m);
    const double whole = simpson(xs[i], fs[i], xs[i + 1], fs[i + 1], fm);
    coarse += adapt(f, xs[i], fs[i], xs[i + 1], fs[i + 1], m, fm, whole,
                    tol / kSeed, 48);
  }
  return coarse;
}

// Maps unbounded integration ranges onto finite parameter intervals.
double integrate_interval(const std::function<double(double)>& f, double lo,
                          double hi, double rel_tol) {
  const bool lo_inf = std::isinf(lo);
  const bool hi_inf = std::isinf(hi);
  if (!lo_inf && !hi_inf) return integrate_finite(f, lo, hi, rel_tol);
  if (lo_inf && hi_inf) {
    // x = t / (1 - t^2), dx = (1 + t^2) / (1 - t^2)^2 dt, t in (-1, 1).
    auto g = [&f](double t) {
      const double d = 1.0 - t * t;
      if (d <= 0.0) return 0.0;
      const double x = t / d;
      const double w = (1.0 + t * t) / (d * d);
      const double v = f(x) * w;
      return std::isfinite(v) ? v : 0.0;
    };
    return integrate_finite(g, -1.0, 1.0, rel_tol);
  }
  if (hi_inf) {
    // x = lo + t / (1 - t), dx = dt / (1 - t)^2, t in [0, 1).
    auto g = [&f, lo](double t) {
      const double d = 1.0 - t;
      if (d <= 0.0) return 0.0;
      const double x = lo + t / d;
      const double v = f(x) / (d * d);
      return std::isfinite(v) ? v : 0.0;
    };
    return integrate_finite(g, 0.0, 1.0, rel_tol);
  }
  // x = hi - t / (1 - t), mirrored half-line.
  auto g = [&f, hi](double t) {
    const double d = 1.0 - t;
    if (d <= 0.0) return 0.0;
    const double x = hi - t / d;
    const double v = f(x) / (d * d);
    return std::isfinite(v) ? v : 0.0;
  };
  return integrate_finite(g, 0.0, 1.0, rel_tol);
}

constexpr double kQuadRelTol = 1e-10;

}  // namespace

namespace detail {

class ObservableImpl {
public:
  ObservableImpl(int value_dim, std::shared_ptr<const StateSpace> space)
      : value_dim_(value_dim), space_(std::move(space)) {}
  virtual ~ObservableImpl() = default;

  int value_dim() const { return value_dim_; }
  const StateSpace& space() const { return *space_; }
  const std::shared_ptr<const StateSpace>& space_ptr() const { return space_; }

  virtual double density(std::span<const double> x, const State& w) const = 0;
  virtual double log_density(std::span<const double> x, const State& w) const {
    return std::log(density(x, w));
  }
  virtual ProbEstimate event_prob(const Event& xi, const State& w) const = 0;
  virtual bool has_sampler() const { return false; }
  // Row-major draws: count rows of value_dim coordinates.
  virtual void sample_into(const State&, std::uint64_t, int,
                           std::span<double>) const {
    throw UnsupportedSamplingError("observable has no sampler");
  }

private:
  int value_dim_;
  std::shared_ptr<const StateSpace> space_;
};

}  // namespace detail

namespace {

using detail::ObservableImpl;

void check_point_dim(std::span<const double> x, int dim, const char* who) {
  if (static_cast<int>(x.size()) != dim) {
    throw DomainError(std::string(who) + ": measured value has dimension " +
                      std::to_string(x.size()) + ", observable expects " +
                      std::to_string(dim));
  }
}

void check_state(const State& w, const StateSpace& space, const char* who) {
  if (!(w.space() == space)) {
    throw DomainError(std::string(who) +
                      ": state does not live on the observable's state space");
  }
}

void check_event_dim(const Event& xi, int dim, const char* who) {
  if (xi.dim() != dim) {
    throw DomainError(std::string(who) + ": event has dimension " +
                      std::to_string(xi.dim()) + ", observable expects " +
                      std::to_string(dim));
  }
}

// --- normal ----------------------------------------------------------------

class NormalImpl final : public ObservableImpl {
public:
  NormalImpl(SigmaMode mode, std::shared_ptr<const StateSpace> space)
      : ObservableImpl(1, std::move(space)), mode_(mode) {}

  double sigma_of(const State& w) const {
    return mode_.is_fixed ? mode_.sigma : w[mode_.index];
  }

  double density(std::span<const double> x, const State& w) const override {
    const double s = sigma_of(w);
    const double z = (x[0] - w[0]) / s;
    return kInvSqrt2Pi / s * std::exp(-0.5 * z * z);
  }

  double log_density(std::span<const double> x,
                     const State& w) const override {
    const double s = sigma_of(w);
    const double z = (x[0] - w[0]) / s;
    return std::log(kInvSqrt2Pi / s) - 0.5 * z * z;
  }

  ProbEstimate event_prob(const Event& xi, const State& w) const override {
    const double mu = w[0];
    const double s = sigma_of(w);
    double p = 0.0;
    for (const Rect& r : xi.rects()) {
      p += gauss_interval_prob(mu, s, r.sides[0].lo, r.sides[0].hi);
    }
    return {std::clamp(p, 0.0, 1.0), 0.0};
  }

  bool has_sampler() const override { return true; }

  void sample_into(const State& w, std::uint64_t seed, int count,
                   std::span<double> out) const override {
    auto gen = rng::engine(seed);
    std::normal_distribution<double> draw(w[0], sigma_of(w));
    for (int i = 0; i < count; ++i) out[i] = draw(gen);
  }

private:
  SigmaMode mode_;
};

// --- product ---------------------------------------------------------------

class ProductImpl final : public ObservableImpl {
public:
  ProductImpl(std::vector<Observable> parts, int total_dim,
              std::shared_ptr<const StateSpace> space)
      : ObservableImpl(total_dim, std::move(space)),
        parts_(std::move(parts)) {
    offsets_.reserve(parts_.size() + 1);
    int off = 0;
    for (const Observable& p : parts_) {
      offsets_.push_back(off);
      off += p.value_dim();
    }
    offsets_.push_back(off);
  }

  double density(std::span<const double> x, const State& w) const override {
    double p = 1.0;
    for (std::size_t k = 0; k < parts_.size(); ++k) {
      p *= parts_[k].impl().density(slice(x, k), w);
    }
    return p;
  }

  double log_density(std::span<const double> x,
                     const State& w) const override {
    double lp = 0.0;
    for (std::size_t k = 0; k < parts_.size(); ++k) {
      lp += parts_[k].impl().log_density(slice(x, k), w);
    }
    return lp;
  }

  ProbEstimate event_prob(const Event& xi, const State& w) const override {
    // Factorize each rectangle of the union across the part blocks.
    double total = 0.0;
    double var = 0.0;
    for (const Rect& r : xi.rects()) {
      double p = 1.0;
      double rel_var = 0.0;
      for (std::size_t k = 0; k < parts_.size(); ++k) {
        std::vector<Interval> sides(r.sides.begin() + offsets_[k],
                                    r.sides.begin() + offsets_[k + 1]);
        const ProbEstimate pk =
            parts_[k].impl().event_prob(Event::rect(std::move(sides)), w);
        p *= pk.value;
        if (pk.std_error > 0.0 && pk.value > 0.0) {
          const double rel = pk.std_error / pk.value;
          rel_var += rel * rel;
        }
      }
      total += p;
      var += p * p * rel_var;
    }
    return {std::clamp(total, 0.0, 1.0), std::sqrt(var)};
  }

  bool has_sampler() const override {
    return std::all_of(parts_.begin(), parts_.end(),
                       [](const Observable& p) { return p.has_sampler(); });
  }

  void sample_into(const State& w, std::uint64_t seed, int count,
                   std::span<double> out) const override {
    const int d = value_dim();
    std::vector<double> block;
    for (std::size_t k = 0; k < parts_.size(); ++k) {
      const int pd = parts_[k].value_dim();
      block.assign(static_cast<std::size_t>(count) * pd, 0.0);
      parts_[k].impl().sample_into(w, rng::substream_seed(seed, k), count, block);
      for (int i = 0; i < count; ++i) {
        for (int j = 0; j < pd; ++j) {
          out[static_cast<std::size_t>(i) * d + offsets_[k] + j] =
              block[static_cast<std::size_t>(i) * pd + j];
        }
      }
    }
  }

  const std::vector<Observable>& parts() const { return parts_; }

private:
  std::span<const double> slice(std::span<const double> x,
                                std::size_t k) const {
    return x.subspan(offsets_[k], offsets_[k + 1] - offsets_[k]);
  }

  std::vector<Observable> parts_;
  std::vector<int> offsets_;
};

// --- quadrature-backed one-dimensional densities ----------------------------

class QuadDensityImpl : public ObservableImpl {
public:
  QuadDensityImpl(std::shared_ptr<const StateSpace> space,
                  StateDensity density)
      : ObservableImpl(1, std::move(space)), density_(std::move(density)) {}

  double density(std::span<const double> x, const State& w) const override {
    return density_(x, w);
  }

  ProbEstimate event_prob(const Event& xi, const State& w) const override {
    double p = 0.0;
    for (const Rect& r : xi.rects()) {
      auto f = [this, &w](double x) {
        const double v = density_(std::span<const double>(&x, 1), w);
        return std::isfinite(v) ? v : 0.0;
      };
      p += integrate_interval(f, r.sides[0].lo, r.sides[0].hi, kQuadRelTol);
    }
    return {std::clamp(p, 0.0, 1.0), 0.0};
  }

private:
  StateDensity density_;
};

// --- image -----------------------------------------------------------------

class ImageClosedFormImpl final : public QuadDensityImpl {
public:
  ImageClosedFormImpl(Observable base, PointMap map, int image_dim,
                      StateDensity image_density)
      : QuadDensityImpl(base.impl().space_ptr(), std::move(image_density)),
        base_(std::move(base)),
        map_(std::move(map)),
        image_dim_(image_dim) {
    (void)image_dim_;
  }

  bool has_sampler() const override { return base_.has_sampler(); }

  void sample_into(const State& w, std::uint64_t seed, int count,
                   std::span<double> out) const override {
    const int bd = base_.value_dim();
    std::vector<double> raw(static_cast<std::size_t>(count) * bd);
    base_.impl().sample_into(w, seed, count, raw);
    for (int i = 0; i < count; ++i) {
      std::span<const double> row(raw.data() + static_cast<std::size_t>(i) * bd,
                                  bd);
      const std::vector<double> y = map_(row);
      if (static_cast<int>(y.size()) != value_dim()) {
        throw DomainError("image observable: point map returned wrong dimension");
      }
      std::copy(y.begin(), y.end(), out.begin() + static_cast<std::size_t>(i) *
                                                      value_dim());
    }
  }

private:
  Observable base_;
  PointMap map_;
  int image_dim_;
};

class ImageMonteCarloImpl final : public ObservableImpl {
public:
  ImageMonteCarloImpl(Observable base, PointMap map, int image_dim,
                      McConfig mc)
      : ObservableImpl(image_dim, base.impl().space_ptr()),
        base_(std::move(base)),
        map_(std::move(map)),
        mc_(mc) {}

  double density(std::span<const double>, const State&) const override {
    throw DomainError(
        "image observable (Monte Carlo): no closed-form density available");
  }

  ProbEstimate event_prob(const Event& xi, const State& w) const override {
    const int bd = base_.value_dim();
    const int n = mc_.samples;
    std::vector<double> raw(static_cast<std::size_t>(n) * bd);
    base_.impl().sample_into(w, mc_.seed, n, raw);
    long hits = 0;
    for (int i = 0; i < n; ++i) {
      std::span<const double> row(raw.data() + static_cast<std::size_t>(i) * bd,
                                  bd);
      const std::vector<double> y = map_(row);
      if (static_cast<int>(y.size()) != value_dim()) {
        throw DomainError("image observable: point map returned wrong dimension");
      }
      if (xi.contains(y)) ++hits;
    }
    const double p = static_cast<double>(hits) / n;
    return {p, std::sqrt(std::max(p * (1.0 - p), 0.0) / n)};
  }

  bool has_sampler() const override { return base_.has_sampler(); }

  void sample_into(const State& w, std::uint64_t seed, int count,
                   std::span<double> out) const override {
    const int bd = base_.value_dim();
    std::vector<double> raw(static_cast<std::size_t>(count) * bd);
    base_.impl().sample_into(w, seed, count, raw);
    for (int i = 0; i < count; ++i) {
      std::span<const double> row(raw.data() + static_cast<std::size_t>(i) * bd,
                                  bd);
      const std::vector<double> y = map_(row);
      std::copy(y.begin(), y.end(), out.begin() + static_cast<std::size_t>(i) *
                                                      value_dim());
    }
  }

private:
  Observable base_;
  PointMap map_;
  McConfig mc_;
};

// --- state precomposition (pullbacks) ---------------------------------------

class StateMapImpl final : public ObservableImpl {
public:
  StateMapImpl(Observable inner, std::shared_ptr<const StateSpace> source,
               std::function<State(const State&)> state_map)
      : ObservableImpl(inner.value_dim(), std::move(source)),
        inner_(std::move(inner)),
        state_map_(std::move(state_map)) {}

  double density(std::span<const double> x, const State& w) const override {
    return inner_.impl().density(x, state_map_(w));
  }

  double log_density(std::span<const double> x,
                     const State& w) const override {
    return inner_.impl().log_density(x, state_map_(w));
  }

  ProbEstimate event_prob(const Event& xi, const State& w) const override {
    return inner_.impl().event_prob(xi, state_map_(w));
  }

  bool has_sampler() const override { return inner_.has_sampler(); }

  void sample_into(const State& w, std::uint64_t seed, int count,
                   std::span<double> out) const override {
    inner_.impl().sample_into(state_map_(w), seed, count, out);
  }

private:
  Observable inner_;
  std::function<State(const State&)> state_map_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Observable wrapper

Observable::Observable(std::shared_ptr<const detail::ObservableImpl> impl,
                       ObservableTag tag)
    : impl_(std::move(impl)), tag_(tag) {}

int Observable::value_dim() const { return impl_->value_dim(); }
const StateSpace& Observable::state_space() const { return impl_->space(); }
ObservableTag Observable::tag() const { return tag_; }

double Observable::density(std::span<const double> x, const State& w) const {
  check_point_dim(x, value_dim(), "density");
  check_state(w, state_space(), "density");
  return impl_->density(x, w);
}

double Observable::log_density(std::span<const double> x,
                               const State& w) const {
  check_point_dim(x, value_dim(), "log_density");
  check_state(w, state_space(), "log_density");
  return impl_->log_density(x, w);
}

double Observable::event_prob(const Event& xi, const State& w) const {
  check_event_dim(xi, value_dim(), "event_prob");
  check_state(w, state_space(), "event_prob");
  return impl_->event_prob(xi, w).value;
}

ProbEstimate Observable::event_prob_se(const Event& xi, const State& w) const {
  check_event_dim(xi, value_dim(), "event_prob");
  check_state(w, state_space(), "event_prob");
  return impl_->event_prob(xi, w);
}

bool Observable::has_sampler() const { return impl_->has_sampler(); }

std::vector<std::vector<double>> Observable::sample(const State& w,
                                                    std::uint64_t seed,
                                                    int count) const {
  check_state(w, state_space(), "sample");
  if (count < 0) throw DomainError("sample: count must be non-negative");
  if (!has_sampler()) {
    throw UnsupportedSamplingError("observable has no sampler");
  }
  const int d = value_dim();
  std::vector<double> flat(static_cast<std::size_t>(count) * d);
  impl_->sample_into(w, seed, count, flat);
  std::vector<std::vector<double>> rows(count);
  for (int i = 0; i < count; ++i) {
    rows[i].assign(flat.begin() + static_cast<std::size_t>(i) * d,
                   flat.begin() + static_cast<std::size_t>(i + 1) * d);
  }
  return rows;
}

Observable Observable::with_tag(ObservableTag t) const {
  return Observable(impl_, t);
}

// ---------------------------------------------------------------------------
// Factories

Observable make_normal_observable(SigmaMode mode) {
  std::shared_ptr<const StateSpace> space;
  if (mode.is_fixed) {
    if (!(mode.sigma > 0.0) || !std::isfinite(mode.sigma)) {
      throw ConstructionError("normal observable: sigma must be positive and finite");
    }
    space = std::make_shared<const StateSpace>(StateSpace::real(1));
  } else {
    if (mode.index < 1) {
      throw ConstructionError(
          "normal observable: sigma coordinate index must be >= 1 (the mean "
          "occupies coordinate 0)");
    }
    space = std::make_shared<const StateSpace>(
        StateSpace::real_with_positive_last(mode.index + 1));
  }
  return Observable(std::make_shared<NormalImpl>(mode, std::move(space)),
                    ObservableTag::normal);
}

Observable product_observable(std::vector<Observable> parts) {
  if (parts.empty()) {
    throw ConstructionError("product observable: needs at least one part");
  }
  const StateSpace& space = parts.front().state_space();
  int total = 0;
  for (const Observable& p : parts) {
    if (!(p.state_space() == space)) {
      throw ConstructionError(
          "product observable: parts must share one state space");
    }
    total += p.value_dim();
  }
  auto space_ptr = parts.front().impl().space_ptr();
  return Observable(std::make_shared<ProductImpl>(std::move(parts), total,
                                                  std::move(space_ptr)),
                    ObservableTag::product);
}

Observable image_observable(const Observable& base, PointMap map,
                            int image_dim, StateDensity image_density) {
  if (image_dim != 1) {
    throw ConstructionError(
        "image observable: closed-form variant supports one-dimensional "
        "images only");
  }
  if (!map || !image_density) {
    throw ConstructionError("image observable: map and density must be set");
  }
  return Observable(
      std::make_shared<ImageClosedFormImpl>(base, std::move(map), image_dim,
                                            std::move(image_density)),
      ObservableTag::image);
}

Observable image_observable(const Observable& base, PointMap map,
                            int image_dim, McConfig mc) {
  if (image_dim < 1) {
    throw ConstructionError("image observable: image dimension must be >= 1");
  }
  if (!map) throw ConstructionError("image observable: map must be set");
  if (mc.samples < 1) {
    throw ConstructionError("image observable: Monte Carlo sample count must be >= 1");
  }
  if (!base.has_sampler()) {
    throw ConstructionError(
        "image observable: Monte Carlo variant needs a base sampler");
  }
  return Observable(std::make_shared<ImageMonteCarloImpl>(base, std::move(map),
                                                          image_dim, mc),
                    ObservableTag::image);
}

Observable make_sample_mean_image(int count, SigmaMode mode) {
  if (count < 1) {
    throw ConstructionError("sample-mean image: count must be >= 1");
  }
  const double root_n = std::sqrt(static_cast<double>(count));
  Observable base = product_observable(
      std::vector<Observable>(count, make_normal_observable(mode)));
  PointMap mean = [count](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return std::vector<double>{s / count};
  };
  // Closed-form image density: normal with scale sigma / sqrt(count).
  StateDensity dens;
  if (mode.is_fixed) {
    const double s = mode.sigma / root_n;
    dens = [s](std::span<const double> y, const State& w) {
      const double z = (y[0] - w[0]) / s;
      return kInvSqrt2Pi / s * std::exp(-0.5 * z * z);
    };
  } else {
    const int idx = mode.index;
    dens = [idx, root_n](std::span<const double> y, const State& w) {
      const double s = w[idx] / root_n;
      const double z = (y[0] - w[0]) / s;
      return kInvSqrt2Pi / s * std::exp(-0.5 * z * z);
    };
  }
  return image_observable(base, std::move(mean), 1, std::move(dens));
}

Observable make_custom_observable(StateSpace space, StateDensity density) {
  if (!density) throw ConstructionError("custom observable: density must be set");
  return Observable(
      std::make_shared<QuadDensityImpl>(
          std::make_shared<const StateSpace>(std::move(space)),
          std::move(density)),
      ObservableTag::custom);
}

Observable compose_with_state_map(
    const Observable& inner, StateSpace source,
    std::function<State(const State&)> state_map) {
  if (!state_map) {
    throw ConstructionError("state precomposition: map must be set");
  }
  return Observable(
      std::make_shared<StateMapImpl>(
          inner, std::make_shared<const StateSpace>(std::move(source)),
          std::move(state_map)),
      inner.tag());
}

std::vector<std::vector<double>> sample_measurement(const Observable& obs,
                                                    const State& omega,
                                                    std::uint64_t seed,
                                                    int count) {
  return obs.sample(omega, seed, count);
}

}  // namespace mtreg
