#include "pwrctl/fixedpoint.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>

#include "pwrctl/error.hpp"
#include "pwrctl/kernels.hpp"
#include "pwrctl/rng.hpp"

namespace pwrctl {

struct InterferenceMap::Impl {
  // TargetSinr
  Matrix rx_cross;
  Vector noise;
  Vector scale;  // gamma_i / h_ii
  // PowerCapped
  std::optional<InterferenceMap> inner;
  Vector cap;
  // Custom
  Evaluator custom;
};

InterferenceMap::InterferenceMap(Kind kind, std::size_t size, std::string label, std::shared_ptr<const Impl> impl)
    : kind_(kind), size_(size), label_(std::move(label)), impl_(std::move(impl)) {}

InterferenceMap InterferenceMap::target_sinr(const NetworkModel& model, Vector gamma_target) {
  const std::size_t n = model.num_links();
  if (gamma_target.size() == 1 && n > 1) gamma_target.assign(n, gamma_target[0]);
  if (gamma_target.size() != n) throw ModelError("SINR target vector has wrong length");
  auto impl = std::make_shared<Impl>();
  impl->rx_cross = model.rx_cross();
  impl->noise = model.noise();
  impl->scale.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(gamma_target[i] > 0.0) || !std::isfinite(gamma_target[i]))
      throw DomainError("SINR target must be positive and finite", i);
    impl->scale[i] = gamma_target[i] / model.direct(i);
  }
  return InterferenceMap(Kind::TargetSinr, n, "target_sinr", std::move(impl));
}

InterferenceMap InterferenceMap::power_capped(InterferenceMap inner, Vector p_max) {
  const std::size_t n = inner.size();
  if (p_max.size() == 1 && n > 1) p_max.assign(n, p_max[0]);
  if (p_max.size() != n) throw ModelError("power cap vector has wrong length");
  for (std::size_t i = 0; i < n; ++i)
    if (!(p_max[i] > 0.0)) throw DomainError("power cap must be positive", i);
  auto impl = std::make_shared<Impl>();
  impl->cap = std::move(p_max);
  std::string label = "capped(" + inner.label() + ")";
  impl->inner = std::move(inner);
  return InterferenceMap(Kind::PowerCapped, n, std::move(label), std::move(impl));
}

InterferenceMap InterferenceMap::custom(std::size_t size, Evaluator f, std::string label) {
  if (!f) throw ModelError("custom interference map needs an evaluator");
  auto impl = std::make_shared<Impl>();
  impl->custom = std::move(f);
  return InterferenceMap(Kind::Custom, size, std::move(label), std::move(impl));
}

void InterferenceMap::evaluate(std::span<const double> p, std::span<double> out) const {
  if (p.size() != size_ || out.size() != size_) throw ModelError("interference map: dimension mismatch");
  switch (kind_) {
    case Kind::TargetSinr:
      kernels::gemv(impl_->rx_cross.data(), size_, size_, p.data(), impl_->noise.data(), out.data());
      for (std::size_t i = 0; i < size_; ++i) out[i] *= impl_->scale[i];
      break;
    case Kind::PowerCapped:
      impl_->inner->evaluate(p, out);
      for (std::size_t i = 0; i < size_; ++i) out[i] = std::min(impl_->cap[i], out[i]);
      break;
    case Kind::Custom:
      impl_->custom(p, out);
      break;
  }
}

Vector InterferenceMap::operator()(std::span<const double> p) const {
  Vector out(size_);
  evaluate(p, out);
  return out;
}

double InterferenceMap::component(std::size_t i, std::span<const double> p) const {
  switch (kind_) {
    case Kind::TargetSinr: {
      if (p.size() != size_) throw ModelError("interference map: dimension mismatch");
      double q;
      kernels::gemv(impl_->rx_cross.row(i).data(), 1, size_, p.data(), &impl_->noise[i], &q);
      return q * impl_->scale[i];
    }
    case Kind::PowerCapped:
      return std::min(impl_->cap[i], impl_->inner->component(i, p));
    case Kind::Custom:
      return (*this)(p)[i];
  }
  return 0.0;
}

namespace {

class TrajectoryRecorder {
 public:
  explicit TrajectoryRecorder(bool enabled) : enabled_(enabled) {}

  void record(long iter, std::span<const double> p, double residual) {
    if (!enabled_ || iter % stride_ != 0) return;
    samples_.push_back({iter, Vector(p.begin(), p.end()), residual});
    if (samples_.size() >= kMaxTrajectorySamples) {
      std::vector<TrajectorySample> kept;
      kept.reserve(samples_.size() / 2 + 1);
      stride_ *= 2;
      for (auto& s : samples_)
        if (s.iter % stride_ == 0) kept.push_back(std::move(s));
      samples_ = std::move(kept);
    }
  }

  std::vector<TrajectorySample> take() { return std::move(samples_); }

 private:
  bool enabled_;
  long stride_ = 1;
  std::vector<TrajectorySample> samples_;
};

double divergence_limit(const InterferenceMap& map, std::span<const double> p0) {
  const Vector zero(map.size(), 0.0);
  const Vector base = map(zero);
  return 1e12 * std::max({1.0, inf_norm(base), inf_norm(p0)});
}

void check_start(const InterferenceMap& map, std::span<const double> p0) {
  if (p0.size() != map.size()) throw ModelError("start vector has wrong length");
  for (std::size_t i = 0; i < p0.size(); ++i)
    if (!(p0[i] >= 0.0) || !std::isfinite(p0[i])) throw DomainError("start power must be finite and >= 0", i);
}

void check_divergence(std::span<const double> next, std::span<const double> last, double limit, long iter) {
  for (double v : next) {
    if (!std::isfinite(v) || std::fabs(v) > limit)
      throw DivergenceError("fixed-point iteration diverged at iteration " + std::to_string(iter),
                            Vector(last.begin(), last.end()));
  }
}

}  // namespace

FixedPointResult iterate_sync(const InterferenceMap& map, std::span<const double> p0, const IterationOptions& opts) {
  check_start(map, p0);
  const std::size_t n = map.size();
  const double limit = divergence_limit(map, p0);
  TrajectoryRecorder rec(opts.record_trajectory);
  FixedPointResult out;
  Vector p(p0.begin(), p0.end()), next(n);
  for (long it = 0; it < opts.max_iter; ++it) {
    map.evaluate(p, next);
    out.iterations = it + 1;
    out.residual = kernels::max_abs_diff(next.data(), p.data(), n);
    rec.record(it, p, out.residual);
    if (out.residual <= opts.tol) {
      out.converged = true;
      break;
    }
    check_divergence(next, p, limit, it);
    p.swap(next);
  }
  out.p_bar = std::move(p);
  out.trajectory = rec.take();
  return out;
}

FixedPointResult iterate_async(const InterferenceMap& map, std::span<const double> p0, const AsyncSchedule& schedule,
                               const IterationOptions& opts) {
  check_start(map, p0);
  const std::size_t n = map.size();
  if (schedule.staleness_bound < 0) throw DomainError("staleness bound must be >= 0");
  Vector prob = schedule.update_probability;
  if (prob.size() == 1) prob.assign(n, prob[0]);
  if (prob.size() != n) throw ModelError("update probability vector has wrong length");
  for (std::size_t i = 0; i < n; ++i)
    if (!(prob[i] > 0.0 && prob[i] <= 1.0)) throw DomainError("update probability must lie in (0, 1]", i);

  const double limit = divergence_limit(map, p0);
  const auto depth = static_cast<std::size_t>(schedule.staleness_bound);
  Rng rng(schedule.seed);
  TrajectoryRecorder rec(opts.record_trajectory);
  FixedPointResult out;
  out.schedule_seed = schedule.seed;

  // history.front() is the current iterate; history[d] is d activations old.
  std::deque<Vector> history;
  history.emplace_front(p0.begin(), p0.end());
  Vector fresh(n), next(n), stale(n);
  for (long it = 0; it < opts.max_iter; ++it) {
    const Vector& p = history.front();
    map.evaluate(p, fresh);
    out.iterations = it + 1;
    out.residual = kernels::max_abs_diff(fresh.data(), p.data(), n);
    rec.record(it, p, out.residual);
    if (out.residual <= opts.tol) {
      out.converged = true;
      break;
    }
    const std::uint64_t max_delay = std::min<std::uint64_t>(depth, history.size() - 1);
    for (std::size_t i = 0; i < n; ++i) {
      if (!rng.bernoulli(prob[i])) {
        next[i] = p[i];
        continue;
      }
      for (std::size_t k = 0; k < n; ++k) stale[k] = history[rng.below_or_equal(max_delay)][k];
      next[i] = map.component(i, stale);
    }
    check_divergence(next, p, limit, it);
    history.push_front(next);
    if (history.size() > depth + 1) history.pop_back();
  }
  out.p_bar = history.front();
  out.trajectory = rec.take();
  return out;
}

PropertyReport certify_standard(const InterferenceMap& map, const SamplerConfig& sampler) {
  if (!(sampler.power_lo > 0.0) || !(sampler.power_hi > sampler.power_lo))
    throw DomainError("sampler power range must be positive and nonempty");
  constexpr std::size_t kMaxWitnesses = 8;
  constexpr double kSlack = 1e-12;
  static constexpr double kAlphas[] = {1.1, 2.0, 10.0};

  const std::size_t n = map.size();
  Rng rng(sampler.seed);
  const double llo = std::log(sampler.power_lo), lhi = std::log(sampler.power_hi);
  PropertyReport report;
  auto fail = [&](PropertyCheck& check, Counterexample ce) {
    ++check.failures;
    if (check.witnesses.size() < kMaxWitnesses) check.witnesses.push_back(std::move(ce));
  };

  Vector p(n), pp(n), ip(n), ipp(n), scaled(n), iscaled(n);
  for (std::size_t s = 0; s < sampler.num_pairs; ++s) {
    for (std::size_t k = 0; k < n; ++k) {
      p[k] = std::exp(rng.uniform(llo, lhi));
      // Leave some coordinates equal so the order is partial, not strict.
      pp[k] = rng.uniform() < 0.3 ? p[k] : p[k] + std::exp(rng.uniform(llo, lhi));
    }
    map.evaluate(p, ip);
    map.evaluate(pp, ipp);
    for (std::size_t i = 0; i < n; ++i) {
      ++report.positivity.checks;
      if (!(ip[i] > 0.0)) fail(report.positivity, {i, p, {}, 1.0, ip[i], 0.0});
      ++report.monotonicity.checks;
      if (!(ip[i] <= ipp[i] + kSlack * std::fabs(ipp[i]))) fail(report.monotonicity, {i, p, pp, 1.0, ip[i], ipp[i]});
    }
    for (double alpha : kAlphas) {
      for (std::size_t k = 0; k < n; ++k) scaled[k] = alpha * p[k];
      map.evaluate(scaled, iscaled);
      for (std::size_t i = 0; i < n; ++i) {
        ++report.scalability.checks;
        const double lhs = alpha * ip[i];
        if (!(lhs > iscaled[i])) fail(report.scalability, {i, p, scaled, alpha, lhs, iscaled[i]});
      }
    }
  }
  return report;
}

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectorySample>& trajectory) {
  const std::size_t n = trajectory.empty() ? 0 : trajectory.front().p.size();
  os << "iter";
  for (std::size_t i = 0; i < n; ++i) os << ",p_" << (i + 1);
  os << ",residual\n";
  const auto old_precision = os.precision(17);
  for (const auto& s : trajectory) {
    os << s.iter;
    for (double v : s.p) os << ',' << v;
    os << ',' << s.residual << '\n';
  }
  os.precision(old_precision);
}

}  // namespace pwrctl
