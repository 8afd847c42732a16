#include "ascent.hpp"

#include <algorithm>
#include <cmath>

#include "pwrctl/error.hpp"

namespace pwrctl::detail {

namespace {

constexpr double kMinStep = 1e-14;
constexpr double kMaxStep = 1e12;

void project(std::span<double> y, std::span<const double> lo, std::span<const double> hi) {
  for (std::size_t j = 0; j < y.size(); ++j) y[j] = std::clamp(y[j], lo[j], hi[j]);
}

}  // namespace

double plain_sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double sorted_sum(std::span<const double> v) {
  Vector tmp(v.begin(), v.end());
  std::sort(tmp.begin(), tmp.end());
  return plain_sum(tmp);
}

double box_stationarity(std::span<const double> y, std::span<const double> g, std::span<const double> lo,
                        std::span<const double> hi) {
  double worst = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    double r = std::fabs(g[j]);
    if (g[j] > 0.0 && hi[j] - y[j] <= kActiveTol) r = 0.0;
    if (g[j] < 0.0 && y[j] - lo[j] <= kActiveTol) r = 0.0;
    if (std::isnan(r)) return r;
    if (r > worst) worst = r;
  }
  return worst;
}

AscentResult projected_ascent(const AscentProblem& pb, Vector y, const AscentOptions& opts) {
  const std::size_t n = y.size();
  if (pb.lo.size() != n || pb.hi.size() != n) throw ModelError("ascent: bound dimension mismatch");
  const auto reduce = pb.reduce ? pb.reduce : plain_sum;
  auto dot = [&](std::span<const double> a, std::span<const double> b) {
    Vector prod(n);
    for (std::size_t j = 0; j < n; ++j) prod[j] = a[j] * b[j];
    return reduce(prod);
  };

  project(y, pb.lo, pb.hi);
  AscentResult out;
  Vector g(n), y_new(n), g_new(n), d(n), dg(n);
  double f = pb.eval(y, g);
  if (!std::isfinite(f)) throw DomainError("ascent: objective undefined at the start point");
  double step = opts.initial_step;
  Vector w(n, 1.0);  // per-coordinate step factors when diagonal_steps is set

  for (long it = 0;; ++it) {
    if (opts.record_history) out.history.push_back(f);
    out.stationarity = box_stationarity(y, g, pb.lo, pb.hi);
    out.iterations = it;
    if (out.stationarity <= opts.tol) {
      out.converged = true;
      break;
    }
    if (it >= opts.max_iter) break;

    double s = std::clamp(step, kMinStep, kMaxStep);
    bool accepted = false;
    double f_new = 0.0;
    while (s >= kMinStep) {
      for (std::size_t j = 0; j < n; ++j) y_new[j] = y[j] + s * w[j] * g[j];
      project(y_new, pb.lo, pb.hi);
      for (std::size_t j = 0; j < n; ++j) d[j] = y_new[j] - y[j];
      const double slope = dot(g, d);
      if (slope <= 0.0) break;  // projection left no ascent room
      f_new = pb.eval(y_new, g_new);
      if (std::isfinite(f_new)) {
        if (f_new >= f + opts.armijo_c * slope) {
          accepted = true;
          break;
        }
        // Approximate Armijo: near the optimum the sufficient-increase margin drowns
        // in rounding, so settle for a flat value as long as the slope has not flipped.
        const double flat = opts.flat_rel * (1.0 + std::fabs(f));
        if (f_new >= f - flat && dot(g_new, d) >= -(1.0 - 2.0 * opts.armijo_c) * slope) {
          accepted = true;
          break;
        }
      }
      s *= opts.beta;
    }
    if (!accepted) {
      out.stalled = true;
      break;
    }
    // Barzilai-Borwein step for the next trial; concavity makes d.dg negative.
    for (std::size_t j = 0; j < n; ++j) dg[j] = g_new[j] - g[j];
    if (opts.diagonal_steps) {
      for (std::size_t j = 0; j < n; ++j) {
        if (d[j] == 0.0) continue;
        w[j] = dg[j] * d[j] < 0.0 ? std::clamp(d[j] / -dg[j], kMinStep, kMaxStep) : std::min(2.0 * s * w[j], kMaxStep);
      }
      step = 1.0;
    } else {
      const double dd = dot(d, d), ddg = dot(d, dg);
      step = ddg < 0.0 ? dd / -ddg : 2.0 * s;
    }
    y.swap(y_new);
    g.swap(g_new);
    f = f_new;
  }
  out.y = std::move(y);
  out.grad = std::move(g);
  out.value = f;
  return out;
}

}  // namespace pwrctl::detail
