#include "bench_data.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace capfade::testing {

namespace {

double softplus(double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); }

// Piecewise-linear lookup on an increasing abscissa; t must lie in range.
double lerp_at(const std::vector<double>& x, const std::vector<double>& y, double t) {
  auto hi = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), t) - x.begin());
  if (hi == 0) return y.front();
  if (hi == x.size()) return y.back();
  std::size_t lo = hi - 1;
  double u = (t - x[lo]) / (x[hi] - x[lo]);
  return y[lo] + u * (y[hi] - y[lo]);
}

}  // namespace

Dataset make_benchmark_dataset(const BenchmarkSpec& spec) {
  Dataset d;
  d.name = "benchmark";
  Rng rng(derive_stream(spec.seed, "bench.cells"));
  const int len = spec.reference_length;
  const double width = 40.0;
  for (std::size_t i = 0; i < spec.cells; ++i) {
    double stretch = rng.uniform(1.0 - spec.stretch_halfwidth, 1.0 + spec.stretch_halfwidth);
    double offset = rng.uniform(-spec.offset_halfwidth, spec.offset_halfwidth);
    double ramp = rng.uniform(-spec.slope_halfwidth, spec.slope_halfwidth);
    double a = spec.early_fade / std::pow(stretch, spec.lifetime_coupling);
    double b = spec.late_fade_ratio * spec.early_fade;

    std::vector<double> x(len), y(len);
    for (int k = 1; k <= len; ++k) {
      double frac = static_cast<double>(k - 1) / (len - 1);
      x[k - 1] = k * (1.0 + (stretch - 1.0) * frac);
      y[k - 1] = spec.nominal_ah - a * k -
                 (b - a) * width * softplus((k - spec.reference_knee) / width) + offset +
                 ramp * frac;
    }

    CapacityCurve c;
    c.cell_id = "cell" + std::to_string(i + 1);
    c.nominal_capacity = spec.nominal_ah;
    int last = static_cast<int>(std::floor(x.back()));
    for (int t = 1; t <= last; ++t) {
      c.cycles.push_back(t);
      c.capacities.push_back(lerp_at(x, y, t) + spec.noise_ah * rng.uniform(-1.0, 1.0));
    }
    d.curves.push_back(std::move(c));
  }
  return d;
}

CapacityCurve make_two_slope_curve(int knee, int length, double q0, double slope_early,
                                   double slope_late, double noise, Rng& rng) {
  CapacityCurve c;
  c.cell_id = "two-slope";
  c.nominal_capacity = q0;
  for (int cyc = 1; cyc <= length; ++cyc) {
    double q = cyc <= knee ? q0 - slope_early * (cyc - 1)
                           : q0 - slope_early * (knee - 1) - slope_late * (cyc - knee);
    if (noise > 0.0) q *= 1.0 + rng.uniform(-noise, noise);
    c.cycles.push_back(cyc);
    c.capacities.push_back(q);
  }
  return c;
}

}  // namespace capfade::testing
