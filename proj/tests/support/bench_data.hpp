#pragma once

#include <cstddef>
#include <cstdint>

#include "capfade/curve.hpp"
#include "capfade/rng.hpp"

// Generated stand-ins for the public cycling datasets.
namespace capfade::testing {

/// Cells are variations of one two-stage reference trajectory
///   Q(k) = Q0 - a k - (b - a) w softplus((k - K) / w)
/// each with its own vertical offset, a linearly ramped fade change and a
/// ramped stretch of the cycle axis, plus uniform noise. With
/// `lifetime_coupling` > 0 the early fade rate a also scales with the stretch
/// (a / stretch^coupling), so early capacities carry lifetime information that
/// the ramped stretch alone does not.
struct BenchmarkSpec {
  std::size_t cells = 48;
  double nominal_ah = 1.85;
  int reference_length = 1500;
  int reference_knee = 1150;
  double early_fade = 1.5e-4;      // Ah per cycle
  double late_fade_ratio = 7.0;
  double offset_halfwidth = 0.01;  // Ah
  double slope_halfwidth = 0.02;   // Ah over the whole curve
  double stretch_halfwidth = 0.2;
  double lifetime_coupling = 0.0;
  double noise_ah = 0.0015;
  std::uint64_t seed = 20240611;
};

Dataset make_benchmark_dataset(const BenchmarkSpec& spec = {});

/// Continuous piecewise-linear curve over cycles 1..length with its
/// breakpoint at `knee`, optionally with uniform multiplicative noise of
/// relative amplitude `noise`.
CapacityCurve make_two_slope_curve(int knee, int length, double q0, double slope_early,
                                   double slope_late, double noise, Rng& rng);

}  // namespace capfade::testing
