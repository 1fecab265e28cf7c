#pragma once

#include <span>
#include <vector>

// Interpolants over a strictly increasing abscissa. None of them extrapolate:
// a query outside [x.front(), x.back()] raises ErrorKind::OutOfRange. Every
// interpolant returns the knot ordinate bit-exactly when queried at a knot.
namespace capfade::interp {

std::vector<double> linear(std::span<const double> x, std::span<const double> y,
                           std::span<const double> query);

/// Shape-preserving piecewise cubic Hermite interpolation. Interior slopes use
/// the Fritsch-Carlson weighted harmonic mean (zero at local extrema), end
/// slopes use the one-sided three-point formula with the same monotonicity
/// limiter. This matches MATLAB's and SciPy's `pchip`.
std::vector<double> pchip(std::span<const double> x, std::span<const double> y,
                          std::span<const double> query);

/// PCHIP knot derivatives; exposed for testing.
std::vector<double> pchip_slopes(std::span<const double> x,
                                 std::span<const double> y);

/// Natural cubic spline (zero second derivative at both ends).
std::vector<double> natural_spline(std::span<const double> x,
                                   std::span<const double> y,
                                   std::span<const double> query);

/// Second derivatives at the knots of the natural spline.
std::vector<double> natural_spline_moments(std::span<const double> x,
                                           std::span<const double> y);

}  // namespace capfade::interp
