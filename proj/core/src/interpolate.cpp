#include "capfade/interpolate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "capfade/error.hpp"

namespace capfade::interp {
namespace {

void check_knots(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    fail(ErrorKind::InvalidArgument, "interpolation: length mismatch");
  }
  if (x.size() < 2) {
    fail(ErrorKind::InvalidArgument, "interpolation: need at least 2 knots");
  }
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) {
      fail(ErrorKind::InvalidArgument,
           "interpolation: abscissa not strictly increasing");
    }
  }
}

/// Index i of the segment [x[i], x[i+1]) holding q, or x.size()-1 when q is
/// the last knot.
std::size_t locate(std::span<const double> x, double q) {
  if (!(q >= x.front() && q <= x.back())) {
    fail(ErrorKind::OutOfRange, "interpolation query " + std::to_string(q) +
                                    " outside [" + std::to_string(x.front()) +
                                    ", " + std::to_string(x.back()) + "]");
  }
  auto it = std::upper_bound(x.begin(), x.end(), q);
  return static_cast<std::size_t>(it - x.begin()) - 1;
}

double sign(double v) { return (v > 0) - (v < 0); }

double pchip_edge(double h0, double h1, double m0, double m1) {
  double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
  if (sign(d) != sign(m0)) return 0.0;
  if (sign(m0) != sign(m1) && std::abs(d) > 3.0 * std::abs(m0)) return 3.0 * m0;
  return d;
}

template <class Segment>
std::vector<double> evaluate(std::span<const double> x,
                             std::span<const double> y,
                             std::span<const double> query, Segment segment) {
  std::vector<double> out;
  out.reserve(query.size());
  for (double q : query) {
    std::size_t i = locate(x, q);
    if (q == x[i]) {
      out.push_back(y[i]);
    } else {
      out.push_back(segment(i, q));
    }
  }
  return out;
}

}  // namespace

std::vector<double> linear(std::span<const double> x, std::span<const double> y,
                           std::span<const double> query) {
  check_knots(x, y);
  return evaluate(x, y, query, [&](std::size_t i, double q) {
    double t = (q - x[i]) / (x[i + 1] - x[i]);
    return y[i] + t * (y[i + 1] - y[i]);
  });
}

std::vector<double> pchip_slopes(std::span<const double> x,
                                 std::span<const double> y) {
  check_knots(x, y);
  const std::size_t n = x.size();
  std::vector<double> h(n - 1), m(n - 1), d(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = x[k + 1] - x[k];
    m[k] = (y[k + 1] - y[k]) / h[k];
  }
  if (n == 2) {
    d[0] = d[1] = m[0];
    return d;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (m[k - 1] == 0.0 || m[k] == 0.0 || sign(m[k - 1]) != sign(m[k])) {
      d[k] = 0.0;
      continue;
    }
    double w1 = 2.0 * h[k] + h[k - 1];
    double w2 = h[k] + 2.0 * h[k - 1];
    d[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
  }
  d[0] = pchip_edge(h[0], h[1], m[0], m[1]);
  d[n - 1] = pchip_edge(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
  return d;
}

std::vector<double> pchip(std::span<const double> x, std::span<const double> y,
                          std::span<const double> query) {
  std::vector<double> d = pchip_slopes(x, y);
  return evaluate(x, y, query, [&](std::size_t i, double q) {
    double h = x[i + 1] - x[i];
    double t = (q - x[i]) / h;
    double t2 = t * t;
    double t3 = t2 * t;
    double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    double h10 = t3 - 2.0 * t2 + t;
    double h01 = -2.0 * t3 + 3.0 * t2;
    double h11 = t3 - t2;
    return h00 * y[i] + h10 * h * d[i] + h01 * y[i + 1] + h11 * h * d[i + 1];
  });
}

std::vector<double> natural_spline_moments(std::span<const double> x,
                                           std::span<const double> y) {
  check_knots(x, y);
  const std::size_t n = x.size();
  std::vector<double> moments(n, 0.0);
  if (n < 3) return moments;

  // Thomas algorithm on the interior unknowns M_1..M_{n-2}.
  const std::size_t m = n - 2;
  std::vector<double> diag(m), upper(m), rhs(m);
  for (std::size_t r = 0; r < m; ++r) {
    std::size_t i = r + 1;
    double h0 = x[i] - x[i - 1];
    double h1 = x[i + 1] - x[i];
    diag[r] = 2.0 * (h0 + h1);
    upper[r] = h1;
    rhs[r] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
  }
  for (std::size_t r = 1; r < m; ++r) {
    double lower = x[r + 1] - x[r];
    double w = lower / diag[r - 1];
    diag[r] -= w * upper[r - 1];
    rhs[r] -= w * rhs[r - 1];
  }
  moments[m] = rhs[m - 1] / diag[m - 1];
  for (std::size_t r = m - 1; r-- > 0;) {
    moments[r + 1] = (rhs[r] - upper[r] * moments[r + 2]) / diag[r];
  }
  return moments;
}

std::vector<double> natural_spline(std::span<const double> x,
                                   std::span<const double> y,
                                   std::span<const double> query) {
  std::vector<double> M = natural_spline_moments(x, y);
  return evaluate(x, y, query, [&](std::size_t i, double q) {
    double h = x[i + 1] - x[i];
    double a = x[i + 1] - q;
    double b = q - x[i];
    return M[i] * a * a * a / (6.0 * h) + M[i + 1] * b * b * b / (6.0 * h) +
           (y[i] / h - M[i] * h / 6.0) * a + (y[i + 1] / h - M[i + 1] * h / 6.0) * b;
  });
}

}  // namespace capfade::interp
