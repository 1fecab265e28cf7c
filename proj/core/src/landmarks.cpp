#include "capfade/landmarks.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "capfade/error.hpp"
#include "capfade/text.hpp"

namespace capfade::landmarks {

std::optional<int> detect_eol(const CapacityCurve& curve, double threshold_fraction) {
  if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0)) {
    fail(ErrorKind::InvalidArgument, "EOL threshold fraction must lie in (0, 1)");
  }
  const double limit = threshold_fraction * curve.nominal_capacity;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve.capacities[i] <= limit) return curve.cycles[i];
  }
  return std::nullopt;
}

namespace {

// Running sums over a normalized frame: u = (x - x0) / span, v = y - y0.
struct Prefix {
  std::vector<double> u, v, uu, uv, vv;

  explicit Prefix(std::size_t n) : u(n + 1), v(n + 1), uu(n + 1), uv(n + 1), vv(n + 1) {}
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double sse = 0.0;
};

LineFit fit_segment(const Prefix& p, std::size_t first, std::size_t last) {
  const double n = static_cast<double>(last - first + 1);
  auto sum = [&](const std::vector<double>& s) { return s[last + 1] - s[first]; };
  const double su = sum(p.u), sv = sum(p.v);
  const double sxx = sum(p.uu) - su * su / n;
  const double sxy = sum(p.uv) - su * sv / n;
  const double syy = sum(p.vv) - sv * sv / n;
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = (sv - f.slope * su) / n;
  f.sse = std::max(0.0, syy - sxy * f.slope);
  return f;
}

}  // namespace

KneeFit fit_two_lines(const CapacityCurve& curve) {
  capfade::require_valid(curve);
  const std::size_t L = curve.size();
  if (L < 6) {
    fail(ErrorKind::InsufficientData,
         "knee detection needs at least 6 samples, '" + curve.cell_id + "' has " +
             std::to_string(L));
  }
  const double x0 = curve.cycles.front();
  const double y0 = curve.capacities.front();
  const double span = static_cast<double>(curve.cycles.back()) - x0;

  Prefix p(L);
  for (std::size_t i = 0; i < L; ++i) {
    double u = (curve.cycles[i] - x0) / span;
    double v = curve.capacities[i] - y0;
    p.u[i + 1] = p.u[i] + u;
    p.v[i + 1] = p.v[i] + v;
    p.uu[i + 1] = p.uu[i] + u * u;
    p.uv[i + 1] = p.uv[i] + u * v;
    p.vv[i + 1] = p.vv[i] + v * v;
  }

  KneeFit best;
  best.sse = std::numeric_limits<double>::infinity();
  LineFit best_early, best_late;
  for (std::size_t b = 2; b + 2 < L; ++b) {
    LineFit early = fit_segment(p, 0, b);
    LineFit late = fit_segment(p, b, L - 1);
    double sse = early.sse + late.sse;
    if (sse < best.sse) {
      best.sse = sse;
      best.split_index = b;
      best_early = early;
      best_late = late;
    }
  }

  // Back to cycle/Ah coordinates.
  best.slope_early = best_early.slope / span;
  best.slope_late = best_late.slope / span;
  best.intercept_early = y0 + best_early.intercept - best.slope_early * x0;
  best.intercept_late = y0 + best_late.intercept - best.slope_late * x0;
  if (std::abs(best.slope_early - best.slope_late) > 1e-12) {
    double u = (best_late.intercept - best_early.intercept) /
               (best_early.slope - best_late.slope);
    best.intersection = x0 + u * span;
  }
  return best;
}

std::optional<int> detect_knee(const CapacityCurve& curve) {
  KneeFit fit = fit_two_lines(curve);
  if (!fit.intersection) return std::nullopt;
  double x = *fit.intersection;
  if (!(x >= curve.first_cycle() && x <= curve.last_cycle())) return std::nullopt;
  return static_cast<int>(std::lround(x));
}

std::vector<CellLabels> label_dataset(const Dataset& dataset, double threshold_fraction) {
  std::vector<CellLabels> out;
  out.reserve(dataset.curves.size());
  for (const auto& curve : dataset.curves) {
    CellLabels cell;
    cell.cell_id = curve.cell_id;
    cell.landmarks.eol_threshold_fraction = threshold_fraction;
    try {
      cell.landmarks.eol_cycle = detect_eol(curve, threshold_fraction);
      if (!cell.landmarks.eol_cycle) cell.notes.push_back("eol: threshold not reached");
    } catch (const Error& e) {
      cell.notes.push_back(std::string("eol: ") + e.what());
    }
    try {
      cell.landmarks.knee_cycle = detect_knee(curve);
      if (!cell.landmarks.knee_cycle) cell.notes.push_back("knee: not found");
    } catch (const Error& e) {
      cell.notes.push_back(std::string("knee: ") + e.what());
    }
    auto& lm = cell.landmarks;
    if (lm.knee_cycle && lm.eol_cycle && *lm.knee_cycle > *lm.eol_cycle) {
      cell.notes.push_back("knee: fitted at cycle " + std::to_string(*lm.knee_cycle) +
                           ", after EOL; dropped");
      lm.knee_cycle.reset();
    }
    out.push_back(std::move(cell));
  }
  return out;
}

void write_labels_csv(std::ostream& out, std::span<const CellLabels> labels) {
  out << "cell_id,knee_cycle,eol_cycle\n";
  for (const auto& l : labels) {
    out << l.cell_id << ',';
    if (l.landmarks.knee_cycle) out << *l.landmarks.knee_cycle;
    out << ',';
    if (l.landmarks.eol_cycle) out << *l.landmarks.eol_cycle;
    out << '\n';
  }
}

std::vector<CellLabels> read_labels_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != "cell_id,knee_cycle,eol_cycle") {
    fail(ErrorKind::Parse, "line 1: expected header cell_id,knee_cycle,eol_cycle");
  }
  std::vector<CellLabels> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    auto fields = text::split(line);
    auto where = "line " + std::to_string(line_no) + ": ";
    if (fields.size() != 3 || fields[0].empty()) {
      fail(ErrorKind::Parse, where + "expected cell_id,knee_cycle,eol_cycle");
    }
    CellLabels cell;
    cell.cell_id = std::string(fields[0]);
    int v = 0;
    if (!fields[1].empty()) {
      if (!text::parse_int(fields[1], v)) fail(ErrorKind::Parse, where + "bad knee_cycle");
      cell.landmarks.knee_cycle = v;
    }
    if (!fields[2].empty()) {
      if (!text::parse_int(fields[2], v)) fail(ErrorKind::Parse, where + "bad eol_cycle");
      cell.landmarks.eol_cycle = v;
    }
    out.push_back(std::move(cell));
  }
  return out;
}

const CellLabels* find(std::span<const CellLabels> labels, const std::string& cell_id) {
  for (const auto& l : labels) {
    if (l.cell_id == cell_id) return &l;
  }
  return nullptr;
}

}  // namespace capfade::landmarks
