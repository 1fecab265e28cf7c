#include "capfade/curve.hpp"

#include <cmath>
#include <set>

#include "capfade/error.hpp"
#include "capfade/interpolate.hpp"

namespace capfade {

std::vector<double> CapacityCurve::cycle_axis() const {
  return {cycles.begin(), cycles.end()};
}

std::optional<std::string> validate(const CapacityCurve& curve) {
  if (curve.cycles.size() != curve.capacities.size()) return "length mismatch";
  if (curve.cycles.size() < 2) return "fewer than 2 points";
  if (curve.cycles.front() < 1) return "first cycle below 1";
  for (std::size_t i = 1; i < curve.cycles.size(); ++i) {
    if (curve.cycles[i] <= curve.cycles[i - 1]) {
      return "cycles not strictly increasing";
    }
  }
  for (double q : curve.capacities) {
    if (!std::isfinite(q)) return "non-finite capacity";
    if (q <= 0.0) return "non-positive capacity";
  }
  if (!(curve.nominal_capacity > 0.0) || !std::isfinite(curve.nominal_capacity)) {
    return "non-positive nominal capacity";
  }
  return std::nullopt;
}

void require_valid(const CapacityCurve& curve) {
  if (auto violation = validate(curve)) {
    fail(ErrorKind::InvalidArgument,
         "curve '" + curve.cell_id + "': " + *violation);
  }
}

const CapacityCurve* Dataset::find(const std::string& cell_id) const {
  for (const auto& c : curves) {
    if (c.cell_id == cell_id) return &c;
  }
  return nullptr;
}

std::optional<std::string> validate(const Dataset& dataset) {
  std::set<std::string> ids;
  for (const auto& c : dataset.curves) {
    if (!ids.insert(c.cell_id).second) return "duplicate cell_id '" + c.cell_id + "'";
    if (auto v = validate(c)) return "cell '" + c.cell_id + "': " + *v;
  }
  for (const auto& [condition, members] : dataset.condition_groups) {
    for (const auto& id : members) {
      if (!ids.contains(id)) {
        return "condition '" + condition + "' references unknown cell '" + id + "'";
      }
    }
  }
  return std::nullopt;
}

CapacityCurve downsample(const CapacityCurve& curve, std::size_t stride) {
  if (stride == 0) fail(ErrorKind::InvalidArgument, "downsample: stride must be >= 1");
  CapacityCurve out{curve.cell_id, {}, {}, curve.nominal_capacity};
  for (std::size_t i = 0; i < curve.size(); i += stride) {
    out.cycles.push_back(curve.cycles[i]);
    out.capacities.push_back(curve.capacities[i]);
  }
  if (out.size() < 2) {
    fail(ErrorKind::InvalidArgument,
         "downsample: stride " + std::to_string(stride) + " leaves fewer than 2 points of '" +
             curve.cell_id + "'");
  }
  return out;
}

namespace {

template <class Interpolant>
CapacityCurve resample(const CapacityCurve& curve, std::span<const int> targets,
                       Interpolant interpolant) {
  require_valid(curve);
  for (std::size_t i = 1; i < targets.size(); ++i) {
    if (targets[i] <= targets[i - 1]) {
      fail(ErrorKind::InvalidArgument, "resample: target cycles not increasing");
    }
  }
  std::vector<double> x = curve.cycle_axis();
  std::vector<double> query(targets.begin(), targets.end());
  CapacityCurve out{curve.cell_id, {targets.begin(), targets.end()}, {},
                    curve.nominal_capacity};
  out.capacities = interpolant(std::span<const double>(x),
                               std::span<const double>(curve.capacities),
                               std::span<const double>(query));
  return out;
}

}  // namespace

CapacityCurve pchip_resample(const CapacityCurve& curve,
                             std::span<const int> target_cycles) {
  return resample(curve, target_cycles, interp::pchip);
}

CapacityCurve linear_resample(const CapacityCurve& curve,
                              std::span<const int> target_cycles) {
  return resample(curve, target_cycles, interp::linear);
}

CapacityCurve cubic_spline_resample(const CapacityCurve& curve,
                                    std::span<const int> target_cycles) {
  return resample(curve, target_cycles, interp::natural_spline);
}

std::vector<int> cycle_range(int first, int last) {
  std::vector<int> out;
  if (last < first) return out;
  out.reserve(static_cast<std::size_t>(last - first) + 1);
  for (int c = first; c <= last; ++c) out.push_back(c);
  return out;
}

}  // namespace capfade
