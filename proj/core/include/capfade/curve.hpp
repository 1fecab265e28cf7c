#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace capfade {

/// Discharge capacity (Ah) against cycle number for one cell.
struct CapacityCurve {
  std::string cell_id;
  std::vector<int> cycles;
  std::vector<double> capacities;
  double nominal_capacity = 0.0;

  std::size_t size() const noexcept { return cycles.size(); }
  int first_cycle() const { return cycles.front(); }
  int last_cycle() const { return cycles.back(); }

  /// Cycles as doubles, for the interpolation routines.
  std::vector<double> cycle_axis() const;

  friend bool operator==(const CapacityCurve&, const CapacityCurve&) = default;
};

/// First violated invariant, or nullopt when the curve is well formed.
std::optional<std::string> validate(const CapacityCurve& curve);

/// Throws ErrorKind::InvalidArgument carrying the violation, if any.
void require_valid(const CapacityCurve& curve);

struct Dataset {
  std::string name;
  std::vector<CapacityCurve> curves;
  /// Aging condition -> member cell ids. Empty when the data carry no
  /// condition column.
  std::map<std::string, std::vector<std::string>> condition_groups;

  const CapacityCurve* find(const std::string& cell_id) const;
};

std::optional<std::string> validate(const Dataset& dataset);

/// Keeps samples 0, stride, 2*stride, ... .
CapacityCurve downsample(const CapacityCurve& curve, std::size_t stride);

CapacityCurve pchip_resample(const CapacityCurve& curve,
                             std::span<const int> target_cycles);
CapacityCurve linear_resample(const CapacityCurve& curve,
                              std::span<const int> target_cycles);
CapacityCurve cubic_spline_resample(const CapacityCurve& curve,
                                    std::span<const int> target_cycles);

/// Integer cycles first..last inclusive.
std::vector<int> cycle_range(int first, int last);

}  // namespace capfade
