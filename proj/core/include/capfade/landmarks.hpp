#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "capfade/curve.hpp"

namespace capfade::landmarks {

struct Landmarks {
  std::optional<int> knee_cycle;
  std::optional<int> eol_cycle;
  double eol_threshold_fraction = 0.8;
};

/// First sampled cycle whose capacity is at or below
/// threshold_fraction * nominal capacity; nullopt if the curve never gets there.
std::optional<int> detect_eol(const CapacityCurve& curve,
                              double threshold_fraction = 0.8);

/// Two-line knee: for every split index b with at least three samples on each
/// side, least-squares lines are fitted to samples [0, b] and [b, L-1]; the
/// split with the smallest total squared residual wins (first one on ties) and
/// the knee is the rounded cycle where its two lines intersect.
///
/// Returns nullopt when the two slopes agree within 1e-12 or the intersection
/// falls outside the curve's cycle span. Throws InsufficientData for L < 6.
std::optional<int> detect_knee(const CapacityCurve& curve);

/// Full result of the knee search, for diagnostics and tests.
struct KneeFit {
  std::size_t split_index = 0;
  double sse = 0.0;
  double slope_early = 0.0, intercept_early = 0.0;
  double slope_late = 0.0, intercept_late = 0.0;
  std::optional<double> intersection;
};

KneeFit fit_two_lines(const CapacityCurve& curve);

struct CellLabels {
  std::string cell_id;
  Landmarks landmarks;
  /// Why a landmark is absent, or the error raised while labelling the cell.
  std::vector<std::string> notes;
};

/// Labels every curve; a failure on one cell is recorded in its notes and
/// does not stop the others. A knee later than the EOL is dropped (noted).
std::vector<CellLabels> label_dataset(const Dataset& dataset,
                                      double threshold_fraction = 0.8);

/// `cell_id,knee_cycle,eol_cycle`; absent landmarks are empty fields.
void write_labels_csv(std::ostream& out, std::span<const CellLabels> labels);
std::vector<CellLabels> read_labels_csv(std::istream& in);

const CellLabels* find(std::span<const CellLabels> labels, const std::string& cell_id);

}  // namespace capfade::landmarks
