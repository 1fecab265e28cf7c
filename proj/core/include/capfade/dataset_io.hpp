#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "capfade/curve.hpp"

// Canonical dataset CSV:
//
//   cell_id,cycle,capacity_ah[,condition]
//
// One row per measurement, header required, rows of one cell sorted by cycle.
// Nominal capacity is not part of the file; it is supplied per dataset.
namespace capfade {

struct CellRejection {
  std::string cell_id;
  std::string reason;
};

struct IngestResult {
  Dataset dataset;
  std::vector<CellRejection> rejected;
  /// Rows read per cell, in order of first appearance (rejected cells too).
  std::vector<std::pair<std::string, std::size_t>> row_counts;
};

/// Malformed rows raise ErrorKind::Parse with the 1-based line number; cells
/// that parse but break a curve invariant are listed in `rejected` and left
/// out of the dataset.
IngestResult read_dataset_csv(std::istream& in, double nominal_capacity,
                              std::string name = "dataset");
IngestResult read_dataset_csv(const std::filesystem::path& path,
                              double nominal_capacity);

/// Writes the condition column when the dataset has condition groups.
void write_dataset_csv(std::ostream& out, const Dataset& dataset);
void write_curves_csv(std::ostream& out, std::span<const CapacityCurve> curves);

}  // namespace capfade
