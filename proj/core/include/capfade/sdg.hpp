#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "capfade/curve.hpp"
#include "capfade/rng.hpp"

// Synthetic capacity-fade curves from a seed curve and three parameters:
//
//   offset o      vertical shift of the whole curve (Ah)
//   slope s       fade-rate change, ramped linearly 0 -> s over the curve (Ah)
//   elongation e  cycle-axis stretch, ramped linearly 1 -> e (ratio)
//
// Parameters are estimated pairwise from real cells, their observed spread
// gives the sampling ranges, and uniform draws from those ranges are applied
// to randomly chosen seed curves.
namespace capfade::sdg {

struct SdgParams {
  double offset = 0.0;
  double slope = 0.0;
  double elongation = 1.0;

  friend bool operator==(const SdgParams&, const SdgParams&) = default;
};

struct ParamRanges {
  double offset_min = 0.0, offset_max = 0.0;
  double slope_min = 0.0, slope_max = 0.0;
  double elongation_min = 1.0, elongation_max = 1.0;
  /// Cycle at which slope differences are measured; 0 disables slope.
  int slope_reference_cycle = 0;
};

void require_valid(const SdgParams& p);
void require_valid(const ParamRanges& r);

struct Histogram {
  std::vector<double> edges;          // bins + 1 values
  std::vector<std::size_t> counts;    // bins values
};

Histogram make_histogram(std::span<const double> values, std::size_t bins);

struct PairSample {
  std::string cell_i;
  std::string cell_j;
  SdgParams params;
};

struct PairwiseStats {
  int slope_reference_cycle = 0;
  std::vector<PairSample> samples;
  Histogram offset, slope, elongation;
};

/// Capacity of `curve` at `cycle`; linear between samples, exact at samples.
double capacity_at(const CapacityCurve& curve, int cycle);

/// o = Q_i[first] - Q_j[first],
/// s = (Q_i(n) - Q_i[first]) - (Q_j(n) - Q_j[first])  (0 when n == 0),
/// e = N / M with N, M the final cycles of i and j.
SdgParams estimate_params(const CapacityCurve& curve_i,
                          const CapacityCurve& curve_j, int n);

/// Every ordered pair (i != j) inside each group. With `within_condition_only`
/// and condition groups present, pairs never cross conditions; otherwise the
/// whole dataset is one group.
PairwiseStats pairwise_stats(const Dataset& dataset, int n,
                             bool within_condition_only = true,
                             std::size_t bins = 20);

/// Offset and slope ranges are the observed min/max; elongation is
/// [1 - h, 1 + h].
ParamRanges derive_ranges(const PairwiseStats& stats,
                          double elongation_halfwidth = 0.25);

/// Independent uniform draws, in the order offset, slope, elongation.
SdgParams sample_params(const ParamRanges& ranges, Rng& rng);

/// Applies the parameter vectors and resamples to unit-spaced integer cycles
/// from the seed's first cycle to round(e * final cycle).
CapacityCurve apply_params(const CapacityCurve& seed, const SdgParams& p);

/// Round half away from zero.
long round_half_away(double v);

struct Provenance {
  std::string synthetic_id;
  std::string seed_cell_id;
  SdgParams params;
  std::uint64_t master_seed = 0;
  std::size_t draw_index = 0;
  std::size_t attempts = 0;
};

struct SyntheticBatch {
  std::vector<CapacityCurve> curves;
  std::vector<Provenance> provenance;
};

struct BatchOptions {
  std::size_t max_retries = 100;
  std::string id_prefix = "syn";
  /// Worker threads; results do not depend on it.
  unsigned threads = 1;
};

/// Curve k draws from its own stream derive_stream(master, "sdg.generate", {k}):
/// pick a seed uniformly, sample parameters, apply. Degenerate outputs are
/// redrawn from the same stream up to `max_retries` times.
SyntheticBatch generate_batch(std::span<const CapacityCurve> seeds,
                              const ParamRanges& ranges, std::size_t count,
                              std::uint64_t master_seed,
                              const BatchOptions& options = {});

/// One JSON object per line: synthetic_id, seed_cell_id, o, s, e,
/// master_seed, draw_index, attempts.
void write_provenance_jsonl(std::ostream& out, std::span<const Provenance> records);
std::vector<Provenance> read_provenance_jsonl(std::istream& in);

}  // namespace capfade::sdg
