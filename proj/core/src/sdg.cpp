#include "capfade/sdg.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>

#include "capfade/error.hpp"
#include "capfade/interpolate.hpp"
#include "capfade/parallel.hpp"

namespace capfade::sdg {

void require_valid(const SdgParams& p) {
  if (!std::isfinite(p.offset) || !std::isfinite(p.slope)) {
    fail(ErrorKind::InvalidArgument, "sdg: offset and slope must be finite");
  }
  if (!(p.elongation > 0.0) || !std::isfinite(p.elongation)) {
    fail(ErrorKind::InvalidArgument, "sdg: elongation must be positive");
  }
}

void require_valid(const ParamRanges& r) {
  auto ordered = [](double lo, double hi) {
    return std::isfinite(lo) && std::isfinite(hi) && lo <= hi;
  };
  if (!ordered(r.offset_min, r.offset_max) || !ordered(r.slope_min, r.slope_max) ||
      !ordered(r.elongation_min, r.elongation_max)) {
    fail(ErrorKind::InvalidArgument, "sdg: range bounds must satisfy min <= max");
  }
  if (!(r.elongation_min > 0.0)) {
    fail(ErrorKind::InvalidArgument, "sdg: elongation lower bound must be positive");
  }
  if (r.slope_reference_cycle == 1 || r.slope_reference_cycle < 0) {
    fail(ErrorKind::InvalidArgument, "sdg: slope reference cycle must be 0 or >= 2");
  }
}

Histogram make_histogram(std::span<const double> values, std::size_t bins) {
  if (bins == 0) fail(ErrorKind::InvalidArgument, "histogram: bins must be >= 1");
  Histogram h;
  if (values.empty()) return h;
  auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it, hi = *hi_it;
  h.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) {
    h.edges[b] = b == bins ? hi : lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
  }
  h.counts.assign(bins, 0);
  for (double v : values) {
    std::size_t b = 0;
    if (hi > lo) {
      b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
      b = std::min(b, bins - 1);
    }
    ++h.counts[b];
  }
  return h;
}

double capacity_at(const CapacityCurve& curve, int cycle) {
  if (cycle < curve.first_cycle() || cycle > curve.last_cycle()) {
    fail(ErrorKind::OutOfRange, "cycle " + std::to_string(cycle) +
                                    " outside the span of '" + curve.cell_id + "' [" +
                                    std::to_string(curve.first_cycle()) + ", " +
                                    std::to_string(curve.last_cycle()) + "]");
  }
  auto it = std::lower_bound(curve.cycles.begin(), curve.cycles.end(), cycle);
  auto i = static_cast<std::size_t>(it - curve.cycles.begin());
  if (*it == cycle) return curve.capacities[i];
  double x0 = curve.cycles[i - 1], x1 = curve.cycles[i];
  double t = (cycle - x0) / (x1 - x0);
  return curve.capacities[i - 1] + t * (curve.capacities[i] - curve.capacities[i - 1]);
}

SdgParams estimate_params(const CapacityCurve& curve_i,
                          const CapacityCurve& curve_j, int n) {
  capfade::require_valid(curve_i);
  capfade::require_valid(curve_j);
  if (n < 0) fail(ErrorKind::InvalidArgument, "slope reference cycle must be >= 0");
  SdgParams p;
  const double qi1 = curve_i.capacities.front();
  const double qj1 = curve_j.capacities.front();
  p.offset = qi1 - qj1;
  if (n > 0) {
    p.slope = (capacity_at(curve_i, n) - qi1) - (capacity_at(curve_j, n) - qj1);
  }
  p.elongation = static_cast<double>(curve_i.last_cycle()) /
                 static_cast<double>(curve_j.last_cycle());
  return p;
}

PairwiseStats pairwise_stats(const Dataset& dataset, int n,
                             bool within_condition_only, std::size_t bins) {
  std::vector<std::vector<const CapacityCurve*>> groups;
  if (within_condition_only && !dataset.condition_groups.empty()) {
    std::vector<bool> grouped(dataset.curves.size(), false);
    for (const auto& [condition, members] : dataset.condition_groups) {
      auto& g = groups.emplace_back();
      for (const auto& id : members) {
        for (std::size_t k = 0; k < dataset.curves.size(); ++k) {
          if (dataset.curves[k].cell_id == id) {
            g.push_back(&dataset.curves[k]);
            grouped[k] = true;
          }
        }
      }
    }
    auto& rest = groups.emplace_back();
    for (std::size_t k = 0; k < dataset.curves.size(); ++k) {
      if (!grouped[k]) rest.push_back(&dataset.curves[k]);
    }
  } else {
    auto& all = groups.emplace_back();
    for (const auto& c : dataset.curves) all.push_back(&c);
  }

  PairwiseStats stats;
  stats.slope_reference_cycle = n;
  for (const auto& g : groups) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = 0; j < g.size(); ++j) {
        if (i == j) continue;
        stats.samples.push_back({g[i]->cell_id, g[j]->cell_id, estimate_params(*g[i], *g[j], n)});
      }
    }
  }
  if (stats.samples.empty()) {
    fail(ErrorKind::InsufficientData,
         "pairwise statistics need at least 2 curves in some group of '" +
             dataset.name + "'");
  }
  std::vector<double> o, s, e;
  for (const auto& sample : stats.samples) {
    o.push_back(sample.params.offset);
    s.push_back(sample.params.slope);
    e.push_back(sample.params.elongation);
  }
  stats.offset = make_histogram(o, bins);
  stats.slope = make_histogram(s, bins);
  stats.elongation = make_histogram(e, bins);
  return stats;
}

ParamRanges derive_ranges(const PairwiseStats& stats, double elongation_halfwidth) {
  if (stats.samples.empty()) {
    fail(ErrorKind::InsufficientData, "derive_ranges: no pairwise samples");
  }
  if (!(elongation_halfwidth > 0.0 && elongation_halfwidth < 1.0)) {
    fail(ErrorKind::InvalidArgument, "elongation half-width must lie in (0, 1)");
  }
  ParamRanges r;
  r.offset_min = r.offset_max = stats.samples.front().params.offset;
  r.slope_min = r.slope_max = stats.samples.front().params.slope;
  for (const auto& sample : stats.samples) {
    r.offset_min = std::min(r.offset_min, sample.params.offset);
    r.offset_max = std::max(r.offset_max, sample.params.offset);
    r.slope_min = std::min(r.slope_min, sample.params.slope);
    r.slope_max = std::max(r.slope_max, sample.params.slope);
  }
  r.elongation_min = 1.0 - elongation_halfwidth;
  r.elongation_max = 1.0 + elongation_halfwidth;
  r.slope_reference_cycle = stats.slope_reference_cycle;
  return r;
}

SdgParams sample_params(const ParamRanges& ranges, Rng& rng) {
  SdgParams p;
  p.offset = rng.uniform(ranges.offset_min, ranges.offset_max);
  p.slope = rng.uniform(ranges.slope_min, ranges.slope_max);
  p.elongation = rng.uniform(ranges.elongation_min, ranges.elongation_max);
  return p;
}

long round_half_away(double v) { return std::lround(v); }

CapacityCurve apply_params(const CapacityCurve& seed, const SdgParams& p) {
  capfade::require_valid(seed);
  require_valid(p);
  const std::size_t L = seed.size();
  const double last = static_cast<double>(L - 1);

  std::vector<double> stretched(L), shifted(L);
  for (std::size_t k = 0; k < L; ++k) {
    double frac = static_cast<double>(k) / last;
    double slope_k = k + 1 == L ? p.slope : p.slope * frac;
    double stretch_k = k + 1 == L ? p.elongation : 1.0 + (p.elongation - 1.0) * frac;
    shifted[k] = seed.capacities[k] + p.offset + slope_k;
    stretched[k] = static_cast<double>(seed.cycles[k]) * stretch_k;
  }
  for (std::size_t k = 1; k < L; ++k) {
    if (!(stretched[k] > stretched[k - 1])) {
      fail(ErrorKind::DegenerateOutput,
           "elongation " + std::to_string(p.elongation) +
               " folds the cycle axis of '" + seed.cell_id + "'");
    }
  }

  const long final_cycle = round_half_away(stretched.back());
  if (final_cycle < static_cast<long>(seed.first_cycle()) + 1) {
    fail(ErrorKind::DegenerateOutput,
         "synthetic curve from '" + seed.cell_id + "' has fewer than 2 cycles");
  }

  CapacityCurve out{seed.cell_id, cycle_range(seed.first_cycle(), static_cast<int>(final_cycle)),
                    {}, seed.nominal_capacity};
  // Rounding up may put the final integer cycle up to half a cycle past the
  // stretched axis; that cycle continues the last segment.
  const double axis_end = stretched.back();
  std::vector<double> inside;
  inside.reserve(out.cycles.size());
  for (int c : out.cycles) {
    if (c <= axis_end) inside.push_back(c);
  }
  out.capacities = interp::linear(stretched, shifted, inside);
  for (std::size_t k = inside.size(); k < out.cycles.size(); ++k) {
    double x0 = stretched[L - 2], x1 = stretched[L - 1];
    double y0 = shifted[L - 2], y1 = shifted[L - 1];
    out.capacities.push_back(y1 + (out.cycles[k] - x1) * (y1 - y0) / (x1 - x0));
  }

  for (double q : out.capacities) {
    if (!(q > 0.0) || !std::isfinite(q)) {
      fail(ErrorKind::DegenerateOutput,
           "synthetic curve from '" + seed.cell_id + "' reaches non-positive capacity");
    }
  }
  return out;
}

SyntheticBatch generate_batch(std::span<const CapacityCurve> seeds,
                              const ParamRanges& ranges, std::size_t count,
                              std::uint64_t master_seed, const BatchOptions& options) {
  SyntheticBatch batch;
  if (count == 0) return batch;
  if (seeds.empty()) fail(ErrorKind::InvalidArgument, "generate_batch: no seed curves");
  require_valid(ranges);
  for (const auto& s : seeds) capfade::require_valid(s);

  std::vector<std::optional<CapacityCurve>> curves(count);
  std::vector<Provenance> provenance(count);
  parallel_for(count, options.threads, [&](std::size_t k) {
    Rng rng(derive_stream(master_seed, "sdg.generate", {k}));
    std::string last_seed;
    for (std::size_t attempt = 1; attempt <= options.max_retries + 1; ++attempt) {
      const CapacityCurve& seed = seeds[rng.index(seeds.size())];
      SdgParams p = sample_params(ranges, rng);
      last_seed = seed.cell_id;
      try {
        CapacityCurve c = apply_params(seed, p);
        c.cell_id = options.id_prefix + "-" + std::to_string(k);
        provenance[k] = {c.cell_id, seed.cell_id, p, master_seed, k, attempt};
        curves[k] = std::move(c);
        return;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateOutput) throw;
      }
    }
    fail(ErrorKind::GenerationFailure,
         "synthetic curve " + std::to_string(k) + " stayed degenerate after " +
             std::to_string(options.max_retries) + " retries (last seed '" + last_seed + "')");
  });

  batch.curves.reserve(count);
  for (auto& c : curves) batch.curves.push_back(std::move(*c));
  batch.provenance = std::move(provenance);
  return batch;
}

void write_provenance_jsonl(std::ostream& out, std::span<const Provenance> records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["synthetic_id"] = r.synthetic_id;
    j["seed_cell_id"] = r.seed_cell_id;
    j["o"] = r.params.offset;
    j["s"] = r.params.slope;
    j["e"] = r.params.elongation;
    j["master_seed"] = r.master_seed;
    j["draw_index"] = r.draw_index;
    j["attempts"] = r.attempts;
    out << j.dump() << '\n';
  }
}

std::vector<Provenance> read_provenance_jsonl(std::istream& in) {
  std::vector<Provenance> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      Provenance r;
      r.synthetic_id = j.at("synthetic_id").get<std::string>();
      r.seed_cell_id = j.at("seed_cell_id").get<std::string>();
      r.params = {j.at("o").get<double>(), j.at("s").get<double>(), j.at("e").get<double>()};
      r.master_seed = j.at("master_seed").get<std::uint64_t>();
      r.draw_index = j.at("draw_index").get<std::size_t>();
      r.attempts = j.value("attempts", std::size_t{1});
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::Parse, "provenance line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace capfade::sdg
