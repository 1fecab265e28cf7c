#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "capfade/cnn.hpp"
#include "capfade/curve.hpp"
#include "capfade/gpr.hpp"
#include "capfade/landmarks.hpp"
#include "capfade/sdg.hpp"

namespace capfade::eval {

// ---------------------------------------------------------------------------
// Inputs

/// The first `available_cycles` cycles of a curve, keeping every `stride`-th.
struct InputWindow {
  int available_cycles = 100;
  int stride = 2;

  /// Number of retained samples.
  std::size_t length() const;
};

/// Capacities at cycles first, first + stride, ... below first +
/// available_cycles. Curves missing one of those cycles are PCHIP-resampled.
/// Throws InsufficientData when the curve is shorter than the window.
std::vector<double> build_input(const CapacityCurve& curve, const InputWindow& window);

// ---------------------------------------------------------------------------
// Metrics

double prediction_error(double predicted, double actual);
/// Error as a percentage of `actual`; throws InvalidArgument when actual == 0.
double percent_error(double predicted, double actual);
/// Mean absolute value of the errors.
double mae(std::span<const double> errors);
/// Mean over runs.
double mae_run_average(std::span<const double> per_run);
/// Mean over runs at every cycle point; all runs must cover the same points.
std::vector<double> mae_run_average(std::span<const std::vector<double>> per_run_curves);
/// Mean over the cycle points of a run-averaged curve.
double mae_cycle_average(std::span<const double> run_averaged);
/// Share of real cells no longer tested, in percent.
double effort_savings(int n_full_real, int n_real_in_mixed);
double pearson(std::span<const double> xs, std::span<const double> ys);

// ---------------------------------------------------------------------------
// Scenarios

enum class ScenarioKind { SeedOnly, SeedPlusFixedSynthetic, PartialReplacement, SparseEnrichment };
enum class Target { Eol, Knee };
enum class ModelKind { Gpr, Cnn };

std::string to_string(ScenarioKind k);
std::string to_string(Target t);
std::string to_string(ModelKind m);
/// Throws InvalidArgument naming the accepted spellings.
ScenarioKind parse_scenario_kind(const std::string& s);
Target parse_target(const std::string& s);
ModelKind parse_model_kind(const std::string& s);

struct Scenario {
  std::string name = "default";
  ScenarioKind kind = ScenarioKind::SeedOnly;
  /// One training-set step per entry: number of real cells drawn per run.
  std::vector<int> real_counts;
  /// seed-plus-fixed-synthetic: synthetic curves added at every step.
  int synthetic_count = 0;
  /// partial-replacement: real + synthetic size held constant.
  int total_count = 0;
  /// sparse-enrichment: synthetic = round(ratio * real).
  double synthetic_ratio = 1.0;
  int runs = 15;
  std::uint64_t master_seed = 0;
  Target target = Target::Eol;
  std::vector<int> available_cycles;
  int stride = 2;
  /// Test cells fixed a priori; when empty, `test_count` cells are drawn once
  /// from the stream "harness.test_split".
  std::vector<std::string> test_cells;
  int test_count = 0;
};

void require_valid(const Scenario& s);
int synthetic_count_for(const Scenario& s, int real_count);

struct HarnessOptions {
  double eol_threshold = 0.8;
  /// GPR: tune on the training rows with grouped k-fold CV over real cells.
  bool gpr_tune = true;
  std::size_t gpr_folds = 5;
  std::size_t gpr_length_points = 9;
  cnn::TrainConfig cnn;
  /// Multiply inputs by 1 / nominal capacity before the CNN.
  bool cnn_normalize_by_nominal = true;
  std::size_t synthetic_retries = 100;
  unsigned threads = 1;
};

struct CellPrediction {
  std::string cell_id;
  double actual = 0.0;
  std::vector<double> predicted;  // per available-cycles point
};

struct RunRecord {
  std::size_t run = 0;
  std::uint64_t stream_seed = 0;
  std::vector<std::string> train_cells;
  std::vector<sdg::Provenance> synthetic;
  std::vector<double> mae_cycles;  // per available-cycles point
  std::vector<double> mae_pct;
  std::vector<CellPrediction> cells;
};

struct StepResult {
  int real_count = 0;
  int synthetic_count = 0;
  std::vector<double> mae_ra_cycles;
  std::vector<double> mae_ra_pct;
  double mae_ca_cycles = 0.0;
  double mae_ca_pct = 0.0;
  std::vector<RunRecord> runs;
};

struct ExperimentReport {
  std::string dataset;
  Scenario scenario;
  ModelKind model = ModelKind::Gpr;
  sdg::ParamRanges ranges;
  std::vector<std::string> test_cells;
  std::vector<int> available_cycles;
  std::vector<StepResult> steps;
  double wall_clock_seconds = 0.0;
};

/// Runs every step of the scenario `runs` times. Each run draws its real
/// subset and synthetic curves from derive_stream(seed, "harness.run",
/// {step, run}); synthetic curves are generated from the drawn real cells only
/// and used for training only. One model is trained per available-cycles
/// point and scored on the fixed test cells.
ExperimentReport run_scenario(const Dataset& dataset,
                              std::span<const landmarks::CellLabels> labels,
                              const Scenario& scenario, ModelKind model,
                              const sdg::ParamRanges& ranges,
                              const HarnessOptions& options = {});

/// Test cells a scenario would use.
std::vector<std::string> choose_test_cells(const Dataset& dataset,
                                           std::span<const landmarks::CellLabels> labels,
                                           const Scenario& scenario);

struct FoldResult {
  std::vector<std::string> test_cells;
  std::vector<double> mae_cycles;
  std::vector<double> mae_pct;
};

struct CrossValReport {
  std::size_t k = 0;
  std::vector<int> available_cycles;
  std::vector<FoldResult> folds;
  std::vector<double> min_cycles, max_cycles, mean_cycles;
};

/// Real cells only: a seeded shuffle is cut into k contiguous folds whose
/// sizes differ by at most one.
std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t k,
                                                      std::uint64_t seed);

CrossValReport kfold_cv(const Dataset& dataset, std::span<const landmarks::CellLabels> labels,
                        std::size_t k, ModelKind model, Target target,
                        std::span<const int> available_cycles, int stride,
                        std::uint64_t seed, const HarnessOptions& options = {});

struct SweepEntry {
  double halfwidth = 0.0;
  sdg::ParamRanges ranges;
  ExperimentReport report;
};

/// One scenario evaluation per elongation half-width; offset and slope ranges
/// stay as derived from `stats`.
std::vector<SweepEntry> sensitivity_sweep(const Dataset& dataset,
                                          std::span<const landmarks::CellLabels> labels,
                                          std::span<const double> halfwidths,
                                          const Scenario& scenario, ModelKind model,
                                          const sdg::PairwiseStats& stats,
                                          const HarnessOptions& options = {});

// ---------------------------------------------------------------------------
// Persistence

inline constexpr int kReportSchemaVersion = 1;

/// Serialized report. `include_wall_clock` = false drops the only
/// non-deterministic field.
std::string report_to_json(const ExperimentReport& report, bool include_wall_clock = true);
std::string crossval_to_json(const CrossValReport& report);

/// Structural problems of a serialized report, including aggregation checks
/// recomputed from the raw per-cell predictions. Empty means valid.
std::vector<std::string> validate_report_json(const std::string& json);

/// MAE_c.a. of a step rebuilt from its per-cell predictions
/// (cells -> run MAE -> run average -> cycle average).
double recompute_mae_ca(const StepResult& step);

/// `available_cycles,mae_ra_pct,mae_ra_cycles`.
void write_plot_csv(std::ostream& out, std::span<const int> available_cycles,
                    const StepResult& step);

}  // namespace capfade::eval
