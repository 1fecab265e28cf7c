#include "capfade/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>

#include "capfade/error.hpp"
#include "capfade/parallel.hpp"

namespace capfade::eval {

std::size_t InputWindow::length() const {
  if (stride < 1 || available_cycles < stride) {
    fail(ErrorKind::InvalidArgument, "input window: need available_cycles >= stride >= 1");
  }
  return static_cast<std::size_t>((available_cycles + stride - 1) / stride);
}

std::vector<double> build_input(const CapacityCurve& curve, const InputWindow& window) {
  std::size_t d = window.length();
  require_valid(curve);
  int first = curve.first_cycle();
  int last_needed = first + static_cast<int>(d - 1) * window.stride;
  if (curve.last_cycle() < last_needed) {
    fail(ErrorKind::InsufficientData,
         "cell " + curve.cell_id + ": history ends at cycle " +
             std::to_string(curve.last_cycle()) + ", window needs cycle " +
             std::to_string(last_needed));
  }

  std::vector<double> row(d);
  std::vector<int> wanted(d);
  for (std::size_t j = 0; j < d; ++j) wanted[j] = first + static_cast<int>(j) * window.stride;

  // Fast path: the curve already has every wanted cycle.
  std::size_t pos = 0;
  bool direct = true;
  for (std::size_t j = 0; j < d && direct; ++j) {
    while (pos < curve.size() && curve.cycles[pos] < wanted[j]) ++pos;
    if (pos == curve.size() || curve.cycles[pos] != wanted[j]) {
      direct = false;
    } else {
      row[j] = curve.capacities[pos];
    }
  }
  if (direct) return row;

  auto resampled = pchip_resample(curve, wanted);
  return resampled.capacities;
}

// ---------------------------------------------------------------------------

double prediction_error(double predicted, double actual) {
  if (!std::isfinite(predicted) || !std::isfinite(actual)) {
    fail(ErrorKind::InvalidArgument, "prediction error: non-finite value");
  }
  return predicted - actual;
}

double percent_error(double predicted, double actual) {
  double delta = prediction_error(predicted, actual);
  if (actual == 0.0) fail(ErrorKind::InvalidArgument, "percent error: actual value is zero");
  return delta / actual * 100.0;
}

double mae(std::span<const double> errors) {
  if (errors.empty()) fail(ErrorKind::InvalidArgument, "mae: no errors");
  double sum = 0.0;
  for (double e : errors) sum += std::abs(e);
  return sum / static_cast<double>(errors.size());
}

namespace {

double mean_of(std::span<const double> v, const char* what) {
  if (v.empty()) fail(ErrorKind::InvalidArgument, std::string(what) + ": no values");
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

}  // namespace

double mae_run_average(std::span<const double> per_run) { return mean_of(per_run, "run average"); }

std::vector<double> mae_run_average(std::span<const std::vector<double>> per_run_curves) {
  if (per_run_curves.empty()) fail(ErrorKind::InvalidArgument, "run average: no runs");
  std::size_t p = per_run_curves.front().size();
  for (const auto& c : per_run_curves) {
    if (c.size() != p) fail(ErrorKind::InvalidArgument, "run average: runs cover different points");
  }
  std::vector<double> out(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    double sum = 0.0;
    for (const auto& c : per_run_curves) sum += c[i];
    out[i] = sum / static_cast<double>(per_run_curves.size());
  }
  return out;
}

double mae_cycle_average(std::span<const double> run_averaged) {
  return mean_of(run_averaged, "cycle average");
}

double effort_savings(int n_full_real, int n_real_in_mixed) {
  if (n_full_real <= 0) fail(ErrorKind::InvalidArgument, "effort savings: full set must be non-empty");
  if (n_real_in_mixed < 0 || n_real_in_mixed > n_full_real) {
    fail(ErrorKind::InvalidArgument, "effort savings: mixed real count outside [0, full]");
  }
  return static_cast<double>(n_full_real - n_real_in_mixed) / n_full_real * 100.0;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) fail(ErrorKind::InvalidArgument, "pearson: length mismatch");
  if (xs.size() < 2) fail(ErrorKind::InsufficientData, "pearson: need at least 2 points");
  double mx = mean_of(xs, "pearson"), my = mean_of(ys, "pearson");
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) fail(ErrorKind::InvalidArgument, "pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---------------------------------------------------------------------------

std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::SeedOnly: return "seed-only";
    case ScenarioKind::SeedPlusFixedSynthetic: return "seed-plus-fixed-synthetic";
    case ScenarioKind::PartialReplacement: return "partial-replacement";
    case ScenarioKind::SparseEnrichment: return "sparse-enrichment";
  }
  return "?";
}

std::string to_string(Target t) { return t == Target::Eol ? "eol" : "knee"; }
std::string to_string(ModelKind m) { return m == ModelKind::Gpr ? "gpr" : "cnn"; }

ScenarioKind parse_scenario_kind(const std::string& s) {
  for (auto k : {ScenarioKind::SeedOnly, ScenarioKind::SeedPlusFixedSynthetic,
                 ScenarioKind::PartialReplacement, ScenarioKind::SparseEnrichment}) {
    if (s == to_string(k)) return k;
  }
  fail(ErrorKind::InvalidArgument,
       "unknown scenario kind '" + s +
           "' (expected seed-only, seed-plus-fixed-synthetic, partial-replacement or "
           "sparse-enrichment)");
}

Target parse_target(const std::string& s) {
  if (s == "eol") return Target::Eol;
  if (s == "knee") return Target::Knee;
  fail(ErrorKind::InvalidArgument, "unknown target '" + s + "' (expected eol or knee)");
}

ModelKind parse_model_kind(const std::string& s) {
  if (s == "gpr") return ModelKind::Gpr;
  if (s == "cnn") return ModelKind::Cnn;
  fail(ErrorKind::InvalidArgument, "unknown model kind '" + s + "' (expected gpr or cnn)");
}

void require_valid(const Scenario& s) {
  auto bad = [&](const std::string& msg) {
    fail(ErrorKind::InvalidArgument, "scenario " + s.name + ": " + msg);
  };
  if (s.runs < 1) bad("runs must be >= 1");
  if (s.real_counts.empty()) bad("no real cell counts");
  for (int r : s.real_counts) {
    if (r < 1) bad("real cell counts must be positive");
  }
  if (s.available_cycles.empty()) bad("no available-cycles points");
  if (s.stride < 1) bad("stride must be >= 1");
  for (int a : s.available_cycles) {
    if (a < s.stride) bad("available cycles must be >= stride");
  }
  if (s.test_cells.empty() && s.test_count < 1) bad("no test cells and test_count < 1");
  switch (s.kind) {
    case ScenarioKind::SeedOnly: break;
    case ScenarioKind::SeedPlusFixedSynthetic:
      if (s.synthetic_count < 1) bad("synthetic_count must be positive");
      break;
    case ScenarioKind::PartialReplacement:
      if (s.total_count < 1) bad("total_count must be positive");
      for (int r : s.real_counts) {
        if (r > s.total_count) bad("real count exceeds total_count");
      }
      break;
    case ScenarioKind::SparseEnrichment:
      if (!(s.synthetic_ratio > 0.0) || !std::isfinite(s.synthetic_ratio)) {
        bad("synthetic ratio must be positive");
      }
      break;
  }
}

int synthetic_count_for(const Scenario& s, int real_count) {
  switch (s.kind) {
    case ScenarioKind::SeedOnly: return 0;
    case ScenarioKind::SeedPlusFixedSynthetic: return s.synthetic_count;
    case ScenarioKind::PartialReplacement: return s.total_count - real_count;
    case ScenarioKind::SparseEnrichment:
      return static_cast<int>(sdg::round_half_away(s.synthetic_ratio * real_count));
  }
  return 0;
}

// ---------------------------------------------------------------------------

namespace {

std::optional<int> target_of(const landmarks::Landmarks& lm, Target t) {
  return t == Target::Eol ? lm.eol_cycle : lm.knee_cycle;
}

int max_window(std::span<const int> available) {
  return *std::max_element(available.begin(), available.end());
}

bool covers(const CapacityCurve& c, int available, int stride) {
  InputWindow w{available, stride};
  int last_needed = c.first_cycle() + static_cast<int>(w.length() - 1) * stride;
  return c.last_cycle() >= last_needed;
}

// A real cell with a usable target and enough history for every window.
struct Usable {
  const CapacityCurve* curve;
  double target;
};

std::vector<Usable> usable_cells(const Dataset& dataset,
                                 std::span<const landmarks::CellLabels> labels, Target target,
                                 std::span<const int> available, int stride) {
  std::vector<Usable> out;
  int widest = max_window(available);
  for (const auto& c : dataset.curves) {
    const auto* l = landmarks::find(labels, c.cell_id);
    if (!l) continue;
    auto t = target_of(l->landmarks, target);
    if (!t || !covers(c, widest, stride)) continue;
    out.push_back({&c, static_cast<double>(*t)});
  }
  return out;
}

// Training rows for one model, with the grouping used to keep synthetic
// descendants of a held-out cell out of its tuning folds.
struct TrainingSet {
  std::vector<const CapacityCurve*> curves;
  std::vector<double> targets;
  std::vector<bool> real;
  std::vector<std::size_t> groups;
};

std::vector<double> scaled_input(const CapacityCurve& c, const InputWindow& w, bool normalize) {
  auto row = build_input(c, w);
  if (normalize) {
    for (double& v : row) v /= c.nominal_capacity;
  }
  return row;
}

gpr::GprHyper fallback_hyper(std::span<const gpr::Row> rows, std::span<const double> targets) {
  auto grid = gpr::default_grid(rows, targets, 3);
  return grid[grid.size() / 2];
}

std::vector<double> train_and_predict(ModelKind model, const TrainingSet& train,
                                      std::span<const CapacityCurve* const> test,
                                      const InputWindow& window, const HarnessOptions& opt,
                                      std::uint64_t seed) {
  std::vector<double> out;
  out.reserve(test.size());
  if (model == ModelKind::Gpr) {
    std::vector<gpr::Row> rows;
    rows.reserve(train.curves.size());
    for (const auto* c : train.curves) rows.push_back(build_input(*c, window));

    std::size_t real_groups = 0;
    {
      std::vector<std::size_t> seen;
      for (std::size_t i = 0; i < train.groups.size(); ++i) {
        if (train.real[i] && std::find(seen.begin(), seen.end(), train.groups[i]) == seen.end()) {
          seen.push_back(train.groups[i]);
        }
      }
      real_groups = seen.size();
    }
    gpr::GprHyper hyper = fallback_hyper(rows, train.targets);
    std::size_t k = std::min(opt.gpr_folds, real_groups);
    if (opt.gpr_tune && k >= 2) {
      auto grid = gpr::default_grid(rows, train.targets, opt.gpr_length_points);
      std::unique_ptr<bool[]> eligible(new bool[train.real.size()]);
      for (std::size_t i = 0; i < train.real.size(); ++i) eligible[i] = train.real[i];
      auto tuned = gpr::tune_grouped(rows, train.targets, grid, k, train.groups,
                                     std::span<const bool>(eligible.get(), train.real.size()));
      if (std::isfinite(tuned.best_cv_mae)) hyper = tuned.best;
    }
    auto fitted = gpr::GprModel::fit(rows, train.targets, hyper);
    for (const auto* c : test) out.push_back(fitted.predict(build_input(*c, window)).mean);
    return out;
  }

  std::vector<std::vector<double>> rows;
  rows.reserve(train.curves.size());
  for (const auto* c : train.curves) {
    rows.push_back(scaled_input(*c, window, opt.cnn_normalize_by_nominal));
  }
  auto cfg = opt.cnn;
  cfg.seed = seed;
  cfg.feature_scale = 1.0;
  std::unique_ptr<bool[]> eligible(new bool[train.real.size()]);
  for (std::size_t i = 0; i < train.real.size(); ++i) eligible[i] = train.real[i];
  auto arch = cnn::CnnArch::standard(window.length());
  auto net = cnn::train(rows, train.targets, arch, cfg,
                        std::span<const bool>(eligible.get(), train.real.size()));
  for (const auto* c : test) {
    out.push_back(net.predict(scaled_input(*c, window, opt.cnn_normalize_by_nominal)));
  }
  return out;
}

struct LabeledSynthetic {
  std::vector<CapacityCurve> curves;
  std::vector<double> targets;
  std::vector<sdg::Provenance> provenance;
};

// Draws `count` synthetic curves whose target landmark exists and whose
// history covers every window. Rejected draws are replaced by further rounds
// from derived streams.
LabeledSynthetic draw_synthetic(std::span<const CapacityCurve> seeds,
                                const sdg::ParamRanges& ranges, std::size_t count,
                                std::uint64_t stream, const std::string& prefix,
                                const Scenario& scenario, const HarnessOptions& opt) {
  LabeledSynthetic out;
  if (count == 0) return out;
  int widest = max_window(scenario.available_cycles);
  for (std::size_t round = 0; out.curves.size() < count; ++round) {
    if (round > opt.synthetic_retries) {
      fail(ErrorKind::GenerationFailure,
           "only " + std::to_string(out.curves.size()) + " of " + std::to_string(count) +
               " synthetic curves had a usable " + to_string(scenario.target) + " label");
    }
    sdg::BatchOptions bo;
    bo.max_retries = opt.synthetic_retries;
    bo.id_prefix = prefix + "k" + std::to_string(round);
    auto batch = sdg::generate_batch(seeds, ranges, count - out.curves.size(),
                                     derive_stream(stream, "harness.synthetic", {round}), bo);
    for (std::size_t i = 0; i < batch.curves.size(); ++i) {
      auto& c = batch.curves[i];
      if (!covers(c, widest, scenario.stride)) continue;
      std::optional<int> t = scenario.target == Target::Eol
                                 ? landmarks::detect_eol(c, opt.eol_threshold)
                                 : (c.size() >= 6 ? landmarks::detect_knee(c) : std::nullopt);
      if (!t) continue;
      out.targets.push_back(*t);
      out.provenance.push_back(batch.provenance[i]);
      out.curves.push_back(std::move(c));
    }
  }
  return out;
}

std::string step_run_prefix(const Scenario& s, std::size_t step, std::size_t run) {
  return "syn-" + s.name + "-s" + std::to_string(step) + "-r" + std::to_string(run) + "-";
}

}  // namespace

std::vector<std::string> choose_test_cells(const Dataset& dataset,
                                           std::span<const landmarks::CellLabels> labels,
                                           const Scenario& scenario) {
  require_valid(scenario);
  auto usable = usable_cells(dataset, labels, scenario.target, scenario.available_cycles,
                             scenario.stride);
  std::vector<std::string> out;
  if (!scenario.test_cells.empty()) {
    for (const auto& id : scenario.test_cells) {
      bool ok = std::any_of(usable.begin(), usable.end(),
                            [&](const Usable& u) { return u.curve->cell_id == id; });
      if (!ok) {
        fail(ErrorKind::InsufficientData,
             "test cell " + id + " is missing, unlabeled, or too short for the window");
      }
      if (std::find(out.begin(), out.end(), id) != out.end()) {
        fail(ErrorKind::InvalidArgument, "test cell " + id + " listed twice");
      }
      out.push_back(id);
    }
    return out;
  }
  auto n = static_cast<std::size_t>(scenario.test_count);
  if (n >= usable.size()) {
    fail(ErrorKind::InsufficientData,
         "scenario " + scenario.name + ": " + std::to_string(usable.size()) +
             " usable cells cannot supply " + std::to_string(n) + " test cells and a training set");
  }
  Rng rng(derive_stream(scenario.master_seed, "harness.test_split"));
  auto picks = rng.sample_without_replacement(usable.size(), n);
  std::sort(picks.begin(), picks.end());
  for (auto i : picks) out.push_back(usable[i].curve->cell_id);
  return out;
}

ExperimentReport run_scenario(const Dataset& dataset,
                              std::span<const landmarks::CellLabels> labels,
                              const Scenario& scenario, ModelKind model,
                              const sdg::ParamRanges& ranges, const HarnessOptions& options) {
  auto started = std::chrono::steady_clock::now();
  require_valid(scenario);
  bool needs_synthetic = false;
  for (int r : scenario.real_counts) needs_synthetic |= synthetic_count_for(scenario, r) > 0;
  if (needs_synthetic) sdg::require_valid(ranges);

  ExperimentReport report;
  report.dataset = dataset.name;
  report.scenario = scenario;
  report.model = model;
  report.ranges = ranges;
  report.available_cycles = scenario.available_cycles;
  report.test_cells = choose_test_cells(dataset, labels, scenario);

  auto usable = usable_cells(dataset, labels, scenario.target, scenario.available_cycles,
                             scenario.stride);
  std::vector<Usable> pool;
  std::vector<const CapacityCurve*> test_curves;
  std::vector<double> test_targets;
  for (const auto& id : report.test_cells) {
    for (const auto& u : usable) {
      if (u.curve->cell_id == id) {
        test_curves.push_back(u.curve);
        test_targets.push_back(u.target);
      }
    }
  }
  for (const auto& u : usable) {
    if (std::find(report.test_cells.begin(), report.test_cells.end(), u.curve->cell_id) ==
        report.test_cells.end()) {
      pool.push_back(u);
    }
  }

  const std::size_t points = scenario.available_cycles.size();
  for (std::size_t step = 0; step < scenario.real_counts.size(); ++step) {
    int real_count = scenario.real_counts[step];
    if (static_cast<std::size_t>(real_count) > pool.size()) {
      fail(ErrorKind::InsufficientData,
           "scenario " + scenario.name + " requests " + std::to_string(real_count) +
               " real cells but only " + std::to_string(pool.size()) +
               " labeled non-test cells are available");
    }
    int synthetic_count = synthetic_count_for(scenario, real_count);

    StepResult result;
    result.real_count = real_count;
    result.synthetic_count = synthetic_count;
    result.runs.resize(static_cast<std::size_t>(scenario.runs));

    parallel_for(result.runs.size(), options.threads, [&](std::size_t run) {
      RunRecord& rec = result.runs[run];
      rec.run = run;
      rec.stream_seed = derive_stream(scenario.master_seed, "harness.run", {step, run});
      Rng rng(rec.stream_seed);
      auto picks = rng.sample_without_replacement(pool.size(), static_cast<std::size_t>(real_count));
      std::sort(picks.begin(), picks.end());

      TrainingSet train;
      std::vector<CapacityCurve> seeds;
      for (std::size_t g = 0; g < picks.size(); ++g) {
        const auto& u = pool[picks[g]];
        train.curves.push_back(u.curve);
        train.targets.push_back(u.target);
        train.real.push_back(true);
        train.groups.push_back(g);
        rec.train_cells.push_back(u.curve->cell_id);
        seeds.push_back(*u.curve);
      }

      auto syn = draw_synthetic(seeds, ranges, static_cast<std::size_t>(synthetic_count),
                                rec.stream_seed, step_run_prefix(scenario, step, run), scenario,
                                options);
      for (std::size_t i = 0; i < syn.curves.size(); ++i) {
        train.curves.push_back(&syn.curves[i]);
        train.targets.push_back(syn.targets[i]);
        train.real.push_back(false);
        auto it = std::find(rec.train_cells.begin(), rec.train_cells.end(),
                            syn.provenance[i].seed_cell_id);
        train.groups.push_back(static_cast<std::size_t>(it - rec.train_cells.begin()));
      }
      rec.synthetic = std::move(syn.provenance);

      rec.cells.resize(test_curves.size());
      for (std::size_t t = 0; t < test_curves.size(); ++t) {
        rec.cells[t].cell_id = test_curves[t]->cell_id;
        rec.cells[t].actual = test_targets[t];
        rec.cells[t].predicted.assign(points, 0.0);
      }
      rec.mae_cycles.assign(points, 0.0);
      rec.mae_pct.assign(points, 0.0);
      for (std::size_t p = 0; p < points; ++p) {
        InputWindow window{scenario.available_cycles[p], scenario.stride};
        auto predicted = train_and_predict(
            model, train, test_curves, window, options,
            derive_stream(rec.stream_seed, "harness.model", {p}));
        std::vector<double> abs_err, pct_err;
        for (std::size_t t = 0; t < test_curves.size(); ++t) {
          rec.cells[t].predicted[p] = predicted[t];
          abs_err.push_back(prediction_error(predicted[t], test_targets[t]));
          pct_err.push_back(percent_error(predicted[t], test_targets[t]));
        }
        rec.mae_cycles[p] = mae(abs_err);
        rec.mae_pct[p] = mae(pct_err);
      }
    });

    std::vector<std::vector<double>> cyc, pct;
    for (const auto& r : result.runs) {
      cyc.push_back(r.mae_cycles);
      pct.push_back(r.mae_pct);
    }
    result.mae_ra_cycles = mae_run_average(cyc);
    result.mae_ra_pct = mae_run_average(pct);
    result.mae_ca_cycles = mae_cycle_average(result.mae_ra_cycles);
    result.mae_ca_pct = mae_cycle_average(result.mae_ra_pct);
    report.steps.push_back(std::move(result));
  }

  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t k,
                                                      std::uint64_t seed) {
  if (k < 2 || k > n) {
    fail(ErrorKind::InvalidArgument,
         "k-fold: k = " + std::to_string(k) + " outside [2, " + std::to_string(n) + "]");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_stream(seed, "harness.kfold"));
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t base = n / k, extra = n % k, pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    std::size_t size = base + (f < extra ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                    order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return folds;
}

CrossValReport kfold_cv(const Dataset& dataset, std::span<const landmarks::CellLabels> labels,
                        std::size_t k, ModelKind model, Target target,
                        std::span<const int> available_cycles, int stride, std::uint64_t seed,
                        const HarnessOptions& options) {
  if (available_cycles.empty()) fail(ErrorKind::InvalidArgument, "k-fold: no available-cycles points");
  for (int a : available_cycles) InputWindow{a, stride}.length();
  auto usable = usable_cells(dataset, labels, target, available_cycles, stride);
  auto folds = kfold_partition(usable.size(), k, seed);

  CrossValReport report;
  report.k = k;
  report.available_cycles.assign(available_cycles.begin(), available_cycles.end());
  report.folds.resize(k);
  const std::size_t points = available_cycles.size();

  parallel_for(k, options.threads, [&](std::size_t f) {
    TrainingSet train;
    std::vector<const CapacityCurve*> test;
    std::vector<double> actual;
    for (std::size_t i = 0; i < usable.size(); ++i) {
      bool held = std::find(folds[f].begin(), folds[f].end(), i) != folds[f].end();
      if (held) {
        test.push_back(usable[i].curve);
        actual.push_back(usable[i].target);
      } else {
        train.groups.push_back(train.curves.size());
        train.curves.push_back(usable[i].curve);
        train.targets.push_back(usable[i].target);
        train.real.push_back(true);
      }
    }
    FoldResult& out = report.folds[f];
    for (const auto* c : test) out.test_cells.push_back(c->cell_id);
    out.mae_cycles.assign(points, 0.0);
    out.mae_pct.assign(points, 0.0);
    for (std::size_t p = 0; p < points; ++p) {
      InputWindow window{available_cycles[p], stride};
      auto predicted = train_and_predict(model, train, test, window, options,
                                         derive_stream(seed, "harness.kfold.model", {f, p}));
      std::vector<double> abs_err, pct_err;
      for (std::size_t t = 0; t < test.size(); ++t) {
        abs_err.push_back(prediction_error(predicted[t], actual[t]));
        pct_err.push_back(percent_error(predicted[t], actual[t]));
      }
      out.mae_cycles[p] = mae(abs_err);
      out.mae_pct[p] = mae(pct_err);
    }
  });

  report.min_cycles.assign(points, 0.0);
  report.max_cycles.assign(points, 0.0);
  report.mean_cycles.assign(points, 0.0);
  for (std::size_t p = 0; p < points; ++p) {
    double lo = report.folds[0].mae_cycles[p], hi = lo, sum = 0.0;
    for (const auto& fr : report.folds) {
      lo = std::min(lo, fr.mae_cycles[p]);
      hi = std::max(hi, fr.mae_cycles[p]);
      sum += fr.mae_cycles[p];
    }
    report.min_cycles[p] = lo;
    report.max_cycles[p] = hi;
    report.mean_cycles[p] = sum / static_cast<double>(k);
  }
  return report;
}

std::vector<SweepEntry> sensitivity_sweep(const Dataset& dataset,
                                          std::span<const landmarks::CellLabels> labels,
                                          std::span<const double> halfwidths,
                                          const Scenario& scenario, ModelKind model,
                                          const sdg::PairwiseStats& stats,
                                          const HarnessOptions& options) {
  if (halfwidths.empty()) fail(ErrorKind::InvalidArgument, "sensitivity sweep: no half-widths");
  std::vector<SweepEntry> out;
  for (double h : halfwidths) {
    SweepEntry e;
    e.halfwidth = h;
    e.ranges = sdg::derive_ranges(stats, h);
    e.report = run_scenario(dataset, labels, scenario, model, e.ranges, options);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace capfade::eval
