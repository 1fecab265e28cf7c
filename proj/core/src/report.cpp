#include <cmath>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "capfade/error.hpp"
#include "capfade/eval.hpp"
#include "capfade/text.hpp"

namespace capfade::eval {

namespace {

using Json = nlohmann::ordered_json;

Json scenario_json(const Scenario& s) {
  Json j;
  j["name"] = s.name;
  j["kind"] = to_string(s.kind);
  j["real_counts"] = s.real_counts;
  j["synthetic_count"] = s.synthetic_count;
  j["total_count"] = s.total_count;
  j["synthetic_ratio"] = s.synthetic_ratio;
  j["runs"] = s.runs;
  j["master_seed"] = s.master_seed;
  j["target"] = to_string(s.target);
  j["available_cycles"] = s.available_cycles;
  j["stride"] = s.stride;
  j["test_count"] = s.test_count;
  return j;
}

Json ranges_json(const sdg::ParamRanges& r) {
  Json j;
  j["offset"] = {r.offset_min, r.offset_max};
  j["slope"] = {r.slope_min, r.slope_max};
  j["elongation"] = {r.elongation_min, r.elongation_max};
  j["slope_reference_cycle"] = r.slope_reference_cycle;
  return j;
}

Json run_json(const RunRecord& r) {
  Json j;
  j["run"] = r.run;
  j["stream_seed"] = r.stream_seed;
  j["train_cells"] = r.train_cells;
  Json syn = Json::array();
  for (const auto& p : r.synthetic) {
    Json s;
    s["synthetic_id"] = p.synthetic_id;
    s["seed_cell_id"] = p.seed_cell_id;
    s["offset"] = p.params.offset;
    s["slope"] = p.params.slope;
    s["elongation"] = p.params.elongation;
    s["master_seed"] = p.master_seed;
    s["draw_index"] = p.draw_index;
    s["attempts"] = p.attempts;
    syn.push_back(std::move(s));
  }
  j["synthetic"] = std::move(syn);
  j["mae_cycles"] = r.mae_cycles;
  j["mae_pct"] = r.mae_pct;
  Json cells = Json::array();
  for (const auto& c : r.cells) {
    Json cj;
    cj["cell_id"] = c.cell_id;
    cj["actual"] = c.actual;
    cj["predicted"] = c.predicted;
    cells.push_back(std::move(cj));
  }
  j["cells"] = std::move(cells);
  return j;
}

// Aggregates of one step rebuilt from raw predictions, in the order
// cells -> run -> run average -> cycle average.
struct Recomputed {
  std::vector<std::vector<double>> run_cycles, run_pct;
  std::vector<double> ra_cycles, ra_pct;
  double ca_cycles = 0.0, ca_pct = 0.0;
};

Recomputed recompute(const std::vector<std::vector<CellPrediction>>& runs, std::size_t points) {
  Recomputed out;
  for (const auto& cells : runs) {
    std::vector<double> cyc(points), pct(points);
    for (std::size_t p = 0; p < points; ++p) {
      std::vector<double> e, q;
      for (const auto& c : cells) {
        if (c.predicted.size() != points) {
          fail(ErrorKind::Parse, "cell " + c.cell_id + " has the wrong number of predictions");
        }
        e.push_back(prediction_error(c.predicted[p], c.actual));
        q.push_back(percent_error(c.predicted[p], c.actual));
      }
      cyc[p] = mae(e);
      pct[p] = mae(q);
    }
    out.run_cycles.push_back(std::move(cyc));
    out.run_pct.push_back(std::move(pct));
  }
  out.ra_cycles = mae_run_average(out.run_cycles);
  out.ra_pct = mae_run_average(out.run_pct);
  out.ca_cycles = mae_cycle_average(out.ra_cycles);
  out.ca_pct = mae_cycle_average(out.ra_pct);
  return out;
}

bool close(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

std::string report_to_json(const ExperimentReport& report, bool include_wall_clock) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "experiment_report";
  j["dataset"] = report.dataset;
  j["model"] = to_string(report.model);
  j["scenario"] = scenario_json(report.scenario);
  j["ranges"] = ranges_json(report.ranges);
  j["test_cells"] = report.test_cells;
  j["available_cycles"] = report.available_cycles;
  Json steps = Json::array();
  for (const auto& s : report.steps) {
    Json sj;
    sj["real_count"] = s.real_count;
    sj["synthetic_count"] = s.synthetic_count;
    sj["mae_ra_cycles"] = s.mae_ra_cycles;
    sj["mae_ra_pct"] = s.mae_ra_pct;
    sj["mae_ca_cycles"] = s.mae_ca_cycles;
    sj["mae_ca_pct"] = s.mae_ca_pct;
    Json runs = Json::array();
    for (const auto& r : s.runs) runs.push_back(run_json(r));
    sj["runs"] = std::move(runs);
    steps.push_back(std::move(sj));
  }
  j["steps"] = std::move(steps);
  if (include_wall_clock) j["wall_clock_seconds"] = report.wall_clock_seconds;
  return j.dump(2) + "\n";
}

std::string crossval_to_json(const CrossValReport& report) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "crossval_report";
  j["k"] = report.k;
  j["available_cycles"] = report.available_cycles;
  Json folds = Json::array();
  for (const auto& f : report.folds) {
    Json fj;
    fj["test_cells"] = f.test_cells;
    fj["mae_cycles"] = f.mae_cycles;
    fj["mae_pct"] = f.mae_pct;
    folds.push_back(std::move(fj));
  }
  j["folds"] = std::move(folds);
  j["min_cycles"] = report.min_cycles;
  j["max_cycles"] = report.max_cycles;
  j["mean_cycles"] = report.mean_cycles;
  return j.dump(2) + "\n";
}

double recompute_mae_ca(const StepResult& step) {
  if (step.runs.empty()) fail(ErrorKind::InvalidArgument, "step has no runs");
  std::vector<std::vector<CellPrediction>> runs;
  for (const auto& r : step.runs) runs.push_back(r.cells);
  std::size_t points = step.runs.front().mae_cycles.size();
  return recompute(runs, points).ca_cycles;
}

std::vector<std::string> validate_report_json(const std::string& text) {
  std::vector<std::string> problems;
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    return {std::string("not JSON: ") + e.what()};
  }
  auto need = [&](const Json& obj, const char* key, auto pred, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key) || !pred(obj.at(key))) {
      problems.push_back(where + ": missing or mistyped '" + key + "'");
      return false;
    }
    return true;
  };
  auto is_num = [](const Json& v) { return v.is_number(); };
  auto is_str = [](const Json& v) { return v.is_string(); };
  auto is_arr = [](const Json& v) { return v.is_array(); };
  auto is_obj = [](const Json& v) { return v.is_object(); };

  if (!need(j, "schema_version", is_num, "report")) return problems;
  if (j["schema_version"] != kReportSchemaVersion) {
    problems.push_back("report: unsupported schema_version");
    return problems;
  }
  need(j, "kind", is_str, "report");
  need(j, "dataset", is_str, "report");
  need(j, "model", is_str, "report");
  need(j, "scenario", is_obj, "report");
  need(j, "ranges", is_obj, "report");
  bool ok = need(j, "test_cells", is_arr, "report") &
            need(j, "available_cycles", is_arr, "report") & need(j, "steps", is_arr, "report");
  if (!ok) return problems;
  if (j.contains("wall_clock_seconds") && !j["wall_clock_seconds"].is_number()) {
    problems.push_back("report: wall_clock_seconds must be a number");
  }

  std::set<std::string> test_cells;
  for (const auto& t : j["test_cells"]) {
    if (!t.is_string()) {
      problems.push_back("report: test cell ids must be strings");
      return problems;
    }
    test_cells.insert(t.get<std::string>());
  }
  const std::size_t points = j["available_cycles"].size();
  if (points == 0) problems.push_back("report: no available-cycles points");

  std::size_t step_index = 0;
  for (const auto& s : j["steps"]) {
    std::string where = "step " + std::to_string(step_index++);
    bool sok = need(s, "real_count", is_num, where) & need(s, "synthetic_count", is_num, where) &
               need(s, "mae_ra_cycles", is_arr, where) & need(s, "mae_ra_pct", is_arr, where) &
               need(s, "mae_ca_cycles", is_num, where) & need(s, "mae_ca_pct", is_num, where) &
               need(s, "runs", is_arr, where);
    if (!sok) continue;
    if (s["mae_ra_cycles"].size() != points || s["mae_ra_pct"].size() != points) {
      problems.push_back(where + ": run-averaged curves do not match the cycle grid");
      continue;
    }
    if (s["runs"].empty()) {
      problems.push_back(where + ": no runs");
      continue;
    }

    std::vector<std::vector<CellPrediction>> runs;
    std::vector<std::vector<double>> stored_cycles, stored_pct;
    bool runs_ok = true;
    for (const auto& r : s["runs"]) {
      std::string rw = where + " run " + (r.contains("run") ? r["run"].dump() : std::string("?"));
      if (!(need(r, "train_cells", is_arr, rw) & need(r, "synthetic", is_arr, rw) &
            need(r, "mae_cycles", is_arr, rw) & need(r, "mae_pct", is_arr, rw) &
            need(r, "cells", is_arr, rw))) {
        runs_ok = false;
        continue;
      }
      std::set<std::string> train;
      for (const auto& c : r["train_cells"]) {
        auto id = c.get<std::string>();
        if (test_cells.count(id)) problems.push_back(rw + ": test cell " + id + " used for training");
        train.insert(id);
      }
      for (const auto& p : r["synthetic"]) {
        if (!need(p, "synthetic_id", is_str, rw) || !need(p, "seed_cell_id", is_str, rw)) {
          runs_ok = false;
          continue;
        }
        auto id = p["synthetic_id"].get<std::string>();
        if (test_cells.count(id)) problems.push_back(rw + ": synthetic " + id + " in the test set");
        if (!train.count(p["seed_cell_id"].get<std::string>())) {
          problems.push_back(rw + ": synthetic " + id + " derived from a non-training cell");
        }
      }
      std::vector<CellPrediction> cells;
      for (const auto& c : r["cells"]) {
        if (!(need(c, "cell_id", is_str, rw) & need(c, "actual", is_num, rw) &
              need(c, "predicted", is_arr, rw))) {
          runs_ok = false;
          continue;
        }
        CellPrediction cp;
        cp.cell_id = c["cell_id"].get<std::string>();
        if (!test_cells.count(cp.cell_id)) {
          problems.push_back(rw + ": scored cell " + cp.cell_id + " is not a test cell");
        }
        cp.actual = c["actual"].get<double>();
        for (const auto& v : c["predicted"]) {
          if (!v.is_number()) {
            problems.push_back(rw + ": non-numeric prediction for " + cp.cell_id);
            runs_ok = false;
            break;
          }
          cp.predicted.push_back(v.get<double>());
        }
        cells.push_back(std::move(cp));
      }
      if (cells.empty()) {
        problems.push_back(rw + ": no scored cells");
        runs_ok = false;
      }
      runs.push_back(std::move(cells));
      stored_cycles.push_back(r["mae_cycles"].get<std::vector<double>>());
      stored_pct.push_back(r["mae_pct"].get<std::vector<double>>());
    }
    if (!runs_ok) continue;

    Recomputed rc;
    try {
      rc = recompute(runs, points);
    } catch (const Error& e) {
      problems.push_back(where + ": " + e.what());
      continue;
    }
    for (std::size_t r = 0; r < runs.size(); ++r) {
      for (std::size_t p = 0; p < points; ++p) {
        if (stored_cycles[r].size() != points || stored_pct[r].size() != points ||
            !close(stored_cycles[r][p], rc.run_cycles[r][p]) ||
            !close(stored_pct[r][p], rc.run_pct[r][p])) {
          problems.push_back(where + ": run " + std::to_string(r) +
                             " MAE disagrees with its per-cell predictions");
          p = points;
        }
      }
    }
    for (std::size_t p = 0; p < points; ++p) {
      if (!close(s["mae_ra_cycles"][p].get<double>(), rc.ra_cycles[p]) ||
          !close(s["mae_ra_pct"][p].get<double>(), rc.ra_pct[p])) {
        problems.push_back(where + ": run average at point " + std::to_string(p) +
                           " disagrees with the runs");
      }
    }
    if (!close(s["mae_ca_cycles"].get<double>(), rc.ca_cycles) ||
        !close(s["mae_ca_pct"].get<double>(), rc.ca_pct)) {
      problems.push_back(where + ": cycle average disagrees with the run-averaged curve");
    }
  }
  return problems;
}

void write_plot_csv(std::ostream& out, std::span<const int> available_cycles,
                    const StepResult& step) {
  if (step.mae_ra_cycles.size() != available_cycles.size() ||
      step.mae_ra_pct.size() != available_cycles.size()) {
    fail(ErrorKind::InvalidArgument, "plot csv: curve length does not match the cycle grid");
  }
  out << "available_cycles,mae_ra_pct,mae_ra_cycles\n";
  for (std::size_t i = 0; i < available_cycles.size(); ++i) {
    out << available_cycles[i] << ',' << text::format_double(step.mae_ra_pct[i]) << ','
        << text::format_double(step.mae_ra_cycles[i]) << '\n';
  }
}

}  // namespace capfade::eval
