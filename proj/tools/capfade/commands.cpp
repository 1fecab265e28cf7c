#include "commands.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "capfade/cnn.hpp"
#include "capfade/dataset_io.hpp"
#include "capfade/error.hpp"
#include "capfade/eval.hpp"
#include "capfade/landmarks.hpp"
#include "capfade/sdg.hpp"
#include "capfade/text.hpp"
#include "usage.hpp"

namespace capfade::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Settings shared by several commands

std::optional<DatasetProfile> profile_of(const Config& c) {
  auto name = c.get("dataset.profile");
  if (!name) return std::nullopt;
  auto p = dataset_profile(*name);
  if (!p) {
    throw UsageError("dataset.profile: unknown profile '" + *name +
                     "' (expected rwth, stanford, oxford or nasa)");
  }
  return p;
}

fs::path resolve(const Config& c, const std::string& path) {
  fs::path p(path);
  if (p.is_relative() && !c.base_dir.empty()) return c.base_dir / p;
  return p;
}

double nominal_of(const Config& c) {
  if (c.has("dataset.nominal_ah")) {
    double v = c.number("dataset.nominal_ah", 0.0);
    if (!(v > 0.0)) throw UsageError("dataset.nominal_ah must be positive");
    return v;
  }
  if (auto p = profile_of(c)) return p->nominal_ah;
  throw UsageError("missing required setting 'dataset.nominal_ah' (or dataset.profile)");
}

int slope_cycle_of(const Config& c) {
  long long fallback = 0;
  if (auto p = profile_of(c)) fallback = p->slope_reference_cycle;
  long long n = c.integer("sdg.n", fallback);
  if (n < 0 || n == 1) throw UsageError("sdg.n must be 0 or at least 2");
  return static_cast<int>(n);
}

double eol_threshold_of(const Config& c) {
  double fallback = 0.8;
  if (auto p = profile_of(c)) fallback = p->eol_threshold;
  double t = c.number("eol.threshold", fallback);
  if (!(t > 0.0 && t < 1.0)) throw UsageError("eol.threshold must lie in (0, 1)");
  return t;
}

unsigned threads_of(const Config& c) {
  long long t = c.integer("threads", 0);
  if (t < 0) throw UsageError("threads must be >= 0");
  return static_cast<unsigned>(t);
}

std::vector<int> default_available_cycles(const Config& c) {
  std::vector<int> grid;
  auto p = c.get("dataset.profile");
  int top = p && *p == "stanford" ? 400 : 800;
  for (int a = 100; a <= top; a += 100) grid.push_back(a);
  return grid;
}

IngestResult load_dataset(const Config& c, std::ostream& err) {
  auto path = resolve(c, c.require_str("dataset.path"));
  auto r = read_dataset_csv(path, nominal_of(c));
  if (auto name = c.get("dataset.name")) r.dataset.name = *name;
  for (const auto& rej : r.rejected) {
    err << "warning: rejected cell " << rej.cell_id << ": " << rej.reason << "\n";
  }
  return r;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot write " + path.string());
  return f;
}

void close_out(std::ofstream& f, const fs::path& path) {
  f.flush();
  if (!f) fail(ErrorKind::Io, "write failed: " + path.string());
}

void write_text(const fs::path& path, const std::string& body) {
  auto f = open_out(path);
  f << body;
  close_out(f, path);
}

sdg::ParamRanges ranges_for(const Config& c, const Dataset& d) {
  auto stats = sdg::pairwise_stats(d, slope_cycle_of(c), c.flag("sdg.within_condition", true),
                                   static_cast<std::size_t>(c.integer("sdg.bins", 20)));
  return sdg::derive_ranges(stats, c.number("sdg.elongation_halfwidth", 0.25));
}

Json ranges_json(const sdg::ParamRanges& r) {
  Json j;
  j["offset"] = {r.offset_min, r.offset_max};
  j["slope"] = {r.slope_min, r.slope_max};
  j["elongation"] = {r.elongation_min, r.elongation_max};
  j["slope_reference_cycle"] = r.slope_reference_cycle;
  return j;
}

void print_ranges(std::ostream& out, const sdg::ParamRanges& r) {
  out << "offset     [" << text::format_double(r.offset_min) << ", "
      << text::format_double(r.offset_max) << "] Ah\n"
      << "slope      [" << text::format_double(r.slope_min) << ", "
      << text::format_double(r.slope_max) << "] Ah (n = " << r.slope_reference_cycle << ")\n"
      << "elongation [" << text::format_double(r.elongation_min) << ", "
      << text::format_double(r.elongation_max) << "]\n";
}

std::vector<landmarks::CellLabels> labels_for(const Config& c, const Dataset& d) {
  if (auto p = c.get("labels.path")) {
    auto path = resolve(c, *p);
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open labels " + path.string());
    return landmarks::read_labels_csv(in);
  }
  return landmarks::label_dataset(d, eol_threshold_of(c));
}

eval::HarnessOptions harness_options(const Config& c) {
  eval::HarnessOptions o;
  o.eol_threshold = eol_threshold_of(c);
  o.gpr_tune = c.flag("gpr.tune", true);
  o.gpr_folds = static_cast<std::size_t>(c.integer("gpr.folds", 5));
  o.gpr_length_points = static_cast<std::size_t>(c.integer("gpr.length_points", 9));
  o.cnn.epochs = static_cast<std::size_t>(c.integer("cnn.epochs", 700));
  o.cnn.learning_rate = c.number("cnn.learning_rate", o.cnn.learning_rate);
  o.cnn.momentum = c.number("cnn.momentum", o.cnn.momentum);
  o.cnn.batch_size = static_cast<std::size_t>(c.integer("cnn.batch_size", 8));
  o.cnn.validation_fraction = c.number("cnn.validation_fraction", o.cnn.validation_fraction);
  o.cnn_normalize_by_nominal = c.flag("cnn.normalize_by_nominal", true);
  o.synthetic_retries = static_cast<std::size_t>(c.integer("sdg.max_retries", 100));
  o.threads = threads_of(c);
  return o;
}

std::vector<eval::ModelKind> models_of(const Config& c) {
  auto names = c.str_list("model.kind");
  if (names.empty()) names.push_back("gpr");
  std::vector<eval::ModelKind> out;
  for (const auto& n : names) {
    try {
      out.push_back(eval::parse_model_kind(n));
    } catch (const Error& e) {
      throw UsageError(std::string("model.kind: ") + e.what());
    }
  }
  return out;
}

eval::Scenario scenario_for(const Config& c, const std::string& arm) {
  const std::string own = "scenario." + arm + ".", shared = "scenario.";
  auto get = [&](const std::string& key) { return scoped(c, own, shared, key); };
  // Reads an arm-level key through a temporary config so the typed getters
  // apply the same parsing rules.
  auto typed = [&](const std::string& key) {
    Config t;
    if (auto v = get(key)) t.set(key, *v);
    return t;
  };

  eval::Scenario s;
  s.name = arm;
  auto kind = get("kind");
  if (!kind) throw UsageError("missing required setting '" + own + "kind'");
  try {
    s.kind = eval::parse_scenario_kind(*kind);
    s.target = eval::parse_target(get("target").value_or("eol"));
  } catch (const Error& e) {
    throw UsageError(own + ": " + e.what());
  }
  s.real_counts = typed("real_counts").int_list("real_counts", {});
  s.synthetic_count = static_cast<int>(typed("synthetic_count").integer("synthetic_count", 0));
  s.total_count = static_cast<int>(typed("total_count").integer("total_count", 0));
  s.synthetic_ratio = typed("synthetic_ratio").number("synthetic_ratio", 1.0);
  s.runs = static_cast<int>(typed("runs").integer("runs", 15));
  s.master_seed = typed("seed").seed("seed", c.seed("seed", 0));
  s.available_cycles =
      typed("available_cycles").int_list("available_cycles", default_available_cycles(c));
  s.stride = static_cast<int>(typed("stride").integer("stride", 2));
  s.test_cells = typed("test_cells").str_list("test_cells");
  s.test_count = static_cast<int>(typed("test_count").integer("test_count", 0));
  try {
    eval::require_valid(s);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return s;
}

std::vector<std::string> arms_of(const Config& c) {
  auto arms = c.str_list("scenario.arms");
  if (arms.empty()) throw UsageError("missing required setting 'scenario.arms'");
  return arms;
}

bool needs_synthetic(const eval::Scenario& s) {
  for (int r : s.real_counts) {
    if (eval::synthetic_count_for(s, r) > 0) return true;
  }
  return false;
}

void print_step_table(std::ostream& out, const eval::ExperimentReport& r) {
  for (const auto& s : r.steps) {
    out << "  real " << s.real_count << " + synthetic " << s.synthetic_count
        << ": MAE_c.a. " << text::format_double(s.mae_ca_cycles) << " cycles, "
        << text::format_double(s.mae_ca_pct) << " %\n";
  }
}

// Writes one report and its plot CSVs; returns the file names.
std::vector<std::string> emit_report(const fs::path& dir, const std::string& stem,
                                     const eval::ExperimentReport& r) {
  std::vector<std::string> files;
  write_text(dir / (stem + ".json"), eval::report_to_json(r));
  files.push_back(stem + ".json");
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    std::string name = stem + ".step" + std::to_string(i) + ".csv";
    std::ostringstream csv;
    eval::write_plot_csv(csv, r.available_cycles, r.steps[i]);
    write_text(dir / name, csv.str());
    files.push_back(name);
  }
  return files;
}

Json config_json(const Config& c) {
  Json j = Json::object();
  for (const auto& [k, v] : c.entries()) j[k] = v;
  return j;
}

}  // namespace

fs::path output_dir(const Config& c) {
  if (auto v = c.get("out.dir"); v && !v->empty()) return *v;
  if (const char* env = std::getenv("CAPFADE_OUT_DIR"); env && *env) return env;
  return "capfade-out";
}

int exit_code_for_current_exception(std::ostream& err) {
  try {
    throw;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << (e.is_numeric() ? "numeric failure" : "data error") << " (" << to_string(e.kind())
        << "): " << e.what() << "\n";
    return e.is_numeric() ? 3 : 2;
  } catch (const fs::filesystem_error& e) {
    err << "data error (io): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

// ---------------------------------------------------------------------------

int cmd_ingest(const Config& c, std::ostream& out, std::ostream& err) {
  auto r = load_dataset(c, err);
  out << "dataset " << r.dataset.name << ": " << r.dataset.curves.size() << " cells loaded, "
      << r.rejected.size() << " rejected\n";
  for (const auto& [id, rows] : r.row_counts) {
    bool rejected = std::any_of(r.rejected.begin(), r.rejected.end(),
                                [&](const CellRejection& x) { return x.cell_id == id; });
    out << "  " << id << ": " << rows << " rows" << (rejected ? " (rejected)" : "") << "\n";
  }
  if (auto dest = c.get("ingest.out")) {
    fs::path p(*dest);
    auto f = open_out(p);
    write_dataset_csv(f, r.dataset);
    close_out(f, p);
    out << "wrote " << p.string() << "\n";
  }
  return 0;
}

int cmd_generate(const Config& c, std::ostream& out, std::ostream& err) {
  long long count = c.integer("generate.count", 0);
  if (count < 0) throw UsageError("generate.count must be >= 0");
  auto r = load_dataset(c, err);
  auto ranges = ranges_for(c, r.dataset);
  out << "parameter ranges from " << r.dataset.curves.size() << " seed cells:\n";
  print_ranges(out, ranges);

  sdg::BatchOptions opts;
  opts.max_retries = static_cast<std::size_t>(c.integer("sdg.max_retries", 100));
  opts.id_prefix = c.str("generate.id_prefix", "syn");
  opts.threads = threads_of(c);
  auto batch = sdg::generate_batch(r.dataset.curves, ranges, static_cast<std::size_t>(count),
                                   c.seed("seed", 0), opts);

  auto dir = output_dir(c);
  fs::create_directories(dir);
  {
    auto p = dir / "synthetic.csv";
    auto f = open_out(p);
    write_curves_csv(f, batch.curves);
    close_out(f, p);
  }
  {
    auto p = dir / "provenance.jsonl";
    auto f = open_out(p);
    sdg::write_provenance_jsonl(f, batch.provenance);
    close_out(f, p);
  }
  Json summary;
  summary["seed_cells"] = r.dataset.curves.size();
  summary["count"] = batch.curves.size();
  summary["master_seed"] = c.seed("seed", 0);
  summary["ranges"] = ranges_json(ranges);
  write_text(dir / "ranges.json", summary.dump(2) + "\n");
  out << "wrote " << batch.curves.size() << " synthetic curves to " << (dir / "synthetic.csv").string()
      << "\n";
  return 0;
}

int cmd_label(const Config& c, std::ostream& out, std::ostream& err) {
  auto r = load_dataset(c, err);
  auto labels = landmarks::label_dataset(r.dataset, eol_threshold_of(c));
  fs::path p = c.has("label.out") ? fs::path(*c.get("label.out")) : output_dir(c) / "labels.csv";
  auto f = open_out(p);
  landmarks::write_labels_csv(f, labels);
  close_out(f, p);
  std::size_t knees = 0, eols = 0;
  for (const auto& l : labels) {
    knees += l.landmarks.knee_cycle.has_value();
    eols += l.landmarks.eol_cycle.has_value();
    for (const auto& n : l.notes) err << "note: " << l.cell_id << ": " << n << "\n";
  }
  out << "labeled " << labels.size() << " cells (" << knees << " knees, " << eols
      << " EOL points) -> " << p.string() << "\n";
  return 0;
}

int cmd_experiment(const Config& c, std::ostream& out, std::ostream& err) {
  auto arms = arms_of(c);
  auto models = models_of(c);
  std::vector<eval::Scenario> scenarios;
  for (const auto& a : arms) scenarios.push_back(scenario_for(c, a));
  auto options = harness_options(c);

  auto r = load_dataset(c, err);
  auto labels = labels_for(c, r.dataset);
  sdg::ParamRanges ranges;
  if (std::any_of(scenarios.begin(), scenarios.end(), needs_synthetic)) {
    ranges = ranges_for(c, r.dataset);
    print_ranges(out, ranges);
  }

  auto dir = output_dir(c);
  fs::create_directories(dir);
  Json manifest;
  manifest["schema_version"] = eval::kReportSchemaVersion;
  manifest["command"] = "experiment";
  manifest["dataset"] = r.dataset.name;
  manifest["config"] = config_json(c);
  manifest["arms"] = Json::array();
  auto save_manifest = [&] { write_text(dir / "manifest.json", manifest.dump(2) + "\n"); };

  int status = 0;
  for (const auto& s : scenarios) {
    for (auto m : models) {
      std::string stem = s.name + "." + eval::to_string(m);
      Json entry;
      entry["arm"] = s.name;
      entry["model"] = eval::to_string(m);
      try {
        auto report = eval::run_scenario(r.dataset, labels, s, m, ranges, options);
        entry["status"] = "ok";
        entry["files"] = emit_report(dir, stem, report);
        out << "arm " << stem << " (" << eval::to_string(s.kind) << "):\n";
        print_step_table(out, report);
      } catch (...) {
        std::ostringstream msg;
        int code = exit_code_for_current_exception(msg);
        err << "arm " << stem << " failed: " << msg.str();
        entry["status"] = "failed";
        entry["error"] = msg.str();
        if (status == 0) status = code;
      }
      manifest["arms"].push_back(std::move(entry));
      save_manifest();
    }
  }
  return status;
}

int cmd_sensitivity(const Config& c, std::ostream& out, std::ostream& err) {
  auto arms = arms_of(c);
  std::string arm = c.str("sensitivity.arm", arms.front());
  auto scenario = scenario_for(c, arm);
  auto halfwidths = c.number_list("sensitivity.halfwidths", {0.10, 0.25, 0.40});
  if (halfwidths.empty()) throw UsageError("sensitivity.halfwidths is empty");
  for (double h : halfwidths) {
    if (!(h > 0.0 && h < 1.0)) throw UsageError("sensitivity.halfwidths must lie in (0, 1)");
  }
  auto models = models_of(c);
  auto options = harness_options(c);

  auto r = load_dataset(c, err);
  auto labels = labels_for(c, r.dataset);
  auto stats = sdg::pairwise_stats(r.dataset, slope_cycle_of(c),
                                   c.flag("sdg.within_condition", true),
                                   static_cast<std::size_t>(c.integer("sdg.bins", 20)));
  auto dir = output_dir(c);
  fs::create_directories(dir);
  std::ostringstream summary;
  summary << "model,halfwidth,real_count,synthetic_count,mae_ca_cycles,mae_ca_pct\n";
  for (auto m : models) {
    auto sweep = eval::sensitivity_sweep(r.dataset, labels, halfwidths, scenario, m, stats, options);
    for (const auto& e : sweep) {
      std::string stem = "sensitivity." + eval::to_string(m) + ".h" + text::format_double(e.halfwidth);
      emit_report(dir, stem, e.report);
      out << stem << ":\n";
      print_step_table(out, e.report);
      for (const auto& s : e.report.steps) {
        summary << eval::to_string(m) << ',' << text::format_double(e.halfwidth) << ','
                << s.real_count << ',' << s.synthetic_count << ','
                << text::format_double(s.mae_ca_cycles) << ',' << text::format_double(s.mae_ca_pct)
                << '\n';
      }
    }
  }
  write_text(dir / "sensitivity.csv", summary.str());
  return 0;
}

int cmd_crossval(const Config& c, std::ostream& out, std::ostream& err) {
  long long k = c.integer("crossval.k", 5);
  if (k < 2) throw UsageError("crossval.k must be >= 2");
  eval::Target target;
  try {
    target = eval::parse_target(c.str("crossval.target", c.str("scenario.target", "eol")));
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  auto available = c.int_list("crossval.available_cycles",
                               c.int_list("scenario.available_cycles", default_available_cycles(c)));
  int stride = static_cast<int>(c.integer("scenario.stride", 2));
  auto models = models_of(c);
  auto options = harness_options(c);

  auto r = load_dataset(c, err);
  auto labels = labels_for(c, r.dataset);
  auto dir = output_dir(c);
  fs::create_directories(dir);
  for (auto m : models) {
    eval::CrossValReport rep;
    try {
      rep = eval::kfold_cv(r.dataset, labels, static_cast<std::size_t>(k), m, target, available,
                           stride, c.seed("seed", 0), options);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::InvalidArgument) throw UsageError(e.what());
      throw;
    }
    std::string stem = "crossval." + eval::to_string(m);
    write_text(dir / (stem + ".json"), eval::crossval_to_json(rep));
    std::ostringstream csv;
    csv << "available_cycles,min_mae_cycles,max_mae_cycles,mean_mae_cycles\n";
    for (std::size_t i = 0; i < available.size(); ++i) {
      csv << available[i] << ',' << text::format_double(rep.min_cycles[i]) << ','
          << text::format_double(rep.max_cycles[i]) << ',' << text::format_double(rep.mean_cycles[i])
          << '\n';
    }
    write_text(dir / (stem + ".csv"), csv.str());
    out << stem << ": " << k << " folds";
    for (std::size_t i = 0; i < available.size(); ++i) {
      out << (i ? ", " : " | mean MAE ") << available[i] << ":" << text::format_double(rep.mean_cycles[i]);
    }
    out << "\n";
  }
  return 0;
}

int cmd_gradcheck(const Config& c, std::ostream& out, std::ostream& /*err*/) {
  double tol = c.number("gradcheck.tolerance", 1e-4);
  std::uint64_t seed = c.seed("seed", 0);

  std::vector<cnn::CnnArch> archs(3);
  archs[0].input_length = 8;
  archs[0].stages = {{3, 2, 2, 0.0}};
  archs[0].dense_widths = {3, 1};
  archs[1].input_length = 10;
  archs[1].stages = {{3, 3, 1, 0.0}, {5, 2, 2, 0.0}};
  archs[1].dense_widths = {1};
  archs[2].input_length = 7;
  archs[2].stages = {{3, 2, 1, 0.0}};
  archs[2].dense_widths = {4, 2, 1};

  bool all = true;
  for (std::size_t i = 0; i < archs.size(); ++i) {
    Rng rng(derive_stream(seed, "gradcheck.input", {i}));
    std::vector<double> x(archs[i].input_length);
    for (double& v : x) v = rng.uniform(0.5, 1.5);
    double target = rng.uniform(-1.0, 1.0);
    auto rep = cnn::gradient_check(archs[i], x, target, tol,
                                   derive_stream(seed, "gradcheck.params", {i}));
    all &= rep.passed;
    out << "architecture " << i << ": " << (rep.passed ? "ok" : "FAILED")
        << "  max relative error " << text::format_double(rep.max_relative_error) << " over "
        << rep.checked << " parameters (" << rep.excluded.size() << " at kinks skipped)\n";
  }
  return all ? 0 : 3;
}

}  // namespace capfade::cli
