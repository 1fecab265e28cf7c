// capfade: capacity-fade synthesis and landmark prediction experiments.

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "usage.hpp"

namespace {

using capfade::cli::Config;

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;  // config key -> value from a dedicated flag
};

// Registers a flag that writes straight into a config key.
void keyed(CLI::App* app, Common& common, const std::string& flag, const std::string& key,
           const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&common, key](const std::string& v) { common.flags[key] = v; }, help + " [" + key + "]");
}

Config assemble(const Common& common) {
  Config c;
  if (!common.config_path.empty()) c = Config::load(common.config_path);
  for (const auto& [k, v] : common.flags) c.set(k, v);
  for (const auto& s : common.sets) c.set(s);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"capfade - synthetic capacity-fade curves and landmark prediction experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "capfade 0.1.0");

  using Cmd = int (*)(const Config&, std::ostream&, std::ostream&);
  struct Entry {
    CLI::App* app;
    Cmd fn;
    Common common;
  };
  std::vector<std::unique_ptr<Entry>> entries;

  auto add = [&](const std::string& name, const std::string& help, Cmd fn) -> Entry& {
    auto e = std::make_unique<Entry>();
    e->app = app.add_subcommand(name, help);
    e->fn = fn;
    e->app->add_option("-c,--config", e->common.config_path, "key=value config file")
        ->check(CLI::ExistingFile);
    e->app->add_option("--set", e->common.sets, "override a setting, key=value (repeatable)");
    keyed(e->app, e->common, "--seed", "seed", "master seed");
    keyed(e->app, e->common, "-o,--out", "out.dir", "output directory");
    entries.push_back(std::move(e));
    return *entries.back();
  };
  auto data_flags = [&](Entry& e) {
    keyed(e.app, e.common, "-d,--data", "dataset.path", "canonical dataset CSV");
    keyed(e.app, e.common, "-n,--nominal", "dataset.nominal_ah", "nominal capacity in Ah");
    keyed(e.app, e.common, "--profile", "dataset.profile", "rwth, stanford, oxford or nasa");
    keyed(e.app, e.common, "-j,--threads", "threads", "worker threads, 0 = all cores");
  };

  auto& ingest = add("ingest", "parse and validate a dataset CSV", capfade::cli::cmd_ingest);
  data_flags(ingest);
  keyed(ingest.app, ingest.common, "--write", "ingest.out", "write the accepted cells here");

  auto& generate = add("generate", "synthesize curves from a seed dataset", capfade::cli::cmd_generate);
  data_flags(generate);
  keyed(generate.app, generate.common, "--count", "generate.count", "number of synthetic curves");
  keyed(generate.app, generate.common, "--halfwidth", "sdg.elongation_halfwidth",
        "elongation range half-width");

  auto& label = add("label", "detect knee and EOL cycles", capfade::cli::cmd_label);
  data_flags(label);
  keyed(label.app, label.common, "--threshold", "eol.threshold", "EOL fraction of nominal");
  keyed(label.app, label.common, "--labels-out", "label.out", "labels CSV path");

  auto& experiment = add("experiment", "run the configured scenario arms", capfade::cli::cmd_experiment);
  data_flags(experiment);
  keyed(experiment.app, experiment.common, "--model", "model.kind", "gpr, cnn or gpr,cnn");

  auto& sensitivity = add("sensitivity", "sweep the elongation half-width",
                          capfade::cli::cmd_sensitivity);
  data_flags(sensitivity);
  keyed(sensitivity.app, sensitivity.common, "--model", "model.kind", "gpr, cnn or gpr,cnn");

  auto& crossval = add("crossval", "k-fold cross validation on real cells", capfade::cli::cmd_crossval);
  data_flags(crossval);
  keyed(crossval.app, crossval.common, "-k,--folds", "crossval.k", "number of folds");
  keyed(crossval.app, crossval.common, "--model", "model.kind", "gpr, cnn or gpr,cnn");

  auto& gradcheck = add("gradcheck", "finite-difference check of the CNN gradients",
                        capfade::cli::cmd_gradcheck);
  keyed(gradcheck.app, gradcheck.common, "--tolerance", "gradcheck.tolerance",
        "maximum relative error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (auto& e : entries) {
    if (!e->app->parsed()) continue;
    try {
      return e->fn(assemble(e->common), std::cout, std::cerr);
    } catch (...) {
      return capfade::cli::exit_code_for_current_exception(std::cerr);
    }
  }
  return 1;
}
