#pragma once

#include <filesystem>
#include <iosfwd>

#include "config.hpp"

// Subcommands of the capfade tool. Each reads its settings from a Config,
// writes human-readable progress to `out`/`err`, and returns the exit code:
// 0 ok, 1 usage, 2 data error, 3 numeric failure. Library errors propagate as
// exceptions; exit_code_for() classifies them.
namespace capfade::cli {

int cmd_ingest(const Config& c, std::ostream& out, std::ostream& err);
int cmd_generate(const Config& c, std::ostream& out, std::ostream& err);
int cmd_label(const Config& c, std::ostream& out, std::ostream& err);
int cmd_experiment(const Config& c, std::ostream& out, std::ostream& err);
int cmd_sensitivity(const Config& c, std::ostream& out, std::ostream& err);
int cmd_crossval(const Config& c, std::ostream& out, std::ostream& err);
int cmd_gradcheck(const Config& c, std::ostream& out, std::ostream& err);

/// out.dir, else $CAPFADE_OUT_DIR, else ./capfade-out.
std::filesystem::path output_dir(const Config& c);

/// Exit code for the exception currently being handled.
int exit_code_for_current_exception(std::ostream& err);

}  // namespace capfade::cli
