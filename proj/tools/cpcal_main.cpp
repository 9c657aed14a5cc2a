// Command-line front end. Talks to the library exclusively through the
// public C API, so it doubles as a smoke test of the shared-library surface.
#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "cpcal/cpcal.h"

namespace {

// "VALUE[UNIT]" with UNIT in {m, mm, um, nm}; bare numbers are meters.
double parse_distance(const std::string& text) {
  std::size_t split = text.size();
  while (split > 0 && std::isalpha(static_cast<unsigned char>(text[split - 1]))) --split;
  const std::string num = text.substr(0, split);
  const std::string unit = text.substr(split);
  double scale = 1.0;
  if (unit == "m" || unit.empty()) {
    scale = 1.0;
  } else if (unit == "mm") {
    scale = 1e-3;
  } else if (unit == "um") {
    scale = 1e-6;
  } else if (unit == "nm") {
    scale = 1e-9;
  } else {
    throw CLI::ValidationError("--distance", "unknown unit '" + unit + "' (use m, mm, um, nm)");
  }
  try {
    std::size_t pos = 0;
    const double v = std::stod(num, &pos);
    if (pos != num.size()) throw std::invalid_argument(num);
    return v * scale;
  } catch (const std::exception&) {
    throw CLI::ValidationError("--distance", "invalid number '" + num + "'");
  }
}

int exit_code(cpcal_status status) {
  switch (status) {
    case CPCAL_OK: return 0;
    case CPCAL_EINVAL:
    case CPCAL_ECONFIG: return 2;
    case CPCAL_EIO: return 3;
    case CPCAL_EDOMAIN:
    case CPCAL_ECONTACT: return 4;
    case CPCAL_ECONVERGENCE: return 5;
    case CPCAL_EQUADRATURE: return 6;
    case CPCAL_EINTERNAL: return 1;
  }
  return 1;
}

int fail(cpcal_status status) {
  std::fprintf(stderr, "error: class=%s: %s\n", cpcal_status_name(status), cpcal_last_error());
  return exit_code(status);
}

struct CommonArgs {
  std::string config;
  std::string out_dir = ".";
  std::string dataset;
  std::string q_grid;
  long long seed = -1;
  bool has_seed = false;
};

std::string overrides_of(const CommonArgs& args) {
  std::string ov;
  if (args.has_seed) ov += "scenario.seed=" + std::to_string(args.seed);
  if (!args.q_grid.empty()) {
    if (!ov.empty()) ov += ";";
    ov += "analysis.q_grid=" + args.q_grid;
  }
  return ov;
}

int run_command(const char* command, const CommonArgs& args, bool needs_dataset) {
  const std::string ov = overrides_of(args);
  char* summary = nullptr;
  const cpcal_status status =
      cpcal_run(command, args.config.c_str(), needs_dataset ? args.dataset.c_str() : nullptr,
                args.out_dir.c_str(), ov.empty() ? nullptr : ov.c_str(), &summary);
  if (status != CPCAL_OK) return fail(status);
  std::fputs(summary, stdout);
  cpcal_string_free(summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("cylinder-plane electrostatic calibration toolkit (cpcal ") +
               cpcal_version() + ")"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string distance = "1um";

  auto add_common = [&](CLI::App* cmd, bool needs_dataset) {
    cmd->add_option("--config", args.config, "scenario config file")->required();
    cmd->add_option("--out", args.out_dir, "output directory (default .)");
    cmd->add_option("--seed", args.seed, "override scenario.seed")
        ->each([&](const std::string&) { args.has_seed = true; });
    cmd->add_option("--q-grid", args.q_grid, "override analysis.q_grid (MIN:MAX:STEP)");
    if (needs_dataset) {
      cmd->add_option("dataset", args.dataset, "input dataset CSV")->required();
    }
  };

  CLI::App* veq = app.add_subcommand("veq", "equivalent Casimir voltage table");
  veq->add_option("--distance", distance, "gap, e.g. 1um, 500nm, 2e-6 (default 1um)");

  add_common(app.add_subcommand("generate", "synthesize a calibration dataset"), false);
  add_common(app.add_subcommand("fit", "parabola + power-law fits"), true);
  add_common(app.add_subcommand("scan", "exponent and truncation scans"), true);
  add_common(app.add_subcommand("residuals", "far-window fit and residuals"), true);
  add_common(app.add_subcommand("deformation", "deformed-cylinder exponent"), false);
  add_common(app.add_subcommand("patches", "patch-potential force table"), false);

  CLI11_PARSE(app, argc, argv);

  if (veq->parsed()) {
    double d = 0;
    try {
      d = parse_distance(distance);
    } catch (const CLI::ValidationError& e) {
      std::fprintf(stderr, "error: class=invalid_argument: %s\n", e.what());
      return 2;
    }
    char* text = nullptr;
    const cpcal_status status = cpcal_veq_table(d, &text);
    if (status != CPCAL_OK) return fail(status);
    std::fputs(text, stdout);
    cpcal_string_free(text);
    return 0;
  }
  if (app.get_subcommand("generate")->parsed()) return run_command("generate", args, false);
  if (app.get_subcommand("fit")->parsed()) return run_command("fit", args, true);
  if (app.get_subcommand("scan")->parsed()) return run_command("scan", args, true);
  if (app.get_subcommand("residuals")->parsed()) return run_command("residuals", args, true);
  if (app.get_subcommand("deformation")->parsed()) return run_command("deformation", args, false);
  if (app.get_subcommand("patches")->parsed()) return run_command("patches", args, false);
  return 1;
}
