// Command-line driver: roughfilm solve --config run.yaml [--out DIR] ...
//
// Exit codes: 0 success, 2 parse or validation error, 3 solver failure,
// 1 I/O or any other error.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "roughfilm/roughfilm.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

int exit_code_for(roughfilm::ErrorCode c) {
  using roughfilm::ErrorCode;
  switch (c) {
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::NonPositiveGap:
    case ErrorCode::TooFewSamples:
    case ErrorCode::BadResolution:
    case ErrorCode::DegenerateLambda:
      return kExitInput;
    case ErrorCode::SingularSystem:
    case ErrorCode::NonFinite:
    case ErrorCode::SolverFailure:
    case ErrorCode::QuadratureFailure:
    case ErrorCode::OutOfDomain:
    case ErrorCode::UnsupportedRegime:
    case ErrorCode::ShapeMismatch:
      return kExitSolver;
    case ErrorCode::IoError:
      return kExitOther;
  }
  return kExitOther;
}

std::vector<double> parse_lambda_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size())
      throw roughfilm::ValidationError({"--sweep entry '" + tok + "' is not a number"});
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Homogenized thin-film flow over periodic roughness"};
  app.set_version_flag("--version", std::string(roughfilm::kToolName) + " " + ROUGHFILM_VERSION);
  app.require_subcommand(1);

  std::string config_path, out_dir, format, sweep_list;
  bool dump_fields = false, rerun = false;
  auto* solve = app.add_subcommand("solve", "Solve the cell problems and write the macroscopic report");
  solve->add_option("--config", config_path, "YAML run configuration")->required()->check(CLI::ExistingFile);
  solve->add_option("--out", out_dir, "Output directory (overrides output.directory)");
  solve->add_option("--format", format, "Output format (overrides output.formats)")
      ->check(CLI::IsMember({"json", "csv", "both"}));
  solve->add_flag("--dump-fields", dump_fields, "Write one grid CSV per cell solve");
  solve->add_option("--sweep", sweep_list, "Comma-separated lambda values for a coefficient sweep");
  solve->add_flag("--rerun", rerun, "With --sweep, re-solve every row at doubled resolution");

  CLI11_PARSE(app, argc, argv);

  try {
    const roughfilm::RunConfig config = roughfilm::load_config(config_path);
    auto emit_opt = roughfilm::EmitOptions::from(config.output);
    if (!out_dir.empty()) emit_opt.directory = out_dir;
    if (!format.empty()) {
      emit_opt.json = format != "csv";
      emit_opt.csv = format != "json";
    }
    emit_opt.dump_fields = emit_opt.dump_fields || dump_fields;
    std::vector<double> lambdas;
    const bool do_sweep = solve->count("--sweep") > 0;
    if (do_sweep) lambdas = parse_lambda_list(sweep_list);

    const auto run = roughfilm::run_config(config);
    for (const auto& path : roughfilm::emit(run, config, emit_opt)) std::cout << "wrote " << path.string() << '\n';
    if (do_sweep) {
      const auto rows = roughfilm::sweep(config, lambdas, {rerun});
      std::cout << "wrote " << roughfilm::emit_sweep(rows, emit_opt).string() << '\n';
    }
    const auto& r = run.report;
    std::cout << "regime " << roughfilm::to_string(r.regime) << ", a = " << roughfilm::format_precision(r.coefficient("a"), 10)
              << ", b = " << roughfilm::format_precision(r.coefficient("b"), 10) << '\n';
    for (const auto& w : r.warnings) std::cerr << "warning [" << w.code << "]: " << w.message << '\n';
    return kExitOk;
  } catch (const roughfilm::ValidationError& e) {
    std::cerr << "error: invalid configuration\n";
    for (const auto& v : e.violations()) std::cerr << "  - " << v << '\n';
    return kExitInput;
  } catch (const roughfilm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOther;
  }
}
