#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "strongreg/error.hpp"
#include "strongreg/experiment.hpp"
#include "strongreg/gmm.hpp"
#include "strongreg/theory.hpp"

namespace {

using namespace strongreg;

constexpr int kOk = 0;
constexpr int kRowFailure = 1;
constexpr int kConfigError = 2;

// Each token is either key=value or the path of a settings file.
Settings collect_settings(const std::vector<std::string>& tokens) {
  Settings out;
  for (const auto& tok : tokens) {
    const auto eq = tok.find('=');
    if (eq != std::string::npos && !std::filesystem::exists(tok)) {
      const auto more = parse_settings(tok);
      out.insert(out.end(), more.begin(), more.end());
    } else {
      const auto more = read_settings_file(tok);
      out.insert(out.end(), more.begin(), more.end());
    }
  }
  return out;
}

void print_kv(const char* key, double value) { std::printf("%s: %.10g\n", key, value); }

int run_predict(const std::string& reg, double lambda, const std::vector<std::string>& cfg_tokens) {
  const GmmConfig cfg = make_config(collect_settings(cfg_tokens));
  const RegKind kind = parse_reg_kind(reg);
  if (!(lambda > 0.0)) throw Error(ErrorCode::ConfigError, "--lambda must be positive");
  const TheoryPrediction p = predict(cfg, {kind, lambda});
  std::printf("reg: %s\n", to_string(kind).c_str());
  print_kv("lambda", lambda);
  print_kv("error", p.error);
  print_kv("error_stderr", p.error_stderr);
  print_kv("margin_arg", p.margin_arg);
  print_kv("margin_arg_raw", p.margin_arg_raw);
  if (kind == RegKind::L2Squared) {
    print_kv("lambda_tilde", p.ridge.lambda_tilde);
    print_kv("delta", p.ridge.delta);
    print_kv("gamma", p.ridge.gamma);
    print_kv("zeta", p.ridge.zeta);
    print_kv("alpha", p.ridge.alpha);
    print_kv("beta", p.ridge.beta);
  } else {
    if (kind == RegKind::L1) {
      print_kv("sparsity_fraction", p.sparsity_fraction);
    } else {
      print_kv("boundary_fraction", p.boundary_fraction);
      print_kv("zeta_per_side", p.boundary_fraction / 2.0);
      print_kv("delta_opt", p.saddle.delta_opt);
    }
    print_kv("gamma1", p.saddle.gamma[0]);
    print_kv("gamma2", p.saddle.gamma[1]);
    print_kv("gamma3", p.saddle.gamma[2]);
    print_kv("gamma4", p.saddle.gamma[3]);
    print_kv("xi", p.saddle.xi);
    print_kv("omega", p.saddle.omega);
    print_kv("big_delta", p.saddle.big_delta);
    print_kv("big_r", p.saddle.big_r);
    print_kv("objective", p.saddle.objective);
  }
  return kOk;
}

int run_gen_data(const std::vector<std::string>& cfg_tokens, const std::string& out) {
  const GmmConfig cfg = make_config(collect_settings(cfg_tokens));
  write_dataset(generate_dataset(cfg), out);
  return kOk;
}

int run_sweep_cmd(const std::string& spec_file, const std::vector<std::string>& overrides,
                  const std::string& csv, const std::string& svg, const std::string& fraction_svg) {
  Settings settings = read_settings_file(spec_file);
  const auto extra = collect_settings(overrides);
  settings.insert(settings.end(), extra.begin(), extra.end());
  if (!csv.empty()) settings.emplace_back("csv", csv);
  if (!svg.empty()) settings.emplace_back("svg", svg);
  if (!fraction_svg.empty()) settings.emplace_back("fraction_svg", fraction_svg);
  const SweepSpec spec = make_sweep_spec(settings);

  const auto rows = run_sweep(spec);
  if (spec.csv_path.empty()) {
    std::fputs(format_csv(rows).c_str(), stdout);
  } else {
    emit_csv(rows, spec.csv_path);
  }
  emit_sweep_plots(rows, spec.kind, spec.svg_path, spec.fraction_svg_path);

  int failed = 0;
  for (const auto& r : rows) {
    if (!r.ok()) {
      ++failed;
      std::fprintf(stderr, "lambda %.10g: %s\n", r.lambda, r.status.c_str());
    }
  }
  return failed ? kRowFailure : kOk;
}

int run_plot(const std::string& csv, const std::string& out, const std::string& fraction_out,
             const std::string& title) {
  const auto rows = read_sweep_csv(csv);
  if (rows.empty()) throw Error(ErrorCode::ConfigError, "'" + csv + "' has no rows");
  auto any_finite = [&](auto field) {
    for (const auto& r : rows)
      if (std::isfinite(field(r))) return true;
    return false;
  };
  std::vector<Series> series{Series::Empirical, Series::Predicted};
  if (any_finite([](const SweepRow& r) { return r.compressed_error_mean; })) series.push_back(Series::Compressed);
  emit_svg_plot(rows, series, out, title);
  if (!fraction_out.empty()) {
    if (!any_finite([](const SweepRow& r) { return r.fraction_pred; }) &&
        !any_finite([](const SweepRow& r) { return r.fraction_measured; })) {
      throw Error(ErrorCode::ConfigError, "'" + csv + "' has no fraction columns to plot");
    }
    emit_svg_plot(rows, {Series::FractionPred, Series::FractionMeasured}, fraction_out, title, "fraction");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized linear classification on corrupted Gaussian mixtures"};
  app.require_subcommand(1);

  std::string spec_file, csv_out, svg_out, fraction_svg_out;
  std::vector<std::string> overrides;
  auto* sweep = app.add_subcommand("sweep", "Run a lambda sweep described by a settings file");
  sweep->add_option("spec", spec_file, "Settings file (key = value lines)")->required();
  sweep->add_option("--set", overrides, "Override a setting, key=value (repeatable)");
  sweep->add_option("--csv", csv_out, "CSV output path (default: stdout)");
  sweep->add_option("--svg", svg_out, "Error plot output path");
  sweep->add_option("--fraction-svg", fraction_svg_out, "Sparsity/boundary plot output path");

  std::string reg;
  double lambda = 0.0;
  std::vector<std::string> cfg_tokens;
  auto* pred = app.add_subcommand("predict", "Print the theoretical prediction for one lambda");
  pred->add_option("--reg", reg, "Regularizer")->required()->check(CLI::IsMember({"l2", "l1", "linf"}));
  pred->add_option("--lambda", lambda, "Regularization strength")->required();
  pred->add_option("cfg", cfg_tokens, "key=value settings or settings files");

  std::string data_out;
  std::vector<std::string> gen_tokens;
  auto* gen = app.add_subcommand("gen-data", "Generate a dataset bundle");
  gen->add_option("cfg", gen_tokens, "key=value settings or settings files");
  gen->add_option("--out", data_out, "Output path (.bin for binary)")->required();

  std::string plot_csv, plot_out, plot_fraction, plot_title;
  auto* plot = app.add_subcommand("plot", "Render a sweep CSV as SVG");
  plot->add_option("csv", plot_csv, "Sweep CSV")->required();
  plot->add_option("--out", plot_out, "Error plot output path")->required();
  plot->add_option("--fraction-out", plot_fraction, "Sparsity/boundary plot output path");
  plot->add_option("--title", plot_title, "Plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*sweep) return run_sweep_cmd(spec_file, overrides, csv_out, svg_out, fraction_svg_out);
    if (*pred) return run_predict(reg, lambda, cfg_tokens);
    if (*gen) return run_gen_data(gen_tokens, data_out);
    if (*plot) return run_plot(plot_csv, plot_out, plot_fraction, plot_title);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::ConfigError:
      case ErrorCode::InvalidArgument:
      case ErrorCode::InvalidCorrelation:
      case ErrorCode::InvalidCorruption: return kConfigError;
      default: return kRowFailure;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRowFailure;
  }
  return kOk;
}
