#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "strongreg/gmm.hpp"
#include "strongreg/solvers.hpp"
#include "strongreg/theory.hpp"

namespace strongreg {

struct SweepSpec {
  GmmConfig cfg;
  RegKind kind = RegKind::L2Squared;
  std::vector<double> lambdas;  // strictly increasing, all > 0
  int trials = 20;
  int test_size = 10000;
  int workers = 1;
  std::int64_t qk_samples = 200000;
  std::string csv_path;
  std::string svg_path;
  std::string fraction_svg_path;

  // throws ConfigError
  void validate() const;
};

// n log-spaced points from lo to hi inclusive
std::vector<double> log_grid(double lo, double hi, int n);
std::vector<double> default_lambda_grid(RegKind kind);

// Plain-text `key = value` lines with `#` comments. Unknown keys are config errors.
using Settings = std::vector<std::pair<std::string, std::string>>;
Settings parse_settings(const std::string& text);
Settings read_settings_file(const std::string& path);

// Applies settings in order to a spec; the lambda grid is resolved once all keys are known.
SweepSpec make_sweep_spec(const Settings& settings);
// Only the GmmConfig keys (d, n, k, r, c, sigma, seed).
GmmConfig make_config(const Settings& settings);

struct SweepRow {
  double lambda = 0.0;
  double empirical_error_mean = 0.0;
  double empirical_error_stderr = 0.0;
  double predicted_error = 0.0;
  double predicted_error_stderr = 0.0;
  double margin_arg = 0.0;
  double margin_arg_raw = 0.0;
  double compressed_error_mean = 0.0;
  double compressed_error_stderr = 0.0;
  double fraction_pred = 0.0;      // L1: nonzero fraction R, LInf: boundary fraction R
  double fraction_measured = 0.0;
  Gammas gamma{};
  double delta_opt = 0.0;
  double xi = 0.0;
  double omega = 0.0;
  double big_delta = 0.0;
  double big_r = 0.0;
  int trials_ok = 0;
  std::string status = "ok";
  std::vector<double> trial_errors;  // not serialized

  bool ok() const { return status == "ok"; }
};

// Rows sorted by lambda; failures are recorded in SweepRow::status instead of thrown.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

std::vector<std::string> sweep_csv_header();
std::string format_csv(const std::vector<SweepRow>& rows);
void emit_csv(const std::vector<SweepRow>& rows, const std::string& path);
std::vector<SweepRow> read_sweep_csv(const std::string& path);

enum class Series { Empirical, Predicted, Compressed, FractionPred, FractionMeasured };
std::string series_label(Series s);

// Log-scale lambda axis, one polyline per series (split where values are missing).
std::string render_svg_plot(const std::vector<SweepRow>& rows, const std::vector<Series>& series,
                            const std::string& title, const std::string& y_label);
void emit_svg_plot(const std::vector<SweepRow>& rows, const std::vector<Series>& series,
                   const std::string& path, const std::string& title = "",
                   const std::string& y_label = "classification error");

// Error plot, plus the sparsity/boundary plot when fraction_path is non-empty and the
// regularizer has one.
void emit_sweep_plots(const std::vector<SweepRow>& rows, RegKind kind, const std::string& error_path,
                      const std::string& fraction_path);

}  // namespace strongreg
