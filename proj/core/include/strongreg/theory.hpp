#pragma once

#include <array>

#include <Eigen/Core>

#include "strongreg/evaluation.hpp"
#include "strongreg/gmm.hpp"
#include "strongreg/solvers.hpp"

namespace strongreg {

// Corruption constants with s² + t² = q and 2st = -q/(k-1), q = 2c - kc²/(k-1).
struct StConstants {
  double s = 0.0;
  double t = 0.0;
};

// Accepts 0 <= c < (k-1)/k; throws InvalidCorruption otherwise.
StConstants st_constants(double c, int k);

struct RidgeClosedForm {
  double lambda_tilde = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
  double zeta = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

RidgeClosedForm ridge_closed_form(const GmmConfig& cfg, double lambda);

using Gammas = std::array<double, 4>;

struct SaddlePoint {
  Gammas gamma{};
  double delta_opt = 0.0;  // ℓ∞ only
  double xi = 0.0;
  double omega = 0.0;
  double big_r = 0.0;
  double big_delta = 0.0;
  double objective = 0.0;
};

struct TheoryPrediction {
  RegKind kind = RegKind::L2Squared;
  double lambda = 0.0;
  double error = 0.0;
  double error_stderr = 0.0;
  double margin_arg = 0.0;
  // margin without the 1/σ factor; equal to margin_arg when σ = 1
  double margin_arg_raw = 0.0;
  double sparsity_fraction = 0.0;  // L1: predicted nonzero fraction R
  double boundary_fraction = 0.0;  // LInf: predicted fraction on ±||w||∞, both sides together
  RidgeClosedForm ridge;           // L2Squared
  SaddlePoint saddle;              // L1, LInf
};

// Ξ = (n/k) √(radicand); throws NegativeRadicand.
double xi_value(const Gammas& g, const GmmConfig& cfg);
// throws CorrelationOutOfRange when |Ω| >= 1
double omega_value(const Gammas& g, const GmmConfig& cfg, double xi);

// (n/k)[-cγ₁ - (k-1)γ₁²/4 - (1-c)γ₂ - γ₂²/4 - sγ₃ - γ₃²/4 - tγ₄ - γ₄²/4]
double saddle_linear_part(const Gammas& g, const GmmConfig& cfg);

// Saddle objectives; -inf where the radicand of Ξ is negative.
double lasso_objective(const Gammas& g, const GmmConfig& cfg, double lambda);
double linf_objective(const Gammas& g, double delta, const GmmConfig& cfg, double lambda);

SaddlePoint lasso_saddle(const GmmConfig& cfg, double lambda);
SaddlePoint linf_saddle(const GmmConfig& cfg, double lambda);

// Δ = √E[(ST(ΞG; λ) - ST(ΞG'; λ))²] for standard normals with correlation Ω.
double lasso_delta(double xi, double omega, double lambda);
// Δ = √E[(clip(ΞG/2ρ) - clip(ΞG'/2ρ))²] with clipping at ±δ/λ.
double linf_delta(double xi, double omega, double lambda, double delta, double rho);

TheoryPrediction ridge_prediction(const GmmConfig& cfg, double lambda, const QkEstimator& qk);
TheoryPrediction lasso_prediction(const GmmConfig& cfg, double lambda, const QkEstimator& qk);
TheoryPrediction linf_prediction(const GmmConfig& cfg, double lambda, const QkEstimator& qk);
TheoryPrediction predict(const GmmConfig& cfg, const RegularizerSpec& reg, const QkEstimator& qk);
// uses default_qk(cfg.k)
TheoryPrediction predict(const GmmConfig& cfg, const RegularizerSpec& reg);

}  // namespace strongreg
