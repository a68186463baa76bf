#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "json.hpp"

namespace coopfilter {

/// Linear stochastic system
///   x_{k+1} = A x_k + w_k,          w_k ~ N(0, Q)
///   y_k     = C x_k + v_k,          v_k ~ N(0, R)      (local sensor)
///   y^e_k   = C_e x_k + v^e_k,      v^e_k ~ N(0, R_e)  (external source)
struct SystemModel {
  Eigen::MatrixXd A;    // n x n state transition
  Eigen::MatrixXd C;    // m x n local observation map
  Eigen::MatrixXd C_e;  // m_ext x n external observation map
  Eigen::MatrixXd Q;    // n x n process-noise covariance, symmetric PSD
  Eigen::MatrixXd R;    // m x m local noise covariance, symmetric PD
  Eigen::MatrixXd R_e;  // m_ext x m_ext external noise covariance, symmetric PD

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(C.rows()); }
  int m_ext() const { return static_cast<int>(C_e.rows()); }
};

/// Stacked observation structure used by the centralized filter:
/// C_bar = [C; C_e], R_bar = blkdiag(R, R_e), m_bar = m + m_ext.
struct AugmentedModel {
  Eigen::MatrixXd C_bar;
  Eigen::MatrixXd R_bar;
  int m_bar = 0;
};

/// Spectral summary of A: its spectral radius and the order of the largest
/// Jordan block at unit-modulus eigenvalues (0 if none).
struct SpectralProfile {
  double rho_A = 0.0;
  int kappa = 0;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  bool warning = false;  // pass with a caveat
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
  std::string summary() const;
};

/// Spectral radius slack: rho(A) <= 1 + kMarginalStabilityEps passes.
inline constexpr double kMarginalStabilityEps = 1e-9;

/// Checks symmetry/definiteness of Q, R, R_e, marginal stability of A, and
/// PBH detectability of (A, C) and (A, C_e). Dimension mismatches throw
/// UsageError; everything else lands in the report.
ValidationReport validate(const SystemModel& model);

AugmentedModel augment(const SystemModel& model);

SpectralProfile spectral_profile(const SystemModel& model);

/// Builds a model from a JSON object with keys A, C, C_e, Q, R, R_e, each a
/// list of rows. See docs/model_format.md.
SystemModel model_from_json(const nlohmann::json& j);

/// Reads a model in the same format from a file.
SystemModel load_model_json(const std::string& path);

}  // namespace coopfilter
