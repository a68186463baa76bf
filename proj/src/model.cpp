#include "coopfilter/model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>

#include "coopfilter/errors.hpp"
#include "coopfilter/linalg.hpp"
#include "json.hpp"

namespace coopfilter {

namespace {

constexpr double kRankTol = 1e-10;
constexpr double kEigClusterTol = 1e-6;

bool is_symmetric(const Eigen::MatrixXd& M) {
  const double scale = std::max(1.0, M.norm());
  return (M - M.transpose()).norm() <= 1e-10 * scale;
}

void require_dims(const SystemModel& model) {
  const auto n = model.A.rows();
  if (model.A.cols() != n) {
    throw UsageError("A must be square, got " + std::to_string(model.A.rows()) +
                     "x" + std::to_string(model.A.cols()));
  }
  if (n == 0) throw UsageError("state dimension must be positive");
  if (model.C.rows() == 0) throw UsageError("C must have at least one row");
  if (model.C.cols() != n) throw UsageError("C column count must equal n");
  if (model.C_e.rows() > 0 && model.C_e.cols() != n) {
    throw UsageError("C_e column count must equal n");
  }
  if (model.Q.rows() != n || model.Q.cols() != n) {
    throw UsageError("Q must be n x n");
  }
  if (model.R.rows() != model.C.rows() || model.R.cols() != model.C.rows()) {
    throw UsageError("R must be m x m with m = rows(C)");
  }
  if (model.R_e.rows() != model.C_e.rows() ||
      model.R_e.cols() != model.C_e.rows()) {
    throw UsageError("R_e must be square with size rows(C_e)");
  }
}

/// PBH test: every eigenvalue of A with |lambda| >= 1 - 1e-8 must keep
/// rank([lambda I - A; Cmap]) equal to n.
CheckResult pbh_detectable(const std::string& name, const Eigen::MatrixXd& A,
                           const Eigen::MatrixXd& Cmap) {
  CheckResult res{name, true, false, ""};
  if (Cmap.rows() == 0) {
    res.pass = false;
    res.detail = "observation map has no rows";
    return res;
  }
  const int n = static_cast<int>(A.rows());
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
  std::ostringstream bad;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<double> lam = es.eigenvalues()(i);
    if (std::abs(lam) < 1.0 - 1e-8) continue;
    Eigen::MatrixXcd stack(n + Cmap.rows(), n);
    stack.topRows(n) =
        lam * Eigen::MatrixXcd::Identity(n, n) - A.cast<std::complex<double>>();
    stack.bottomRows(Cmap.rows()) = Cmap.cast<std::complex<double>>();
    if (linalg::numerical_rank(stack, kRankTol) < n) {
      if (bad.tellp() > 0) bad << ", ";
      bad << lam;
      res.pass = false;
    }
  }
  if (!res.pass) res.detail = "undetectable modes at eigenvalues " + bad.str();
  return res;
}

Eigen::MatrixXd parse_matrix(const nlohmann::json& j, const std::string& key,
                             int forced_cols) {
  if (!j.contains(key)) throw UsageError("model file missing key '" + key + "'");
  const auto& rows = j.at(key);
  if (!rows.is_array()) throw UsageError("'" + key + "' must be a list of rows");
  const int nrows = static_cast<int>(rows.size());
  if (nrows == 0) {
    return Eigen::MatrixXd(0, std::max(forced_cols, 0));
  }
  if (!rows[0].is_array()) {
    throw UsageError("'" + key + "' rows must be lists of numbers");
  }
  const int ncols = static_cast<int>(rows[0].size());
  Eigen::MatrixXd M(nrows, ncols);
  for (int r = 0; r < nrows; ++r) {
    const auto& row = rows[r];
    if (!row.is_array() || static_cast<int>(row.size()) != ncols) {
      throw UsageError("'" + key + "' has ragged rows");
    }
    for (int c = 0; c < ncols; ++c) {
      if (!row[c].is_number()) {
        throw UsageError("'" + key + "' contains a non-numeric cell");
      }
      M(r, c) = row[c].get<double>();
    }
  }
  return M;
}

}  // namespace

bool ValidationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.pass; });
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    out << c.name << ": " << (c.pass ? (c.warning ? "pass (warning)" : "pass")
                                     : "FAIL");
    if (!c.detail.empty()) out << " [" << c.detail << "]";
    out << "\n";
  }
  return out.str();
}

ValidationReport validate(const SystemModel& model) {
  require_dims(model);
  ValidationReport report;

  {
    CheckResult c{"Q_symmetric_psd", true, false, ""};
    if (!is_symmetric(model.Q)) {
      c.pass = false;
      c.detail = "Q is not symmetric";
    } else {
      const double lmin = linalg::min_eig_sym(linalg::symmetrize(model.Q));
      if (lmin < -1e-10 * std::max(1.0, model.Q.norm())) {
        c.pass = false;
        c.detail = "Q has negative eigenvalue " + std::to_string(lmin);
      } else if (lmin <= 0.0) {
        c.warning = true;
        c.detail = "Q is singular; decay constants will be unavailable";
      }
    }
    report.checks.push_back(std::move(c));
  }

  auto check_pd = [](const std::string& name, const Eigen::MatrixXd& M) {
    CheckResult c{name, true, false, ""};
    if (M.rows() == 0) return c;
    if (!is_symmetric(M)) {
      c.pass = false;
      c.detail = name + " is not symmetric";
    } else if (linalg::min_eig_sym(linalg::symmetrize(M)) <= 0.0) {
      c.pass = false;
      c.detail = name + " is not positive definite";
    }
    return c;
  };
  report.checks.push_back(check_pd("R_symmetric_pd", model.R));
  report.checks.push_back(check_pd("R_e_symmetric_pd", model.R_e));

  {
    CheckResult c{"A_marginally_stable", true, false, ""};
    const double rho = linalg::spectral_radius(model.A);
    if (rho > 1.0 + kMarginalStabilityEps) {
      c.pass = false;
      c.detail = "spectral radius " + std::to_string(rho) + " exceeds 1";
    }
    report.checks.push_back(std::move(c));
  }

  report.checks.push_back(pbh_detectable("detectable_A_C", model.A, model.C));
  if (model.m_ext() > 0) {
    report.checks.push_back(
        pbh_detectable("detectable_A_Ce", model.A, model.C_e));
  }
  return report;
}

AugmentedModel augment(const SystemModel& model) {
  require_dims(model);
  AugmentedModel aug;
  const int m = model.m();
  const int me = model.m_ext();
  aug.m_bar = m + me;
  aug.C_bar.resize(aug.m_bar, model.n());
  aug.C_bar.topRows(m) = model.C;
  if (me > 0) aug.C_bar.bottomRows(me) = model.C_e;
  aug.R_bar = Eigen::MatrixXd::Zero(aug.m_bar, aug.m_bar);
  aug.R_bar.topLeftCorner(m, m) = model.R;
  if (me > 0) aug.R_bar.bottomRightCorner(me, me) = model.R_e;
  return aug;
}

SpectralProfile spectral_profile(const SystemModel& model) {
  require_dims(model);
  SpectralProfile profile;
  const int n = model.n();
  Eigen::EigenSolver<Eigen::MatrixXd> es(model.A, /*computeEigenvectors=*/false);
  const Eigen::VectorXcd lams = es.eigenvalues();
  profile.rho_A = lams.cwiseAbs().maxCoeff();

  std::vector<std::complex<double>> unit_reps;
  for (Eigen::Index i = 0; i < lams.size(); ++i) {
    const std::complex<double> lam = lams(i);
    if (std::abs(lam) < 1.0 - kMarginalStabilityEps) continue;
    bool seen = std::any_of(unit_reps.begin(), unit_reps.end(),
                            [&](const std::complex<double>& rep) {
                              return std::abs(rep - lam) < kEigClusterTol;
                            });
    if (!seen) unit_reps.push_back(lam);
  }

  int kappa = 0;
  for (const auto& lam : unit_reps) {
    const Eigen::MatrixXcd shifted =
        model.A.cast<std::complex<double>>() -
        lam * Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd power = shifted;
    int prev_rank = linalg::numerical_rank(power, kRankTol);
    int block = n;
    for (int j = 1; j <= n; ++j) {
      power *= shifted;
      const int next_rank = linalg::numerical_rank(power, kRankTol);
      if (next_rank == prev_rank) {
        block = j;
        break;
      }
      prev_rank = next_rank;
    }
    kappa = std::max(kappa, block);
  }
  profile.kappa = kappa;
  return profile;
}

SystemModel model_from_json(const nlohmann::json& j) {
  SystemModel model;
  model.A = parse_matrix(j, "A", -1);
  const int n = static_cast<int>(model.A.cols());
  model.C = parse_matrix(j, "C", n);
  model.C_e = parse_matrix(j, "C_e", n);
  model.Q = parse_matrix(j, "Q", n);
  model.R = parse_matrix(j, "R", -1);
  model.R_e = parse_matrix(j, "R_e", static_cast<int>(model.C_e.rows()));
  require_dims(model);
  return model;
}

SystemModel load_model_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("model file " + path + " is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

}  // namespace coopfilter
