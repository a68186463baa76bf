#include "coopfilter/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "coopfilter/errors.hpp"
#include "coopfilter/linalg.hpp"

namespace coopfilter {

namespace {

constexpr double kCondLimit = 1e12;
constexpr double kStableMargin = 1e-9;    // |lambda| < 1 - margin is "stable"
constexpr double kEigMatchTol = 1e-8;
constexpr double kAngleTol = 1e-6;
constexpr double kStrictTol = 1e-10;

double principal_angle(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) {
  const double cosang =
      std::abs(u.dot(v)) / std::max(u.norm() * v.norm(), 1e-300);
  return std::acos(std::clamp(cosang, -1.0, 1.0));
}

Eigen::MatrixXd symplectic_matrix(const Eigen::MatrixXd& A_inv,
                                  const Eigen::MatrixXd& A,
                                  const Eigen::MatrixXd& Q,
                                  const Eigen::MatrixXd& Gmat) {
  const int n = static_cast<int>(A.rows());
  Eigen::MatrixXd S(2 * n, 2 * n);
  S.topLeftCorner(n, n) = A.transpose() + Gmat * A_inv * Q;
  S.topRightCorner(n, n) = -Gmat * A_inv;
  S.bottomLeftCorner(n, n) = -A_inv * Q;
  S.bottomRightCorner(n, n) = A_inv;
  return S;
}

}  // namespace

std::vector<double> squared_errors(const Eigen::MatrixXd& yhat,
                                   const Eigen::MatrixXd& y) {
  if (yhat.rows() != y.rows() || yhat.cols() != y.cols()) {
    throw UsageError("prediction/observation shape mismatch");
  }
  std::vector<double> e(static_cast<std::size_t>(y.cols()));
  for (Eigen::Index k = 0; k < y.cols(); ++k) {
    e[static_cast<std::size_t>(k)] = (y.col(k) - yhat.col(k)).squaredNorm();
  }
  return e;
}

RegretTrace regret(const PredictionTrace& online,
                   const std::vector<double>& e_delayed_by_step,
                   const std::vector<double>& e_local_by_step) {
  RegretTrace out;
  double r = 0.0;
  double r_tilde = 0.0;
  for (const auto& row : online.rows) {
    const auto k = static_cast<std::size_t>(row.k);
    if (k >= e_delayed_by_step.size() || k >= e_local_by_step.size()) {
      throw UsageError("benchmark error series does not cover step " +
                       std::to_string(row.k));
    }
    out.steps.push_back(row.k);
    out.e_online.push_back(row.sq_err);
    out.e_delayed_opt.push_back(e_delayed_by_step[k]);
    out.e_local_opt.push_back(e_local_by_step[k]);
    r += row.sq_err - e_delayed_by_step[k];
    r_tilde += row.sq_err - e_local_by_step[k];
    out.R.push_back(r);
    out.R_tilde.push_back(r_tilde);
  }
  return out;
}

ImprovementReport check_improvement(const SystemModel& model, int d) {
  ImprovementReport report;
  report.d = d;

  const SteadyKalman local =
      solve_dare(model.A, model.C, model.Q, model.R);
  const DelayChain chain = delayed_chain(model, d);
  report.P_local = local.P;
  report.P_centralized = chain.P_seq.front();
  report.P_chain_end = chain.P_seq.back();

  const Eigen::MatrixXd gap_obs =
      model.C * (report.P_local - report.P_chain_end) * model.C.transpose();
  report.trace_gap = gap_obs.trace();

  report.strict =
      linalg::min_eig_sym(linalg::symmetrize(
          report.P_local - report.P_centralized)) > kStrictTol;

  Assumption3Report& a3 = report.assumption3;
  a3.cond_A = linalg::condition_number(model.A);
  a3.A_invertible = std::isfinite(a3.cond_A) && a3.cond_A < kCondLimit;
  if (!a3.A_invertible) {
    a3.pass = false;
    return report;
  }

  const int n = model.n();
  const Eigen::MatrixXd A_inv = model.A.partialPivLu().solve(
      Eigen::MatrixXd::Identity(n, n));
  const AugmentedModel aug = augment(model);
  const Eigen::MatrixXd G =
      model.C.transpose() *
      linalg::spd_solve(model.R, model.C, "local noise covariance R");
  const Eigen::MatrixXd G_bar =
      aug.C_bar.transpose() *
      linalg::spd_solve(aug.R_bar, aug.C_bar, "stacked noise covariance");

  const Eigen::MatrixXd S = symplectic_matrix(A_inv, model.A, model.Q, G);
  const Eigen::MatrixXd S_bar =
      symplectic_matrix(A_inv, model.A, model.Q, G_bar);

  Eigen::EigenSolver<Eigen::MatrixXd> es(S);
  Eigen::EigenSolver<Eigen::MatrixXd> es_bar(S_bar);
  if (es.info() != Eigen::Success || es_bar.info() != Eigen::Success) {
    throw NumericError("eigendecomposition of a symplectic matrix failed");
  }

  a3.common_stable_pair_found = false;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<double> li = es.eigenvalues()(i);
    if (std::abs(li) >= 1.0 - kStableMargin) continue;
    for (Eigen::Index j = 0; j < es_bar.eigenvalues().size(); ++j) {
      const std::complex<double> lj = es_bar.eigenvalues()(j);
      if (std::abs(lj) >= 1.0 - kStableMargin) continue;
      if (std::abs(li - lj) >= kEigMatchTol) continue;
      if (principal_angle(es.eigenvectors().col(i),
                          es_bar.eigenvectors().col(j)) < kAngleTol) {
        a3.common_stable_pair_found = true;
        break;
      }
    }
    if (a3.common_stable_pair_found) break;
  }
  a3.pass = a3.A_invertible && !a3.common_stable_pair_found;
  return report;
}

OrthogonalityReport check_orthogonality(const SystemModel& model, int d,
                                        int trials, int length,
                                        std::uint64_t seed) {
  if (trials < 1 || length < 1) {
    throw UsageError("orthogonality check needs positive trials and length");
  }
  OrthogonalityReport report;
  report.d = d;
  report.trials = trials;
  report.length = length;
  report.seed = seed;

  const AugmentedModel aug = augment(model);
  const SteadyKalman centralized =
      solve_dare(model.A, aug.C_bar, model.Q, aug.R_bar);
  const DelayChain chain = delayed_chain(model, d);
  const PredictorState proto =
      make_delayed_predictor(model, centralized, chain);
  report.expected_lag0 =
      model.C * chain.P_seq.back() * model.C.transpose() + model.R;

  const int m = model.m();
  const int skip = d + 5 * model.n();
  if (skip >= length) {
    throw UsageError("trajectory length too short for the warm-start discard");
  }
  const int n_lags = d + 4;  // lag 0..d+3
  std::vector<Eigen::MatrixXd> sum(n_lags, Eigen::MatrixXd::Zero(m, m));
  std::vector<Eigen::MatrixXd> sumsq(n_lags, Eigen::MatrixXd::Zero(m, m));
  std::vector<long long> count(n_lags, 0);

  for (int t = 0; t < trials; ++t) {
    const Trajectory traj =
        gen_trajectory(model, length, seed + 1 + static_cast<std::uint64_t>(t));
    const Eigen::MatrixXd yhat = run_predictor(proto, traj);
    Eigen::MatrixXd r(m, length - skip);
    for (int k = skip; k < length; ++k) {
      r.col(k - skip) = traj.y.col(k) - yhat.col(k);
    }
    const int K = static_cast<int>(r.cols());
    for (int lag = 0; lag < n_lags; ++lag) {
      for (int k = 0; k + lag < K; ++k) {
        const Eigen::MatrixXd outer = r.col(k) * r.col(k + lag).transpose();
        sum[lag] += outer;
        sumsq[lag] += outer.cwiseProduct(outer);
        ++count[lag];
      }
    }
  }

  report.offlag_z.resize(n_lags - 1);
  report.max_offlag_z = 0.0;
  for (int lag = 0; lag < n_lags; ++lag) {
    const double cnt = static_cast<double>(count[lag]);
    const Eigen::MatrixXd mean = sum[lag] / cnt;
    if (lag == 0) {
      report.lag0_cov = mean;
      report.variance_rel_err = (mean - report.expected_lag0).norm() /
                                report.expected_lag0.norm();
      continue;
    }
    const Eigen::MatrixXd var =
        (sumsq[lag] / cnt - mean.cwiseProduct(mean)).cwiseMax(1e-300);
    const Eigen::MatrixXd se = (var / cnt).cwiseSqrt();
    const double z = (mean.cwiseAbs().cwiseQuotient(se)).maxCoeff();
    report.offlag_z[lag - 1] = z;
    report.max_offlag_z = std::max(report.max_offlag_z, z);
  }
  return report;
}

PEReport check_persistent_excitation(
    const std::vector<std::pair<int, double>>& vmin_by_step,
    double sigma_min_rbar, int first_epoch_end) {
  PEReport report;
  report.threshold = sigma_min_rbar / 8.0;
  double min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& [k, vmin] : vmin_by_step) {
    if (k <= first_epoch_end) continue;
    min_ratio = std::min(min_ratio, vmin / static_cast<double>(k));
    ++report.samples_used;
  }
  report.min_ratio = std::isfinite(min_ratio) ? min_ratio : 0.0;
  report.pass = report.samples_used > 0 && report.min_ratio >= report.threshold;
  return report;
}

Eigen::MatrixXd bias_trace(const Trajectory& traj, const SystemModel& model,
                           const DelayChain& chain, int p) {
  if (traj.model_free_only) {
    throw UsageError(
        "bias trace needs a model; this trajectory was ingested without one");
  }
  if (p < 1) throw UsageError("past horizon p must be at least 1");
  const int d = chain.d;
  const int N = traj.length();
  if (N <= p + d) throw UsageError("trajectory shorter than p+d");

  const AugmentedModel aug = augment(model);
  const SteadyKalman centralized =
      solve_dare(model.A, aug.C_bar, model.Q, aug.R_bar);
  const DelayedRun run = run_delayed_predictor(
      make_delayed_predictor(model, centralized, chain), traj);

  const Eigen::MatrixXd Abar = model.A - centralized.L * aug.C_bar;
  Eigen::MatrixXd lead = model.C * chain.Phi_seq.back();
  for (int i = 0; i < p; ++i) lead = lead * Abar;

  Eigen::MatrixXd b(model.m(), N - (p + d));
  for (int t = p + d; t < N; ++t) {
    b.col(t - (p + d)) = lead * run.xbar.col(t - d - p);
  }
  return b;
}

double ar_identity_residual(const SystemModel& model, const Trajectory& traj,
                            int d, int p) {
  const DelayChain chain = delayed_chain(model, d);
  const ARCoefficients ar = build_ar_coefficients(model, chain, p);
  const AugmentedModel aug = augment(model);
  const SteadyKalman centralized =
      solve_dare(model.A, aug.C_bar, model.Q, aug.R_bar);
  const DelayedRun run = run_delayed_predictor(
      make_delayed_predictor(model, centralized, chain), traj);
  const Eigen::MatrixXd bias = bias_trace(traj, model, chain, p);

  ObservationStream s = stream(traj, d);
  while (s.advance()) {
  }
  const int N = traj.length();
  double worst = 0.0;
  for (int t = p + d; t < N; ++t) {
    const Regressor reg = make_regressor(s, t, p, d);
    const Eigen::VectorXd recon = ar.G * reg.z + bias.col(t - (p + d));
    worst = std::max(worst, (run.yhat.col(t) - recon).norm());
  }
  return worst;
}

}  // namespace coopfilter
