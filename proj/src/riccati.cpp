#include "coopfilter/riccati.hpp"

#include <cmath>
#include <string>

#include "coopfilter/errors.hpp"
#include "coopfilter/linalg.hpp"

namespace coopfilter {

namespace {

Eigen::MatrixXd gain_for(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Cmap,
                         const Eigen::MatrixXd& Rmap, const Eigen::MatrixXd& P,
                         const std::string& label) {
  const Eigen::MatrixXd S = Cmap * P * Cmap.transpose() + Rmap;
  // L = A P Cᵀ S⁻¹ computed as (S⁻¹ (A P Cᵀ)ᵀ)ᵀ to keep the SPD solve.
  return linalg::spd_solve(linalg::symmetrize(S),
                           (A * P * Cmap.transpose()).transpose(), label)
      .transpose();
}

}  // namespace

Eigen::MatrixXd ric_step(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Cmap,
                         const Eigen::MatrixXd& Q, const Eigen::MatrixXd& Rmap,
                         const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd APC = A * P * Cmap.transpose();
  const Eigen::MatrixXd S = linalg::symmetrize(
      Cmap * P * Cmap.transpose() + Rmap);
  const Eigen::MatrixXd correction =
      APC * linalg::spd_solve(S, APC.transpose(), "innovation block C P Ct + R");
  return linalg::symmetrize(A * P * A.transpose() + Q - correction);
}

double dare_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Cmap,
                     const Eigen::MatrixXd& Q, const Eigen::MatrixXd& Rmap,
                     const Eigen::MatrixXd& P) {
  return (P - ric_step(A, Cmap, Q, Rmap, P)).norm();
}

SteadyKalman solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Cmap,
                        const Eigen::MatrixXd& Q, const Eigen::MatrixXd& Rmap) {
  constexpr int kMaxIter = 200000;
  constexpr double kTol = 1e-11;
  constexpr double kResidualBound = 1e-8;

  Eigen::MatrixXd P = linalg::symmetrize(Q);
  double diff = 0.0;
  int iter = 0;
  for (; iter < kMaxIter; ++iter) {
    const Eigen::MatrixXd next = ric_step(A, Cmap, Q, Rmap, P);
    diff = (next - P).norm();
    P = next;
    if (diff <= kTol * (1.0 + P.norm())) break;
  }
  if (iter == kMaxIter) {
    throw NumericError("DARE iteration did not converge; last step size " +
                       std::to_string(diff));
  }

  SteadyKalman out;
  out.P = P;
  out.iterations = iter + 1;
  out.residual = dare_residual(A, Cmap, Q, Rmap, P);
  if (out.residual > kResidualBound) {
    throw NumericError("DARE residual " + std::to_string(out.residual) +
                       " exceeds bound after convergence");
  }
  out.L = gain_for(A, Cmap, Rmap, P, "innovation block C P Ct + R");
  out.closed_loop = A - out.L * Cmap;
  out.rho_cl = linalg::spectral_radius(out.closed_loop);
  return out;
}

DelayChain delayed_chain(const SystemModel& model, int d) {
  if (d < 0) throw UsageError("delay must be nonnegative");
  const AugmentedModel aug = augment(model);

  DelayChain chain;
  chain.d = d;
  const SteadyKalman centralized =
      solve_dare(model.A, aug.C_bar, model.Q, aug.R_bar);
  chain.P_seq.reserve(d + 1);
  chain.P_seq.push_back(centralized.P);
  chain.L_seq.reserve(d);
  for (int l = 0; l < d; ++l) {
    chain.L_seq.push_back(gain_for(model.A, model.C, model.R, chain.P_seq[l],
                                   "delay chain step " + std::to_string(l + 1)));
    chain.P_seq.push_back(
        ric_step(model.A, model.C, model.Q, model.R, chain.P_seq[l]));
  }

  const int n = model.n();
  chain.Phi_seq.reserve(d + 1);
  chain.Phi_seq.push_back(Eigen::MatrixXd::Identity(n, n));
  for (int j = 1; j <= d; ++j) {
    // Phi_j appends the factor with gain L^(d-j+1) on the right.
    chain.Phi_seq.push_back(chain.Phi_seq[j - 1] *
                            (model.A - chain.L_seq[d - j] * model.C));
  }

  if (linalg::min_eig_sym(linalg::symmetrize(model.Q)) > 0.0) {
    try {
      const auto [tau, rho0] = decay_constants(chain, model.Q);
      chain.tau = tau;
      chain.rho0 = rho0;
      chain.decay_available = true;
    } catch (const NumericError&) {
      // Degenerate rate (e.g. A = 0 makes rho0 exactly 0); the chain itself
      // is still valid, only the decay certificate is unavailable.
      chain.decay_available = false;
    }
  }
  return chain;
}

std::pair<double, double> decay_constants(const DelayChain& chain,
                                          const Eigen::MatrixXd& Q) {
  const double q_min = linalg::min_eig_sym(linalg::symmetrize(Q));
  if (q_min <= 0.0) {
    throw NumericError("decay constants require positive definite Q");
  }
  const double p_end_max = linalg::max_eig_sym(chain.P_seq.back());
  const double p_first_min = linalg::min_eig_sym(chain.P_seq.front());
  const double tau = p_end_max / p_first_min;
  const double rho0 = 1.0 - q_min / p_end_max;
  if (!(rho0 > 0.0 && rho0 < 1.0)) {
    throw NumericError("decay rate " + std::to_string(rho0) +
                       " is outside (0,1)");
  }
  return {tau, rho0};
}

}  // namespace coopfilter
