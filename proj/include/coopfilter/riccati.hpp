#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "coopfilter/model.hpp"

namespace coopfilter {

/// Steady-state prediction-error covariance and Kalman gain for one
/// observation configuration (Cmap, Rmap).
struct SteadyKalman {
  Eigen::MatrixXd P;            // n x n, symmetric PSD DARE solution
  Eigen::MatrixXd L;            // n x q gain, q = rows(Cmap)
  Eigen::MatrixXd closed_loop;  // A - L Cmap
  double rho_cl = 0.0;          // spectral radius of closed_loop
  int iterations = 0;
  double residual = 0.0;        // Frobenius norm of the DARE defect
};

/// Delay-parameterized Riccati chain: P^(1) = centralized DARE solution,
/// P^(l+1) = ric_step(P^(l)) with the local pair (C, R). Phi_seq[j] is the
/// product of the last j closed-loop refinement factors,
/// Phi_j = (A - L^(d)C)(A - L^(d-1)C)...(A - L^(d-j+1)C), Phi_0 = I.
struct DelayChain {
  int d = 0;
  std::vector<Eigen::MatrixXd> P_seq;    // P^(1)..P^(d+1), size d+1
  std::vector<Eigen::MatrixXd> L_seq;    // L^(1)..L^(d), size d
  std::vector<Eigen::MatrixXd> Phi_seq;  // Phi_0..Phi_d, size d+1
  double tau = 0.0;
  double rho0 = 0.0;
  bool decay_available = false;  // requires lambda_min(Q) > 0
};

/// One Riccati map application:
///   P' = A P Aᵀ + Q − A P Cᵀ (C P Cᵀ + R)⁻¹ C P Aᵀ, symmetrized.
/// Throws NumericError if C P Cᵀ + R is not positive definite.
Eigen::MatrixXd ric_step(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Cmap,
                         const Eigen::MatrixXd& Q, const Eigen::MatrixXd& Rmap,
                         const Eigen::MatrixXd& P);

/// Frobenius norm of P - ric_step(P).
double dare_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Cmap,
                     const Eigen::MatrixXd& Q, const Eigen::MatrixXd& Rmap,
                     const Eigen::MatrixXd& P);

/// Fixed-point iteration of ric_step from P0 = Q until
/// ‖P_{k+1} − P_k‖_F ≤ 1e-11·(1 + ‖P_k‖_F), capped at 200000 iterations.
/// Throws NumericError (carrying the last residual) on non-convergence.
SteadyKalman solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Cmap,
                        const Eigen::MatrixXd& Q, const Eigen::MatrixXd& Rmap);

/// Builds the chain for delay d >= 0; decay constants are filled only when
/// lambda_min(Q) > 0.
DelayChain delayed_chain(const SystemModel& model, int d);

/// tau = lambda_max(P^(d+1)) / lambda_min(P^(1)),
/// rho0 = 1 - lambda_min(Q) / lambda_max(P^(d+1)); requires lambda_min(Q) > 0
/// and asserts rho0 in (0,1).
std::pair<double, double> decay_constants(const DelayChain& chain,
                                          const Eigen::MatrixXd& Q);

}  // namespace coopfilter
