#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "coopfilter/cofilter.hpp"
#include "coopfilter/model.hpp"
#include "coopfilter/predictors.hpp"
#include "coopfilter/riccati.hpp"
#include "coopfilter/simulate.hpp"

namespace coopfilter {

/// Per-step squared errors of the online learner and the two model-based
/// benchmarks, with cumulative regrets
///   R[k]       = sum of (e_online − e_delayed_opt)   (vs the delayed-optimal)
///   R_tilde[k] = sum of (e_online − e_local_opt)     (vs the local-optimal).
struct RegretTrace {
  std::vector<int> steps;
  std::vector<double> e_online;
  std::vector<double> e_delayed_opt;
  std::vector<double> e_local_opt;
  std::vector<double> R;
  std::vector<double> R_tilde;
};

/// Squared prediction error per step: column k of yhat vs column k of y.
std::vector<double> squared_errors(const Eigen::MatrixXd& yhat,
                                   const Eigen::MatrixXd& y);

/// Aligns on the online trace's step range; the benchmark series must cover
/// every step appearing there.
RegretTrace regret(const PredictionTrace& online,
                   const std::vector<double>& e_delayed_by_step,
                   const std::vector<double>& e_local_by_step);

struct Assumption3Report {
  bool A_invertible = false;
  double cond_A = 0.0;
  bool common_stable_pair_found = false;
  bool pass = false;
};

/// Certificate that delayed external information strictly improves on the
/// local-only steady predictor.
struct ImprovementReport {
  int d = 0;
  Eigen::MatrixXd P_local;
  Eigen::MatrixXd P_centralized;
  Eigen::MatrixXd P_chain_end;  // P^(d+1)
  /// tr(C P Cᵀ + R) − tr(C P^(d+1) Cᵀ + R): positive means the delayed
  /// predictor beats the local one on the observed channel.
  double trace_gap = 0.0;
  Assumption3Report assumption3;
  bool strict = false;  // lambda_min(P_local − P_centralized) > 1e-10
};

/// Builds the symplectic matrices
///   S̄ = [Aᵀ + Ḡ A⁻¹ Q, −Ḡ A⁻¹; −A⁻¹ Q, A⁻¹],  Ḡ = C̄ᵀ R̄⁻¹ C̄
/// (S likewise with G = Cᵀ R⁻¹ C) and searches for a shared stable
/// eigenvalue with a shared eigenvector; finding none (with A invertible)
/// certifies the strict ordering P̄ ≺ P.
ImprovementReport check_improvement(const SystemModel& model, int d);

struct OrthogonalityReport {
  int d = 0;
  int trials = 0;
  int length = 0;
  std::uint64_t seed = 0;
  /// Per lag 1..d+3: max over matrix entries of |mean| / standard error.
  std::vector<double> offlag_z;
  double max_offlag_z = 0.0;
  Eigen::MatrixXd lag0_cov;
  Eigen::MatrixXd expected_lag0;  // C P^(d+1) Cᵀ + R
  double variance_rel_err = 0.0;  // Frobenius-relative
};

/// Monte Carlo whiteness check of the delayed predictor's innovations.
OrthogonalityReport check_orthogonality(const SystemModel& model, int d,
                                        int trials, int length,
                                        std::uint64_t seed);

struct PEReport {
  double min_ratio = 0.0;  // min over sampled k of lambda_min(V_k)/k
  double threshold = 0.0;  // sigma_min(R_bar)/8
  bool pass = false;
  int samples_used = 0;
};

/// Gram-matrix growth check over (k, lambda_min(V_k)) samples; only samples
/// with k > first_epoch_end count.
PEReport check_persistent_excitation(
    const std::vector<std::pair<int, double>>& vmin_by_step,
    double sigma_min_rbar, int first_epoch_end);

/// Bias of the autoregressive model, b_t = C Phi_d (A − L̄C̄)^p x̄_{t−d−p},
/// evaluated from the delayed predictor's internal centralized states on this
/// trajectory. Column j is b_{p+d+j}.
Eigen::MatrixXd bias_trace(const Trajectory& traj, const SystemModel& model,
                           const DelayChain& chain, int p);

/// Max norm over t of y_t − G Z_t − b_t − r_t (equivalently
/// ŷ_t − G Z_t − b_t); zero up to roundoff when the coefficient blocks,
/// the bias index and the predictor agree.
double ar_identity_residual(const SystemModel& model, const Trajectory& traj,
                            int d, int p);

}  // namespace coopfilter
