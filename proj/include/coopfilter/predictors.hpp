#pragma once

#include <Eigen/Dense>
#include <deque>
#include <optional>
#include <vector>

#include "coopfilter/model.hpp"
#include "coopfilter/riccati.hpp"
#include "coopfilter/simulate.hpp"

namespace coopfilter {

enum class PredictorKind { local, centralized, delayed };

/// Mutable state of one steady-gain predictor. Step functions consume the
/// observation(s) of step k and return the output prediction for step k+1.
struct PredictorState {
  PredictorKind kind = PredictorKind::local;
  Eigen::VectorXd xhat;   // current state prediction
  Eigen::MatrixXd A;
  Eigen::MatrixXd L;      // gain matched to C_obs
  Eigen::MatrixXd C_obs;  // observation map driving the recursion (C or C_bar)
  Eigen::MatrixXd C_out;  // local output map C

  // Delayed predictor internals.
  int d = 0;
  Eigen::VectorXd xbar;                      // centralized estimate
  std::deque<Eigen::VectorXd> recent_y;      // last d+1 local observations
  Eigen::MatrixXd Phi_d;                     // full refinement product
  std::vector<Eigen::MatrixXd> sum_weights;  // Phi_{d-l} L^(l), l = 1..d
  int step_count = 0;
};

PredictorState make_local_predictor(const SystemModel& model,
                                    const SteadyKalman& local_gain);
PredictorState make_centralized_predictor(const SystemModel& model,
                                          const SteadyKalman& centralized_gain);
PredictorState make_delayed_predictor(const SystemModel& model,
                                      const SteadyKalman& centralized_gain,
                                      const DelayChain& chain);

/// x̂_{k+1} = A x̂_k + L (y_k − C x̂_k); returns ŷ_{k+1} = C x̂_{k+1}.
Eigen::VectorXd local_steady_step(PredictorState& state,
                                  const Eigen::VectorXd& y_k);

/// Same recursion with the stacked observation y_c_k = [y_k; y^e_k] and the
/// centralized gain; the returned prediction is the local channel C x̄_{k+1}.
Eigen::VectorXd centralized_steady_step(PredictorState& state,
                                        const Eigen::VectorXd& y_c_k);

/// Delayed cooperative predictor: the centralized estimate advances on the
/// d-step-old fused observation, then d local refinement terms are applied:
///   x̂_{k+1} = Phi_d x̄_{k−d+1} + Σ_{l=1..d} Phi_{d−l} L^(l) y_{k−d+l}.
/// Before the buffer holds d+1 local observations (k < d) the prediction is
/// the initial centralized estimate propagated open-loop through A.
/// y_e_delayed must carry y^e_{k−d} once k >= d and be empty before that.
Eigen::VectorXd delayed_steady_step(
    PredictorState& state, const Eigen::VectorXd& y_k,
    const std::optional<Eigen::VectorXd>& y_e_delayed);

/// Whole-trajectory run of the delayed predictor, keeping the internal
/// centralized state sequence for bias/identity checks.
struct DelayedRun {
  Eigen::MatrixXd yhat;  // m x N, column k = ŷ_k (ŷ_0 from the zero state)
  Eigen::MatrixXd xbar;  // n x (N−d+1), column j = x̄_j
};
DelayedRun run_delayed_predictor(PredictorState state, const Trajectory& traj);

/// Runs any predictor kind over a trajectory; column k of the result is ŷ_k.
Eigen::MatrixXd run_predictor(PredictorState state, const Trajectory& traj);

/// True coefficient matrix of the autoregressive output model
///   y_{k+1} = G [y_k; …; y_{k−d+1}; y^c_{k−d}; …; y^c_{k−d−p+1}] + bias + r.
/// Block layout: G = [C L^(d), C Phi_1 L^(d−1), …, C Phi_{d−1} L^(1) |
///                    C Phi_d L̄, C Phi_d Ā L̄, …, C Phi_d Ā^{p−1} L̄].
struct ARCoefficients {
  Eigen::MatrixXd G;  // m x (m d + m_bar p)
  int p = 0;
  int d = 0;
};
ARCoefficients build_ar_coefficients(const SystemModel& model,
                                     const DelayChain& chain, int p);

/// One-step prediction errors r_k = y_k − ŷ_k for the chosen predictor, with
/// the first d + 5n warm-start steps discarded. Column j is r_{d+5n+j}.
Eigen::MatrixXd innovations(const SystemModel& model, const Trajectory& traj,
                            PredictorKind kind, int d);

}  // namespace coopfilter
