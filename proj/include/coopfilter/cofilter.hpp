#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "coopfilter/simulate.hpp"

namespace coopfilter {

/// Learner parameters. The past horizon used in epoch l is
/// p(T_l) = max(1, ceil(beta * ln(T_l))) with T_l = 2^(l-1) T_init + 1.
struct WindowConfig {
  double beta = 2.0;
  int d = 0;
  double lambda = 1.0;  // ridge weight
  int T_init = 50;
  int N_E = 1;
};

/// Single source of truth for the horizon rule.
int past_horizon(double beta, int T);

/// Epoch start index T_l = 2^(l-1) * T_init + 1 for l >= 1.
long long epoch_start(int T_init, int l);

/// Input row predicting the output at index k:
///   z = [y_{k-1}; …; y_{k-d}; y^c_{k-d-1}; …; y^c_{k-d-p}], newest first.
struct Regressor {
  Eigen::VectorXd z;
  int k = 0;
};

/// Builds the regressor for index k from a stream whose cursor is at k-1 or
/// later; the stream itself rejects any read past the causal horizon.
Regressor make_regressor(const ObservationStream& s, int k, int p, int d);

/// Ridge-regression state: V = lambda I + sum z zᵀ over consumed rows, a
/// maintained inverse, and the coefficient estimate G_tilde.
struct OnlineState {
  Eigen::MatrixXd V;
  Eigen::MatrixXd V_inv;
  Eigen::MatrixXd G_tilde;  // m x dim(z)
  int step = 0;             // rows consumed
  int epoch = 0;
  int p = 0;
  int refactor_counter = 0;
};

/// Closed-form ridge fit over the given (z, y) rows.
OnlineState batch_fit(
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& rows,
    double lambda);

/// Prediction with the current (pre-update) coefficients.
Eigen::VectorXd predict(const OnlineState& state, const Regressor& reg);

/// Rank-one update: V += z zᵀ, V_inv by the Sherman-Morrison identity
/// (refactorized from V every 512 updates), then
/// G_tilde += (y − y_pred) zᵀ V_inv with the post-update inverse.
void online_update(OnlineState& state, const Eigen::VectorXd& z,
                   const Eigen::VectorXd& y_observed,
                   const Eigen::VectorXd& y_predicted);

struct TraceRow {
  int k = 0;
  int epoch = 0;
  int p = 0;
  int member = 0;
  Eigen::VectorXd y_true;
  Eigen::VectorXd y_pred;
  double sq_err = 0.0;
};

struct PredictionTrace {
  std::vector<TraceRow> rows;
  /// Columns: k, epoch, p, member, y_true_0.., y_pred_0.., sq_err.
  void write_csv(std::ostream& out) const;
};

struct CoFilterResult {
  PredictionTrace trace;
  /// (k, lambda_min(V_k)) sampled along the run for the first member.
  std::vector<std::pair<int, double>> gram_min_eigs;
  /// Cumulative squared prediction error per member at the end of the run.
  std::vector<double> member_sq_err_total;
  /// Members disabled mid-run (degenerate window), with reasons.
  std::vector<std::string> warnings;
};

/// Runs the doubling-epoch online learner over the stream: warm-up through
/// step T_init, then N_E epochs; epoch l refits on rows t in [p+d, T_l-1] and
/// predicts steps T_l..2T_l-2, updating after each observation.
CoFilterResult run_cofilter(ObservationStream& s, const WindowConfig& cfg);

/// Runs one learner per config (all sharing d, lambda, T_init, N_E) on the
/// same stream; each step emits the prediction of the member with the lowest
/// cumulative squared error over already-revealed outcomes, ties to the
/// lowest index. A member whose refit becomes infeasible is disabled with a
/// recorded warning instead of aborting the run.
CoFilterResult run_ensemble(ObservationStream& s,
                            const std::vector<WindowConfig>& cfgs);

}  // namespace coopfilter
