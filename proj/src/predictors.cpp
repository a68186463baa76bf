#include "coopfilter/predictors.hpp"

#include <string>

#include "coopfilter/errors.hpp"

namespace coopfilter {

namespace {

/// Shared one-step Kalman recursion; the delayed predictor reuses it for its
/// centralized state so the d = 0 case is arithmetically identical to the
/// centralized predictor.
void kalman_advance(Eigen::VectorXd& x, const Eigen::MatrixXd& A,
                    const Eigen::MatrixXd& L, const Eigen::MatrixXd& C,
                    const Eigen::VectorXd& y) {
  x = A * x + L * (y - C * x);
}

}  // namespace

PredictorState make_local_predictor(const SystemModel& model,
                                    const SteadyKalman& local_gain) {
  PredictorState s;
  s.kind = PredictorKind::local;
  s.A = model.A;
  s.L = local_gain.L;
  s.C_obs = model.C;
  s.C_out = model.C;
  s.xhat = Eigen::VectorXd::Zero(model.n());
  return s;
}

PredictorState make_centralized_predictor(const SystemModel& model,
                                          const SteadyKalman& centralized_gain) {
  PredictorState s;
  s.kind = PredictorKind::centralized;
  s.A = model.A;
  s.L = centralized_gain.L;
  s.C_obs = augment(model).C_bar;
  s.C_out = model.C;
  s.xhat = Eigen::VectorXd::Zero(model.n());
  return s;
}

PredictorState make_delayed_predictor(const SystemModel& model,
                                      const SteadyKalman& centralized_gain,
                                      const DelayChain& chain) {
  PredictorState s;
  s.kind = PredictorKind::delayed;
  s.A = model.A;
  s.L = centralized_gain.L;
  s.C_obs = augment(model).C_bar;
  s.C_out = model.C;
  s.d = chain.d;
  s.xhat = Eigen::VectorXd::Zero(model.n());
  s.xbar = Eigen::VectorXd::Zero(model.n());
  s.Phi_d = chain.Phi_seq.back();
  s.sum_weights.reserve(chain.d);
  for (int l = 1; l <= chain.d; ++l) {
    s.sum_weights.push_back(chain.Phi_seq[chain.d - l] * chain.L_seq[l - 1]);
  }
  return s;
}

Eigen::VectorXd local_steady_step(PredictorState& state,
                                  const Eigen::VectorXd& y_k) {
  kalman_advance(state.xhat, state.A, state.L, state.C_obs, y_k);
  return state.C_out * state.xhat;
}

Eigen::VectorXd centralized_steady_step(PredictorState& state,
                                        const Eigen::VectorXd& y_c_k) {
  kalman_advance(state.xhat, state.A, state.L, state.C_obs, y_c_k);
  return state.C_out * state.xhat;
}

Eigen::VectorXd delayed_steady_step(
    PredictorState& state, const Eigen::VectorXd& y_k,
    const std::optional<Eigen::VectorXd>& y_e_delayed) {
  const int d = state.d;
  state.recent_y.push_back(y_k);
  if (static_cast<int>(state.recent_y.size()) > d + 1) {
    state.recent_y.pop_front();
  }
  const int k = state.step_count++;

  if (k < d) {
    if (y_e_delayed.has_value()) {
      throw UsageError("external observation supplied before its horizon");
    }
    state.xhat = state.A * state.xhat;
    return state.C_out * state.xhat;
  }

  if (!y_e_delayed.has_value()) {
    throw UsageError("missing external observation for step " +
                     std::to_string(k - d));
  }
  Eigen::VectorXd fused(state.recent_y.front().size() + y_e_delayed->size());
  fused.head(state.recent_y.front().size()) = state.recent_y.front();
  fused.tail(y_e_delayed->size()) = *y_e_delayed;
  kalman_advance(state.xbar, state.A, state.L, state.C_obs, fused);

  if (d == 0) {
    state.xhat = state.xbar;
  } else {
    Eigen::VectorXd acc = state.Phi_d * state.xbar;
    for (int l = 1; l <= d; ++l) {
      acc += state.sum_weights[l - 1] * state.recent_y[l];
    }
    state.xhat = acc;
  }
  return state.C_out * state.xhat;
}

DelayedRun run_delayed_predictor(PredictorState state, const Trajectory& traj) {
  if (state.kind != PredictorKind::delayed) {
    throw UsageError("run_delayed_predictor needs a delayed predictor state");
  }
  const int N = traj.length();
  const int d = state.d;
  DelayedRun run;
  run.yhat.resize(state.C_out.rows(), N);
  run.xbar.resize(state.xbar.size(), std::max(N - d + 1, 1));
  run.xbar.col(0) = state.xbar;

  Eigen::VectorXd pending = state.C_out * state.xhat;  // ŷ_0
  for (int k = 0; k < N; ++k) {
    run.yhat.col(k) = pending;
    std::optional<Eigen::VectorXd> ext;
    if (k >= d) ext = traj.y_e.col(k - d);
    pending = delayed_steady_step(state, traj.y.col(k), ext);
    if (k >= d) run.xbar.col(k - d + 1) = state.xbar;
  }
  return run;
}

Eigen::MatrixXd run_predictor(PredictorState state, const Trajectory& traj) {
  if (state.kind == PredictorKind::delayed) {
    return run_delayed_predictor(std::move(state), traj).yhat;
  }
  const int N = traj.length();
  Eigen::MatrixXd yhat(state.C_out.rows(), N);
  Eigen::VectorXd pending = state.C_out * state.xhat;
  for (int k = 0; k < N; ++k) {
    yhat.col(k) = pending;
    if (state.kind == PredictorKind::local) {
      pending = local_steady_step(state, traj.y.col(k));
    } else {
      Eigen::VectorXd fused(traj.y.rows() + traj.y_e.rows());
      fused.head(traj.y.rows()) = traj.y.col(k);
      fused.tail(traj.y_e.rows()) = traj.y_e.col(k);
      pending = centralized_steady_step(state, fused);
    }
  }
  return yhat;
}

ARCoefficients build_ar_coefficients(const SystemModel& model,
                                     const DelayChain& chain, int p) {
  if (p < 1) throw UsageError("past horizon p must be at least 1");
  const AugmentedModel aug = augment(model);
  const SteadyKalman centralized =
      solve_dare(model.A, aug.C_bar, model.Q, aug.R_bar);
  const Eigen::MatrixXd Abar = model.A - centralized.L * aug.C_bar;

  const int m = model.m();
  const int d = chain.d;
  ARCoefficients ar;
  ar.p = p;
  ar.d = d;
  ar.G.resize(m, m * d + aug.m_bar * p);

  for (int j = 0; j < d; ++j) {
    ar.G.middleCols(j * m, m) =
        model.C * chain.Phi_seq[j] * chain.L_seq[d - j - 1];
  }
  Eigen::MatrixXd lead = model.C * chain.Phi_seq[d];
  for (int i = 0; i < p; ++i) {
    ar.G.middleCols(m * d + i * aug.m_bar, aug.m_bar) = lead * centralized.L;
    lead = lead * Abar;
  }
  return ar;
}

Eigen::MatrixXd innovations(const SystemModel& model, const Trajectory& traj,
                            PredictorKind kind, int d) {
  if (traj.model_free_only) {
    throw UsageError(
        "innovations need a model; this trajectory was ingested without one");
  }
  PredictorState state;
  const AugmentedModel aug = augment(model);
  switch (kind) {
    case PredictorKind::local:
      state = make_local_predictor(
          model, solve_dare(model.A, model.C, model.Q, model.R));
      break;
    case PredictorKind::centralized:
      state = make_centralized_predictor(
          model, solve_dare(model.A, aug.C_bar, model.Q, aug.R_bar));
      break;
    case PredictorKind::delayed: {
      const SteadyKalman centralized =
          solve_dare(model.A, aug.C_bar, model.Q, aug.R_bar);
      state = make_delayed_predictor(model, centralized,
                                     delayed_chain(model, d));
      break;
    }
  }
  const Eigen::MatrixXd yhat = run_predictor(std::move(state), traj);
  const int N = traj.length();
  const int skip = std::min(d + 5 * model.n(), N);
  Eigen::MatrixXd r(model.m(), N - skip);
  for (int k = skip; k < N; ++k) {
    r.col(k - skip) = traj.y.col(k) - yhat.col(k);
  }
  return r;
}

}  // namespace coopfilter
