#include <Eigen/Dense>
#include <optional>

#include "coopfilter/analysis.hpp"
#include "coopfilter/errors.hpp"
#include "coopfilter/predictors.hpp"
#include "coopfilter/riccati.hpp"
#include "coopfilter/simulate.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace coopfilter;
using test_helpers::mat;

namespace {

struct Setup {
  SystemModel model;
  AugmentedModel aug;
  SteadyKalman local;
  SteadyKalman stacked;

  explicit Setup(const SystemModel& m) : model(m), aug(augment(m)) {
    local = solve_dare(model.A, model.C, model.Q, model.R);
    stacked = solve_dare(model.A, aug.C_bar, model.Q, aug.R_bar);
  }
};

}  // namespace

TEST_CASE("local predictor follows the one-step recursion") {
  const Setup s(test_helpers::coupled_two_state());
  const Trajectory traj = gen_trajectory(s.model, 40, 13);

  PredictorState state = make_local_predictor(s.model, s.local);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
  for (int k = 0; k < 10; ++k) {
    const Eigen::VectorXd yhat = local_steady_step(state, traj.y.col(k));
    x = s.model.A * x + s.local.L * (traj.y.col(k) - s.model.C * x);
    CHECK((yhat - s.model.C * x).norm() <= 1e-13);
  }
}

TEST_CASE("zero delay reproduces the stacked filter bit for bit") {
  const Setup s(test_helpers::coupled_two_state());
  const Trajectory traj = gen_trajectory(s.model, 300, 17);
  const DelayChain chain = delayed_chain(s.model, 0);

  const Eigen::MatrixXd direct = run_predictor(
      make_centralized_predictor(s.model, s.stacked), traj);
  const Eigen::MatrixXd viadelay = run_predictor(
      make_delayed_predictor(s.model, s.stacked, chain), traj);
  CHECK((direct - viadelay).norm() == 0.0);
}

TEST_CASE("delayed steady step rejects premature external data") {
  const Setup s(test_helpers::coupled_two_state());
  const Trajectory traj = gen_trajectory(s.model, 20, 19);
  const DelayChain chain = delayed_chain(s.model, 2);
  PredictorState state = make_delayed_predictor(s.model, s.stacked, chain);

  Eigen::VectorXd ye = traj.y_e.col(0);
  CHECK_THROWS_AS(delayed_steady_step(state, traj.y.col(0), ye), UsageError);

  PredictorState fresh = make_delayed_predictor(s.model, s.stacked, chain);
  const Eigen::VectorXd miss = delayed_steady_step(
      fresh, traj.y.col(0), std::nullopt);
  CHECK(miss.size() == 1);  // warm start: open-loop propagation
}

TEST_CASE("before the first fused update the prediction is open loop") {
  const Setup s(test_helpers::coupled_two_state());
  const Trajectory traj = gen_trajectory(s.model, 20, 23);
  const DelayChain chain = delayed_chain(s.model, 3);
  const Eigen::MatrixXd yhat = run_predictor(
      make_delayed_predictor(s.model, s.stacked, chain), traj);
  // Zero initial state propagated open loop stays zero through step d.
  for (int k = 0; k <= 3; ++k) CHECK(yhat.col(k).norm() == 0.0);
  CHECK(yhat.col(4).norm() > 0.0);
}

TEST_CASE("asymptotic error ordering across the three predictors") {
  const Setup s(test_helpers::coupled_two_state());
  const int N = 100000;
  const Trajectory traj = gen_trajectory(s.model, N, 29);
  const DelayChain chain = delayed_chain(s.model, 2);

  const Eigen::MatrixXd e_loc =
      run_predictor(make_local_predictor(s.model, s.local), traj) - traj.y;
  const Eigen::MatrixXd e_cen =
      run_predictor(make_centralized_predictor(s.model, s.stacked), traj) -
      traj.y;
  const Eigen::MatrixXd e_del =
      run_predictor(make_delayed_predictor(s.model, s.stacked, chain), traj) -
      traj.y;

  const int skip = 100;
  double m_loc = 0.0, m_cen = 0.0, m_del = 0.0;
  for (int k = skip; k < N; ++k) {
    m_loc += e_loc.col(k).squaredNorm();
    m_cen += e_cen.col(k).squaredNorm();
    m_del += e_del.col(k).squaredNorm();
  }
  m_loc /= N - skip;
  m_cen /= N - skip;
  m_del /= N - skip;

  CHECK(m_cen < m_del);
  CHECK(m_del < m_loc);
  // Long-run averages sit near the theoretical output covariances.
  CHECK(m_loc == doctest::Approx(3.1004).epsilon(0.03));
  CHECK(m_cen == doctest::Approx(2.4017).epsilon(0.03));
  CHECK(m_del == doctest::Approx(3.0280).epsilon(0.03));
}

TEST_CASE("autoregressive coefficient layout and dimensions") {
  const Setup s(test_helpers::coupled_two_state());
  const DelayChain chain = delayed_chain(s.model, 2);
  const ARCoefficients ar = build_ar_coefficients(s.model, chain, 3);
  CHECK(ar.d == 2);
  CHECK(ar.p == 3);
  // m*d + m_bar*p columns.
  CHECK(ar.G.rows() == 1);
  CHECK(ar.G.cols() == 1 * 2 + 2 * 3);

  // First block column is C L^(2) (the newest local observation's weight).
  const Eigen::MatrixXd first = s.model.C * chain.L_seq[1];
  CHECK((ar.G.col(0) - first).norm() <= 1e-12);

  // First fused block is C Phi_2 L_bar.
  const Eigen::MatrixXd fused0 =
      s.model.C * chain.Phi_seq[2] * s.stacked.L;
  CHECK((ar.G.block(0, 2, 1, 2) - fused0).norm() <= 1e-12);
}

TEST_CASE("one-step errors of the exact predictor reconstruct from the "
          "regression form") {
  const SystemModel model = test_helpers::coupled_two_state();
  const Trajectory traj = gen_trajectory(model, 400, 31);
  for (int d : {0, 1, 3}) {
    CHECK(ar_identity_residual(model, traj, d, 4) <= 1e-9);
  }
}

TEST_CASE("innovations discard the warm-start prefix") {
  const SystemModel model = test_helpers::coupled_two_state();
  const Trajectory traj = gen_trajectory(model, 120, 37);
  const Eigen::MatrixXd r =
      innovations(model, traj, PredictorKind::delayed, 2);
  CHECK(r.rows() == 1);
  CHECK(r.cols() == 120 - (2 + 5 * 2));

  Trajectory foreign = traj;
  foreign.model_free_only = true;
  CHECK_THROWS_AS(innovations(model, foreign, PredictorKind::delayed, 2),
                  UsageError);
}
