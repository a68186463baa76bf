#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "coopfilter/errors.hpp"
#include "coopfilter/linalg.hpp"
#include "coopfilter/model.hpp"
#include "coopfilter/riccati.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace coopfilter;
using test_helpers::mat;

// Reference values frozen from an independent solver run on the coupled
// two-state system (solve_discrete_are cross-check).
namespace frozen {
const Eigen::MatrixXd P_local = test_helpers::mat(
    {{2.1004111144, 0.9184269359}, {0.9184269359, 1.8010005351}});
const Eigen::MatrixXd P_stacked = test_helpers::mat(
    {{1.401724526821, 0.342567471277}, {0.342567471277, 1.323799264099}});
const Eigen::MatrixXd L_stacked = test_helpers::mat(
    {{0.165096304647, 0.460881582364}, {0.267494642566, 0.361335678455}});
const Eigen::MatrixXd L_local =
    test_helpers::mat({{0.37247440066}, {0.448721332749}});
const Eigen::MatrixXd L1 =
    test_helpers::mat({{0.230833668139}, {0.319033379948}});
const Eigen::MatrixXd L2 =
    test_helpers::mat({{0.330725273017}, {0.411387285393}});
const Eigen::MatrixXd P2 = test_helpers::mat(
    {{1.884948173272, 0.721419546989}, {0.721419546989, 1.620823005228}});
const Eigen::MatrixXd P3 = test_helpers::mat(
    {{2.028025564158, 0.853700491372}, {0.853700491372, 1.743122189878}});
const Eigen::MatrixXd P4 = test_helpers::mat(
    {{2.078567563451, 0.898799873026}, {0.898799873026, 1.783365042434}});
const Eigen::MatrixXd Phi1 = test_helpers::mat(
    {{-0.130725273017, 0.8}, {-0.011387285393, 0.6}});
const Eigen::MatrixXd Phi2 = test_helpers::mat(
    {{0.068804035728, 0.375419781586}, {0.04893108381, 0.350890171686}});
}  // namespace frozen

TEST_CASE("steady-state solutions match the frozen references") {
  const SystemModel model = test_helpers::coupled_two_state();
  const AugmentedModel aug = augment(model);

  const SteadyKalman local = solve_dare(model.A, model.C, model.Q, model.R);
  CHECK((local.P - frozen::P_local).norm() <= 1e-9);
  CHECK((local.L - frozen::L_local).norm() <= 1e-9);
  CHECK(local.residual <= 1e-8);
  CHECK(local.rho_cl < 1.0);

  const SteadyKalman stacked =
      solve_dare(model.A, aug.C_bar, model.Q, aug.R_bar);
  CHECK((stacked.P - frozen::P_stacked).norm() <= 1e-9);
  CHECK((stacked.L - frozen::L_stacked).norm() <= 1e-9);

  // Fusing the second sensor shrinks the covariance in the matrix order.
  CHECK(linalg::min_eig_sym(local.P - stacked.P) > 0.0);
}

TEST_CASE("decoupled system agrees with the hand-solved scalar problems") {
  const SystemModel model = test_helpers::decoupled_two_state();
  const AugmentedModel aug = augment(model);

  // Observed scalar channel: p^2 - 0.81 p - 1 = 0, positive root.
  const double p_observed = (0.81 + std::sqrt(0.81 * 0.81 + 4.0)) / 2.0;
  // Unobserved channel: p = 0.81 p + 1.
  const double p_hidden = 1.0 / (1.0 - 0.81);

  const SteadyKalman local = solve_dare(model.A, model.C, model.Q, model.R);
  CHECK(local.P(0, 0) == doctest::Approx(p_observed).epsilon(1e-10));
  CHECK(local.P(1, 1) == doctest::Approx(p_hidden).epsilon(1e-10));
  CHECK(std::abs(local.P(0, 1)) <= 1e-10);

  const SteadyKalman stacked =
      solve_dare(model.A, aug.C_bar, model.Q, aug.R_bar);
  CHECK(stacked.P(0, 0) == doctest::Approx(p_observed).epsilon(1e-10));
  CHECK(stacked.P(1, 1) == doctest::Approx(p_observed).epsilon(1e-10));
}

TEST_CASE("solution is a fixed point of the update map") {
  const SystemModel model = test_helpers::coupled_two_state();
  const SteadyKalman local = solve_dare(model.A, model.C, model.Q, model.R);
  const Eigen::MatrixXd again =
      ric_step(model.A, model.C, model.Q, model.R, local.P);
  CHECK((again - local.P).norm() <= 1e-9);
}

TEST_CASE("zero dynamics collapse the solution to the process noise") {
  SystemModel model = test_helpers::coupled_two_state();
  model.A = Eigen::MatrixXd::Zero(2, 2);
  const SteadyKalman local = solve_dare(model.A, model.C, model.Q, model.R);
  CHECK((local.P - model.Q).norm() <= 1e-12);
  CHECK(local.L.norm() <= 1e-12);
}

TEST_CASE("an explosive unobservable problem reports failure") {
  Eigen::MatrixXd A = mat({{1.1}});
  Eigen::MatrixXd C = mat({{0.0}});
  Eigen::MatrixXd Q = mat({{1.0}});
  Eigen::MatrixXd R = mat({{1.0}});
  CHECK_THROWS_AS(solve_dare(A, C, Q, R), NumericError);
}

TEST_CASE("refinement chain matches the frozen references at every level") {
  const SystemModel model = test_helpers::coupled_two_state();
  const DelayChain chain = delayed_chain(model, 3);
  REQUIRE(chain.P_seq.size() == 4);
  REQUIRE(chain.L_seq.size() == 3);
  REQUIRE(chain.Phi_seq.size() == 4);

  CHECK((chain.P_seq[0] - frozen::P_stacked).norm() <= 1e-9);
  CHECK((chain.P_seq[1] - frozen::P2).norm() <= 1e-9);
  CHECK((chain.P_seq[2] - frozen::P3).norm() <= 1e-9);
  CHECK((chain.P_seq[3] - frozen::P4).norm() <= 1e-9);
  CHECK((chain.L_seq[0] - frozen::L1).norm() <= 1e-9);
  CHECK((chain.L_seq[1] - frozen::L2).norm() <= 1e-9);
}

TEST_CASE("refinement products multiply new factors on the right") {
  const SystemModel model = test_helpers::coupled_two_state();
  const DelayChain chain = delayed_chain(model, 2);
  CHECK((chain.Phi_seq[0] - Eigen::MatrixXd::Identity(2, 2)).norm() == 0.0);
  CHECK((chain.Phi_seq[1] - frozen::Phi1).norm() <= 1e-9);
  CHECK((chain.Phi_seq[2] - frozen::Phi2).norm() <= 1e-9);

  // Phi_2 = (A - L2 C)(A - L1 C): the later refinement acts on the left.
  const Eigen::MatrixXd left =
      (model.A - frozen::L2 * model.C) * (model.A - frozen::L1 * model.C);
  CHECK((chain.Phi_seq[2] - left).norm() <= 1e-8);
  const Eigen::MatrixXd wrong_order =
      (model.A - frozen::L1 * model.C) * (model.A - frozen::L2 * model.C);
  CHECK((chain.Phi_seq[2] - wrong_order).norm() > 1e-3);
}

TEST_CASE("chain is monotone and converges to the local solution") {
  const SystemModel model = test_helpers::coupled_two_state();
  const SteadyKalman local = solve_dare(model.A, model.C, model.Q, model.R);

  const DelayChain chain = delayed_chain(model, 6);
  for (std::size_t l = 0; l + 1 < chain.P_seq.size(); ++l) {
    CHECK(linalg::min_eig_sym(linalg::symmetrize(
              chain.P_seq[l + 1] - chain.P_seq[l])) >= -1e-10);
  }

  const DelayChain deep = delayed_chain(model, 30);
  CHECK((deep.P_seq.back() - local.P).norm() <= 1e-6);
}

TEST_CASE("monotone chain on the decoupled system") {
  const DelayChain chain = delayed_chain(test_helpers::decoupled_two_state(), 5);
  for (std::size_t l = 0; l + 1 < chain.P_seq.size(); ++l) {
    CHECK(linalg::min_eig_sym(linalg::symmetrize(
              chain.P_seq[l + 1] - chain.P_seq[l])) >= -1e-10);
  }
}

TEST_CASE("decay constants bound the product norm") {
  const SystemModel model = test_helpers::coupled_two_state();
  for (int d = 0; d <= 6; ++d) {
    const DelayChain chain = delayed_chain(model, d);
    REQUIRE(chain.decay_available);
    CHECK(chain.tau >= 1.0);
    CHECK(chain.rho0 > 0.0);
    CHECK(chain.rho0 < 1.0);
    const double lhs = std::pow(linalg::spectral_norm(chain.Phi_seq.back()), 2);
    CHECK(lhs <= chain.tau * std::pow(chain.rho0, d) + 1e-12);
  }
}

TEST_CASE("delay zero degenerates to the stacked solution alone") {
  const SystemModel model = test_helpers::coupled_two_state();
  const DelayChain chain = delayed_chain(model, 0);
  CHECK(chain.P_seq.size() == 1);
  CHECK(chain.L_seq.empty());
  CHECK(chain.Phi_seq.size() == 1);
  CHECK((chain.Phi_seq[0] - Eigen::MatrixXd::Identity(2, 2)).norm() == 0.0);
  CHECK((chain.P_seq[0] - frozen::P_stacked).norm() <= 1e-9);
}

TEST_CASE("stationary cross and coupled identities hold along the chain") {
  const SystemModel model = test_helpers::coupled_two_state();
  const AugmentedModel aug = augment(model);
  const int d = 4;
  const DelayChain chain = delayed_chain(model, d);
  const SteadyKalman stacked =
      solve_dare(model.A, aug.C_bar, model.Q, aug.R_bar);
  const Eigen::MatrixXd Abar = model.A - stacked.L * aug.C_bar;
  Eigen::MatrixXd Rtilde = Eigen::MatrixXd::Zero(aug.m_bar, model.m());
  Rtilde.topRows(model.m()) = model.R;

  for (int i = 0; i < d; ++i) {
    const Eigen::MatrixXd rhs =
        Abar * chain.P_seq[0] *
            (model.A - chain.L_seq[i] * model.C).transpose() +
        model.Q + stacked.L * Rtilde * chain.L_seq[i].transpose();
    CHECK((chain.P_seq[0] - rhs).norm() <= 1e-8);
  }

  for (int i = 1; i <= d; ++i) {
    for (int j = i; j <= d; ++j) {
      const Eigen::MatrixXd rhs =
          (model.A - chain.L_seq[i - 1] * model.C) * chain.P_seq[i - 1] *
              (model.A - chain.L_seq[j - 1] * model.C).transpose() +
          model.Q +
          chain.L_seq[i - 1] * model.R * chain.L_seq[j - 1].transpose();
      CHECK((chain.P_seq[i] - rhs).norm() <= 1e-8);
    }
  }
}

TEST_CASE("random stable systems keep the fixed-point property") {
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = gauss(rng);
    A *= 0.9 / std::max(linalg::spectral_radius(A), 1e-6);
    Eigen::MatrixXd C(1, n);
    for (int j = 0; j < n; ++j) C(0, j) = gauss(rng);
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = gauss(rng);
    const Eigen::MatrixXd Q =
        M * M.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd R = mat({{1.0}});

    const SteadyKalman sol = solve_dare(A, C, Q, R);
    CHECK((ric_step(A, C, Q, R, sol.P) - sol.P).norm() <= 1e-8);
    CHECK(linalg::min_eig_sym(sol.P) > 0.0);
    CHECK(sol.rho_cl < 1.0);
  }
}
