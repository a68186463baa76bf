#include <Eigen/Dense>
#include <filesystem>
#include <fstream>

#include "coopfilter/errors.hpp"
#include "coopfilter/simulate.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace coopfilter;
using test_helpers::mat;

TEST_CASE("sample paths are a deterministic function of the seed") {
  const SystemModel model = test_helpers::coupled_two_state();
  const Trajectory a = gen_trajectory(model, 200, 7);
  const Trajectory b = gen_trajectory(model, 200, 7);
  CHECK((a.x - b.x).norm() == 0.0);
  CHECK((a.y - b.y).norm() == 0.0);
  CHECK((a.y_e - b.y_e).norm() == 0.0);

  const Trajectory c = gen_trajectory(model, 200, 8);
  CHECK((a.y - c.y).norm() > 0.0);
}

TEST_CASE("shapes and the noiseless special case") {
  SystemModel model = test_helpers::coupled_two_state();
  const Trajectory t = gen_trajectory(model, 50, 1);
  CHECK(t.x.rows() == 2);
  CHECK(t.y.rows() == 1);
  CHECK(t.y_e.rows() == 1);
  CHECK(t.length() == 50);

  model.Q.setZero();
  model.R.setZero();
  model.R_e.setZero();
  Eigen::VectorXd x0(2);
  x0 << 1.0, -2.0;
  const Trajectory det = gen_trajectory(model, 20, 3, x0);
  Eigen::VectorXd x = x0;
  for (int k = 0; k < 20; ++k) {
    CHECK((det.y.col(k) - model.C * x).norm() <= 1e-14);
    CHECK((det.y_e.col(k) - model.C_e * x).norm() <= 1e-14);
    x = model.A * x;
  }
}

TEST_CASE("observation noise has the configured variance") {
  const SystemModel model = test_helpers::coupled_two_state();
  const int N = 20000;
  const Trajectory t = gen_trajectory(model, N, 11);
  double acc = 0.0;
  for (int k = 0; k < N; ++k) {
    const double v = (t.y.col(k) - model.C * t.x.col(k))(0);
    acc += v * v;
  }
  CHECK(acc / N == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("stream exposes exactly the causal window") {
  const SystemModel model = test_helpers::coupled_two_state();
  const Trajectory t = gen_trajectory(model, 30, 2);
  ObservationStream s = stream(t, 3);
  CHECK(s.delay() == 3);
  CHECK(s.step() == -1);

  REQUIRE(s.advance());  // step 0
  CHECK(s.step() == 0);
  CHECK((s.local(0) - t.y.col(0)).norm() == 0.0);
  CHECK_THROWS_AS(s.local(1), UsageError);
  CHECK_THROWS_AS(s.external(0), UsageError);  // not released until step 3

  for (int k = 1; k <= 4; ++k) REQUIRE(s.advance());
  CHECK(s.step() == 4);
  CHECK((s.external(1) - t.y_e.col(1)).norm() == 0.0);
  CHECK_THROWS_AS(s.external(2), UsageError);
  const Eigen::VectorXd f = s.fused(1);
  CHECK(f.size() == 2);
  CHECK(f(0) == t.y.col(1)(0));
  CHECK(f(1) == t.y_e.col(1)(0));

  while (s.advance()) {
  }
  CHECK(s.step() == 29);
  CHECK_FALSE(s.advance());
}

TEST_CASE("csv ingestion synthesizes noisy observations") {
  const auto path =
      std::filesystem::temp_directory_path() / "traj_ingest_test.csv";
  {
    std::ofstream out(path);
    out << "x0,x1\n";
    for (int k = 0; k < 40; ++k) {
      out << 0.5 * k << "," << (40.0 - k) << "\n";
    }
  }
  const Trajectory t = load_trajectory_csv(path.string(), 0.0, 5);
  CHECK(t.model_free_only);
  CHECK(t.length() == 40);
  CHECK(t.y.rows() == 2);
  CHECK(t.y(0, 6) == doctest::Approx(3.0));
  CHECK(t.y(1, 6) == doctest::Approx(34.0));
  CHECK((t.y - t.y_e).norm() == 0.0);  // zero noise: both sensors see x

  const Trajectory noisy = load_trajectory_csv(path.string(), 0.25, 5);
  CHECK((noisy.y - t.y).norm() > 0.0);
  const Trajectory noisy2 = load_trajectory_csv(path.string(), 0.25, 5);
  CHECK((noisy.y - noisy2.y).norm() == 0.0);  // same seed, same draw

  CHECK_THROWS_AS(load_trajectory_csv("/nonexistent/file.csv", 0.1, 1),
                  UsageError);

  const auto ragged =
      std::filesystem::temp_directory_path() / "traj_ragged_test.csv";
  {
    std::ofstream out(ragged);
    out << "1,2\n3\n";
  }
  CHECK_THROWS_AS(load_trajectory_csv(ragged.string(), 0.1, 1), UsageError);

  const auto text =
      std::filesystem::temp_directory_path() / "traj_text_test.csv";
  {
    std::ofstream out(text);
    out << "1,2\n3,abc\n";
  }
  CHECK_THROWS_AS(load_trajectory_csv(text.string(), 0.1, 1), UsageError);
}
