#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "coopfilter/model.hpp"

namespace coopfilter {

/// Simulated (or ingested) sample path. Column k of each matrix is step k.
struct Trajectory {
  Eigen::MatrixXd x;    // n x N latent states
  Eigen::MatrixXd y;    // m x N local observations
  Eigen::MatrixXd y_e;  // m_ext x N external observations
  std::uint64_t seed = 0;
  bool model_free_only = false;  // set for CSV ingestion without a model

  int length() const { return static_cast<int>(y.cols()); }
};

/// Causal window over a trajectory: after advancing to step k, local
/// observations 0..k and external observations 0..k-d are readable; anything
/// newer throws. Reads are indexed access, the cursor only moves forward.
class ObservationStream {
 public:
  ObservationStream(const Trajectory& traj, int d);

  int delay() const { return d_; }
  int length() const { return traj_->length(); }
  int step() const { return k_; }

  /// Moves to the next step; false once the trajectory is exhausted.
  bool advance();

  Eigen::VectorXd local(int i) const;     // y_i, i <= step()
  Eigen::VectorXd external(int i) const;  // y_e_i, i <= step() - delay()
  Eigen::VectorXd fused(int i) const;     // [y_i; y_e_i], i <= step() - delay()

 private:
  const Trajectory* traj_;
  int d_;
  int k_ = -1;
};

/// Samples x_{k+1} = A x_k + w_k, y_k = C x_k + v_k, y^e_k = C_e x_k + v^e_k
/// for k = 0..N-1, deterministically in `seed`. An empty x0 means zero.
Trajectory gen_trajectory(const SystemModel& model, int N, std::uint64_t seed,
                          const Eigen::VectorXd& x0 = Eigen::VectorXd());

ObservationStream stream(const Trajectory& traj, int d);

/// Consensus-type system: A has i.i.d. Uniform(0,1) entries with rows
/// normalized to sum 1; Q = S Sᵀ + 1e-3 I from a standard-normal S;
/// C = e1ᵀ, C_e = e2ᵀ, R = R_e = 0.01.
SystemModel gen_consensus_system(int n, std::uint64_t seed);

/// Reads one state vector per CSV row (constant arity, '.' decimals, optional
/// header) and synthesizes y = x + v, y_e = x + v_e with v, v_e ~ N(0, sigma I).
/// The result is marked model_free_only.
Trajectory load_trajectory_csv(const std::string& path, double sigma,
                               std::uint64_t seed);

}  // namespace coopfilter
