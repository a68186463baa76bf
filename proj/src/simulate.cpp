#include "coopfilter/simulate.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "coopfilter/errors.hpp"
#include "coopfilter/linalg.hpp"

namespace coopfilter {

namespace {

/// A factor F with F Fᵀ = Cov: Cholesky when it succeeds, symmetric
/// square root for singular PSD input.
Eigen::MatrixXd noise_factor(const Eigen::MatrixXd& cov) {
  if (cov.rows() == 0) return cov;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) {
    return llt.matrixL();
  }
  return linalg::psd_sqrt(linalg::symmetrize(cov));
}

Eigen::VectorXd draw_standard_normal(std::mt19937_64& rng,
                                     std::normal_distribution<double>& dist,
                                     int size) {
  Eigen::VectorXd v(size);
  for (int i = 0; i < size; ++i) v(i) = dist(rng);
  return v;
}

bool parse_double(const std::string& cell, double* out) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  *out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end != '\0') {
    if (!std::isspace(static_cast<unsigned char>(*end))) return false;
    ++end;
  }
  return true;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

ObservationStream::ObservationStream(const Trajectory& traj, int d)
    : traj_(&traj), d_(d) {
  if (d < 0) throw UsageError("delay must be nonnegative");
}

bool ObservationStream::advance() {
  if (k_ + 1 >= traj_->length()) return false;
  ++k_;
  return true;
}

Eigen::VectorXd ObservationStream::local(int i) const {
  if (i < 0 || i > k_) {
    throw UsageError("local observation " + std::to_string(i) +
                     " is not readable at step " + std::to_string(k_));
  }
  return traj_->y.col(i);
}

Eigen::VectorXd ObservationStream::external(int i) const {
  if (i < 0 || i > k_ - d_) {
    throw UsageError("external observation " + std::to_string(i) +
                     " is not readable at step " + std::to_string(k_) +
                     " under delay " + std::to_string(d_));
  }
  return traj_->y_e.col(i);
}

Eigen::VectorXd ObservationStream::fused(int i) const {
  if (i < 0 || i > k_ - d_) {
    throw UsageError("fused observation " + std::to_string(i) +
                     " is not readable at step " + std::to_string(k_) +
                     " under delay " + std::to_string(d_));
  }
  Eigen::VectorXd out(traj_->y.rows() + traj_->y_e.rows());
  out.head(traj_->y.rows()) = traj_->y.col(i);
  out.tail(traj_->y_e.rows()) = traj_->y_e.col(i);
  return out;
}

Trajectory gen_trajectory(const SystemModel& model, int N, std::uint64_t seed,
                          const Eigen::VectorXd& x0) {
  if (N <= 0) throw UsageError("trajectory length must be positive");
  const int n = model.n();
  const int m = model.m();
  const int me = model.m_ext();

  Eigen::VectorXd x = x0;
  if (x.size() == 0) x = Eigen::VectorXd::Zero(n);
  if (x.size() != n) throw UsageError("x0 dimension must equal n");

  const Eigen::MatrixXd Fq = noise_factor(model.Q);
  const Eigen::MatrixXd Fr = noise_factor(model.R);
  const Eigen::MatrixXd Fre = noise_factor(model.R_e);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);

  Trajectory traj;
  traj.seed = seed;
  traj.x.resize(n, N);
  traj.y.resize(m, N);
  traj.y_e.resize(me, N);

  for (int k = 0; k < N; ++k) {
    traj.x.col(k) = x;
    traj.y.col(k) = model.C * x + Fr * draw_standard_normal(rng, dist, m);
    if (me > 0) {
      traj.y_e.col(k) =
          model.C_e * x + Fre * draw_standard_normal(rng, dist, me);
    }
    x = model.A * x + Fq * draw_standard_normal(rng, dist, n);
  }
  return traj;
}

ObservationStream stream(const Trajectory& traj, int d) {
  return ObservationStream(traj, d);
}

SystemModel gen_consensus_system(int n, std::uint64_t seed) {
  if (n < 2) throw UsageError("consensus system needs n >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  SystemModel model;
  model.A.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) model.A(i, j) = unif(rng);
    model.A.row(i) /= model.A.row(i).sum();
  }
  Eigen::MatrixXd S(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) S(i, j) = normal(rng);
  }
  model.Q = S * S.transpose() + 1e-3 * Eigen::MatrixXd::Identity(n, n);
  model.C = Eigen::MatrixXd::Zero(1, n);
  model.C(0, 0) = 1.0;
  model.C_e = Eigen::MatrixXd::Zero(1, n);
  model.C_e(0, 1) = 1.0;
  model.R = Eigen::MatrixXd::Constant(1, 1, 0.01);
  model.R_e = Eigen::MatrixXd::Constant(1, 1, 0.01);
  return model;
}

Trajectory load_trajectory_csv(const std::string& path, double sigma,
                               std::uint64_t seed) {
  if (sigma < 0.0) throw UsageError("noise variance must be nonnegative");
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open trajectory file: " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  int arity = -1;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    std::vector<double> values(cells.size());
    bool numeric = true;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!parse_double(cells[i], &values[i])) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (rows.empty() && arity == -1) continue;  // header line
      throw UsageError("non-numeric cell at line " + std::to_string(lineno) +
                       " of " + path);
    }
    if (arity == -1) {
      arity = static_cast<int>(values.size());
    } else if (static_cast<int>(values.size()) != arity) {
      throw UsageError("ragged row at line " + std::to_string(lineno) + " of " +
                       path);
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw UsageError("no data rows in " + path);

  const int N = static_cast<int>(rows.size());
  const double noise_sd = std::sqrt(sigma);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);

  Trajectory traj;
  traj.seed = seed;
  traj.model_free_only = true;
  traj.x.resize(arity, N);
  traj.y.resize(arity, N);
  traj.y_e.resize(arity, N);
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < arity; ++i) traj.x(i, k) = rows[k][i];
    traj.y.col(k) =
        traj.x.col(k) + noise_sd * draw_standard_normal(rng, dist, arity);
    traj.y_e.col(k) =
        traj.x.col(k) + noise_sd * draw_standard_normal(rng, dist, arity);
  }
  return traj;
}

}  // namespace coopfilter
