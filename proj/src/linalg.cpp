#include "coopfilter/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <limits>

#include "coopfilter/errors.hpp"

namespace coopfilter::linalg {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& M) {
  return 0.5 * (M + M.transpose());
}

Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& S, const Eigen::MatrixXd& B,
                          const std::string& label) {
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) {
    throw NumericError("SPD factorization failed for " + label);
  }
  return llt.solve(B);
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& S, const std::string& label) {
  return spd_solve(S, Eigen::MatrixXd::Identity(S.rows(), S.cols()), label);
}

double spectral_radius(const Eigen::MatrixXd& M) {
  if (M.rows() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_norm(const Eigen::MatrixXd& M) {
  if (M.rows() == 0 || M.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues()(0);
}

double min_eig_sym(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eig_sym(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

namespace {
template <typename Mat>
int rank_impl(const Mat& M, double rel_tol) {
  if (M.rows() == 0 || M.cols() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(M);
  const auto& sv = svd.singularValues();
  const double thresh = rel_tol * sv(0);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > thresh) ++r;
  }
  return r;
}
}  // namespace

int numerical_rank(const Eigen::MatrixXd& M, double rel_tol) {
  return rank_impl(M, rel_tol);
}

int numerical_rank(const Eigen::MatrixXcd& M, double rel_tol) {
  return rank_impl(M, rel_tol);
}

double condition_number(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

}  // namespace coopfilter::linalg
