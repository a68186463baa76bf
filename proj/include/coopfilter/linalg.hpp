#pragma once

#include <Eigen/Dense>
#include <string>

namespace coopfilter::linalg {

/// (M + Mᵀ)/2; used after every Riccati step to suppress asymmetry drift.
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& M);

/// Solves S X = B for symmetric positive definite S via LLT.
/// Throws NumericError naming `label` if the factorization fails.
Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& S, const Eigen::MatrixXd& B,
                          const std::string& label);

/// Inverse of a symmetric positive definite matrix via LLT.
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& S, const std::string& label);

/// Largest |eigenvalue| of a general square matrix.
double spectral_radius(const Eigen::MatrixXd& M);

/// Largest singular value.
double spectral_norm(const Eigen::MatrixXd& M);

/// Smallest/largest eigenvalue of a symmetric matrix.
double min_eig_sym(const Eigen::MatrixXd& S);
double max_eig_sym(const Eigen::MatrixXd& S);

/// Symmetric PSD square root; eigenvalues below zero are clamped to zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& S);

/// Rank by singular values against threshold rel_tol * sigma_max.
int numerical_rank(const Eigen::MatrixXd& M, double rel_tol);
int numerical_rank(const Eigen::MatrixXcd& M, double rel_tol);

/// 2-norm condition number (sigma_max / sigma_min); +inf for singular input.
double condition_number(const Eigen::MatrixXd& M);

}  // namespace coopfilter::linalg
