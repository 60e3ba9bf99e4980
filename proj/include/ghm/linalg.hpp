#pragma once

#include <Eigen/Dense>

#include <algorithm>

namespace ghm {

/// Relative singular-value cutoff used for every rank decision.
inline constexpr double rank_cutoff = 1e-10;

struct LeastSquares {
  Eigen::VectorXd x;
  int rank = 0;
  /// Orthonormal basis of ker A, one column per kernel direction.
  Eigen::MatrixXd null_space;
};

/// Minimum-norm least-squares solution of A x = b via SVD.
inline LeastSquares min_norm_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                   double cutoff = rank_cutoff) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  double smax = s.size() ? s(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (smax > 0.0 && s(i) > smax * cutoff) ++rank;
  LeastSquares r;
  r.rank = rank;
  r.x = Eigen::VectorXd::Zero(a.cols());
  if (b.size()) {
    for (int i = 0; i < rank; ++i) r.x += svd.matrixV().col(i) * (svd.matrixU().col(i).dot(b) / s(i));
  }
  r.null_space = svd.matrixV().rightCols(a.cols() - rank);
  return r;
}

inline int numerical_rank(const Eigen::MatrixXd& a, double cutoff = rank_cutoff) {
  return min_norm_solve(a, Eigen::VectorXd(), cutoff).rank;
}

inline Eigen::MatrixXd null_space(const Eigen::MatrixXd& a, double cutoff = rank_cutoff) {
  return min_norm_solve(a, Eigen::VectorXd(), cutoff).null_space;
}

}  // namespace ghm
