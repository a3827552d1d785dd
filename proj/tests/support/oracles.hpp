#pragma once

// Test-only helpers: seeded random matrices and independent reference
// computations that do not go through the library's factorization paths.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

namespace adsvd::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double normal() { return normal_(gen_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(gen_);
  }

  Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) {
        m(i, j) = normal();
      }
    }
    return m;
  }

  Eigen::VectorXd unit_vector(Eigen::Index n) {
    Eigen::VectorXd v = gaussian(n, 1);
    return v / v.norm();
  }

  /// Random matrix with orthonormal columns (Gram-Schmidt via Eigen's QR).
  Eigen::MatrixXd orthonormal(Eigen::Index rows, Eigen::Index cols) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(rows, cols));
    return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Singular values from the eigenvalues of the Gram matrix.
inline Eigen::VectorXd gram_singular_values(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd g = m.cols() <= m.rows() ? Eigen::MatrixXd(m.transpose() * m)
                                                 : Eigen::MatrixXd(m * m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  Eigen::VectorXd ev = es.eigenvalues().reverse();
  return ev.cwiseMax(0.0).cwiseSqrt();
}

/// Batch reference SVD through Eigen's divide-and-conquer routine.
struct BatchSvd {
  Eigen::MatrixXd u;
  Eigen::VectorXd sigma;
};

inline BatchSvd batch_svd(const Eigen::MatrixXd& m) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
  return {svd.matrixU(), svd.singularValues()};
}

/// Largest principal angle between span(a) and span(b), where b has no
/// more columns than a and both are orthonormal.
inline double max_principal_angle(const Eigen::MatrixXd& a,
                                  const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd resid = b - a * (a.transpose() * b);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(resid);
  const double s = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  return std::asin(std::min(1.0, s));
}

inline double orthonormality_error(const Eigen::MatrixXd& u) {
  return (u.transpose() * u -
          Eigen::MatrixXd::Identity(u.cols(), u.cols()))
      .cwiseAbs()
      .maxCoeff();
}

/// Largest elementwise relative error |got_i - want_i| / |want_i|.
inline double max_rel_error(const Eigen::VectorXd& got,
                            const Eigen::VectorXd& want) {
  if (got.size() != want.size()) {
    return INFINITY;
  }
  return ((got - want).cwiseAbs().array() / want.cwiseAbs().array())
      .maxCoeff();
}

}  // namespace adsvd::testing
