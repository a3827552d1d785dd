#pragma once

// Incremental, thresholded SVD of a column-augmented matrix. Only the left
// singular vectors and the singular values are kept; the right factor is
// never formed.

#include "adsvd/linalg.hpp"

#include <span>
#include <vector>

namespace adsvd {

using linalg::Index;
using linalg::Matrix;
using linalg::Vector;

/// Background subspace U = (H_1 ... H_r) [u_small; 0] with singular values.
///
/// `i_hat` counts the leading directions treated as background (1 <= i_hat
/// <= rank). Values are immutable in practice: every operation below returns
/// a new basis and the Householder reflectors are shared between successors.
struct FactoredBasis {
  linalg::HouseholderStack house;
  Matrix u_small;  // r x r, orthogonal
  Vector sigma;    // r, non-increasing
  Index i_hat = 0;

  Index dim() const { return house.dim(); }
  Index rank() const { return sigma.size(); }

  /// Coordinates U^T B (rank x m).
  Matrix coefficients(const Matrix& b) const;
  /// Returns U[:, :k] * c for c of shape k x m.
  Matrix combine(const Matrix& c) const;
  /// Explicit U[:, :k] (d x k).
  Matrix columns(Index k) const;
  Matrix columns() const { return columns(rank()); }
};

struct ThresholdChoice {
  Index i_hat = 0;  // 1-based count of background directions
  double tau = 0.0;
};

/// First index i (1-based) with sigma_i - sigma_{i+1} < tau_star, and
/// tau = sigma_i. Falls back to i = r when every gap is at least tau_star.
ThresholdChoice threshold_index(std::span<const double> sigma,
                                double tau_star);
ThresholdChoice threshold_index(const Vector& sigma, double tau_star);

struct AppendOptions {
  /// Slope threshold used to pick tau. Non-positive disables the
  /// significance gate entirely (every non-degenerate direction is kept).
  double tau_star = 0.0;
  /// Forced update: accept directions regardless of tau.
  bool bypass_threshold = false;
  /// Upper bound on the rank after the append; negative means none.
  Index max_rank = -1;
};

struct AppendReport {
  Index accepted = 0;
  std::vector<Index> rejected_frames;  // column indices into the block
  double tau = 0.0;
};

struct AppendResult {
  FactoredBasis basis;
  AppendReport report;
};

/// Best rank-min(ell, rank A) basis of A with i_hat chosen from tau_star.
FactoredBasis svd_comp(const Matrix& a, Index ell, double tau_star);

/// Appends the columns of `block` to the matrix represented by `basis`.
AppendResult svd_append(const FactoredBasis& basis, const Matrix& block,
                        const AppendOptions& opts);

/// Truncates to the leading min(ell, r) directions and rebuilds the
/// Householder stack at that length. Singular values are copied verbatim;
/// i_hat is clamped to the new rank.
FactoredBasis reinit_iii(const FactoredBasis& basis, Index ell);

/// Re-initialization from stored background projections (one per column).
FactoredBasis reinit_ii(const Matrix& store, Index ell, double tau_star);

/// rho = ||A||_F / sqrt(n) * sqrt(eta).
double compute_rho(const Matrix& a, double eta);

/// Scales sigma onto the sphere of radius rho when its 2-norm exceeds rho.
FactoredBasis normalize_sigma(const FactoredBasis& basis, double rho);

/// Recomputes i_hat for a new slope threshold.
FactoredBasis with_threshold(FactoredBasis basis, double tau_star);

/// Builds a basis from explicit orthonormal columns `u` (d x r) and values.
FactoredBasis basis_from_columns(const Matrix& u, const Vector& sigma,
                                 Index i_hat);

}  // namespace adsvd
