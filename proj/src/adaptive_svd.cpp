#include "adsvd/adaptive_svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace adsvd {

namespace {

// Residual pivots below this fraction of the largest block column norm are
// numerically in the span of the basis and never become new directions.
constexpr double kDegenerateRel = 1e-10;

}  // namespace

Matrix FactoredBasis::coefficients(const Matrix& b) const {
  const Matrix w = house.apply(b, true);
  return u_small.transpose() * w.topRows(rank());
}

Matrix FactoredBasis::combine(const Matrix& c) const {
  const Index k = c.rows();
  if (k > rank()) {
    throw std::invalid_argument("combine: more coefficients than columns");
  }
  Matrix x = Matrix::Zero(dim(), c.cols());
  x.topRows(rank()).noalias() = u_small.leftCols(k) * c;
  house.apply_in_place(x, false);
  return x;
}

Matrix FactoredBasis::columns(Index k) const {
  return combine(Matrix::Identity(k, k));
}

ThresholdChoice threshold_index(std::span<const double> sigma,
                                double tau_star) {
  if (sigma.empty()) {
    throw std::invalid_argument("threshold_index: empty spectrum");
  }
  const std::size_t r = sigma.size();
  for (std::size_t i = 0; i + 1 < r; ++i) {
    if (sigma[i] - sigma[i + 1] < tau_star) {
      return {static_cast<Index>(i + 1), sigma[i]};
    }
  }
  return {static_cast<Index>(r), sigma[r - 1]};
}

ThresholdChoice threshold_index(const Vector& sigma, double tau_star) {
  return threshold_index(
      std::span<const double>(sigma.data(), static_cast<std::size_t>(sigma.size())),
      tau_star);
}

FactoredBasis basis_from_columns(const Matrix& u, const Vector& sigma,
                                 Index i_hat) {
  if (u.cols() != sigma.size()) {
    throw std::invalid_argument("basis_from_columns: column/value mismatch");
  }
  linalg::PivotedQr qr = linalg::qr_householder(u);
  FactoredBasis b;
  b.house = std::move(qr.q);
  b.u_small = qr.r;
  b.sigma = sigma;
  b.i_hat = std::clamp<Index>(i_hat, 1, sigma.size());
  return b;
}

FactoredBasis svd_comp(const Matrix& a, Index ell, double tau_star) {
  if (a.size() == 0) {
    throw std::invalid_argument("svd_comp: empty matrix");
  }
  const Index d = a.rows();
  const Index n = a.cols();
  if (ell < 1 || ell > n || n > d) {
    throw std::invalid_argument("svd_comp: need 1 <= ell <= n <= d (ell=" +
                                std::to_string(ell) + ", n=" +
                                std::to_string(n) + ", d=" +
                                std::to_string(d) + ")");
  }

  // A P = Q R, and the SVD of the small R gives A's spectrum and, through
  // Q, its left singular vectors.
  const linalg::PivotedQr qr = linalg::qr_column_pivot(a);
  const linalg::DenseSvd small = linalg::dense_svd(qr.r, false);

  const double tol = static_cast<double>(std::max(d, n)) *
                     std::numeric_limits<double>::epsilon() * small.sigma(0);
  Index numeric_rank = 0;
  while (numeric_rank < small.sigma.size() &&
         small.sigma(numeric_rank) > tol) {
    ++numeric_rank;
  }
  if (numeric_rank == 0) {
    throw std::invalid_argument("svd_comp: matrix has rank zero");
  }
  const Index r = std::min(ell, numeric_rank);

  Matrix u = Matrix::Zero(d, r);
  u.topRows(n) = small.u.leftCols(r);
  qr.q.apply_in_place(u, false);

  const Vector sigma = small.sigma.head(r);
  return basis_from_columns(u, sigma, threshold_index(sigma, tau_star).i_hat);
}

AppendResult svd_append(const FactoredBasis& basis, const Matrix& block,
                        const AppendOptions& opts) {
  const Index d = basis.dim();
  const Index r = basis.rank();
  const Index m = block.cols();
  if (block.rows() != d) {
    throw std::invalid_argument("svd_append: block has " +
                                std::to_string(block.rows()) +
                                " rows, basis dimension is " +
                                std::to_string(d));
  }
  if (m < 1) {
    throw std::invalid_argument("svd_append: empty block");
  }
  if (m + r > d) {
    throw std::invalid_argument("svd_append: rank + block width exceeds d");
  }

  AppendReport report;
  if (!opts.bypass_threshold && opts.tau_star > 0.0) {
    report.tau = threshold_index(basis.sigma, opts.tau_star).tau;
  }

  // Rotate the block into the coordinates of the full orthogonal factor:
  // the first r rows live in span(U), the rest is the residual.
  Matrix w = basis.house.apply(block, true);
  const Matrix z = basis.u_small.transpose() * w.topRows(r);
  const linalg::PivotedQr qr = linalg::qr_column_pivot(w.bottomRows(d - r));

  double largest = 0.0;
  for (Index j = 0; j < m; ++j) {
    largest = std::max(largest, block.col(j).norm());
  }
  const double degenerate = kDegenerateRel * largest;

  Index cap = qr.r.rows();
  if (opts.max_rank >= 0) {
    cap = std::clamp<Index>(opts.max_rank - r, 0, cap);
  }
  Index accepted = 0;
  while (accepted < cap) {
    const double pivot = std::abs(qr.r(accepted, accepted));
    if (pivot < report.tau || pivot <= degenerate) {
      break;
    }
    ++accepted;
  }
  report.accepted = accepted;
  for (Index j = accepted; j < m; ++j) {
    report.rejected_frames.push_back(qr.perm[static_cast<std::size_t>(j)]);
  }
  std::sort(report.rejected_frames.begin(), report.rejected_frames.end());

  // Middle matrix [[Sigma, Z P], [0, R_1:a]]; its left factor and values
  // are all the update needs.
  const Index k = r + accepted;
  Matrix middle = Matrix::Zero(k, r + m);
  middle.topLeftCorner(r, r).diagonal() = basis.sigma;
  for (Index j = 0; j < m; ++j) {
    middle.block(0, r + j, r, 1) = z.col(qr.perm[static_cast<std::size_t>(j)]);
  }
  middle.bottomRightCorner(accepted, m) = qr.r.topRows(accepted);
  const linalg::DenseSvd small = linalg::dense_svd(middle, false);

  FactoredBasis next;
  next.house = basis.house;
  for (Index j = 0; j < accepted; ++j) {
    const linalg::Reflector& g = qr.q[j];
    next.house.push_back(std::make_shared<const linalg::Reflector>(
        linalg::Reflector{r + g.offset, g.tail}));
  }
  next.u_small = Matrix::Zero(k, k);
  next.u_small.topRows(r).noalias() = basis.u_small * small.u.topRows(r);
  next.u_small.bottomRows(accepted) = small.u.bottomRows(accepted);
  next.sigma = small.sigma.head(k);
  const double slope = opts.tau_star > 0.0 ? opts.tau_star : 0.0;
  next.i_hat = threshold_index(next.sigma, slope).i_hat;

  return {std::move(next), std::move(report)};
}

FactoredBasis reinit_iii(const FactoredBasis& basis, Index ell) {
  if (ell < 1) {
    throw std::invalid_argument("reinit_iii: ell must be positive");
  }
  const Index k = std::min(ell, basis.rank());
  if (k == basis.rank()) {
    return basis;
  }
  // U[:, :k] Sigma[:k] is already an SVD, so re-initialization reduces to
  // one QR that regains a length-k Householder stack.
  return basis_from_columns(basis.columns(k), basis.sigma.head(k),
                            std::min(basis.i_hat, k));
}

FactoredBasis reinit_ii(const Matrix& store, Index ell, double tau_star) {
  if (store.cols() == 0) {
    throw std::invalid_argument("reinit_ii: empty background store");
  }
  return svd_comp(store, std::min(ell, store.cols()), tau_star);
}

double compute_rho(const Matrix& a, double eta) {
  if (a.cols() < 1) {
    throw std::invalid_argument("compute_rho: no columns");
  }
  return a.norm() / std::sqrt(static_cast<double>(a.cols())) * std::sqrt(eta);
}

FactoredBasis normalize_sigma(const FactoredBasis& basis, double rho) {
  if (!(rho > 0.0)) {
    throw std::invalid_argument("normalize_sigma: rho must be positive");
  }
  FactoredBasis out = basis;
  const double norm = basis.sigma.norm();
  if (norm > rho) {
    out.sigma *= rho / norm;
  }
  return out;
}

FactoredBasis with_threshold(FactoredBasis basis, double tau_star) {
  basis.i_hat = threshold_index(basis.sigma, tau_star).i_hat;
  return basis;
}

}  // namespace adsvd
