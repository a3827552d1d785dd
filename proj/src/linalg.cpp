#include "adsvd/linalg.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace adsvd::linalg {

namespace {

// Builds the reflector mapping x onto alpha * e_1 and returns alpha.
// A zero x yields the zero (identity) reflector and alpha = 0.
double make_reflector(const Eigen::Ref<const Vector>& x, Vector& tail) {
  const double norm = x.norm();
  tail = x;
  if (norm == 0.0) {
    tail.setZero();
    return 0.0;
  }
  const double alpha = x(0) >= 0.0 ? -norm : norm;
  tail(0) -= alpha;
  tail /= tail.norm();
  return alpha;
}

PivotedQr factorize(const Matrix& m, bool pivot) {
  const Index p = m.rows();
  const Index q = m.cols();
  if (p < 1 || q < 1) {
    throw std::invalid_argument("qr: empty matrix");
  }
  const Index k = std::min(p, q);

  PivotedQr out;
  out.q = HouseholderStack(p);
  out.perm.resize(static_cast<std::size_t>(q));
  std::iota(out.perm.begin(), out.perm.end(), Index{0});

  Matrix work = m;
  Vector tail;
  for (Index j = 0; j < k; ++j) {
    if (pivot) {
      Index best = j;
      double best_norm = work.col(j).tail(p - j).squaredNorm();
      for (Index c = j + 1; c < q; ++c) {
        const double n2 = work.col(c).tail(p - j).squaredNorm();
        if (n2 > best_norm) {
          best_norm = n2;
          best = c;
        }
      }
      if (best != j) {
        work.col(j).swap(work.col(best));
        std::swap(out.perm[static_cast<std::size_t>(j)],
                  out.perm[static_cast<std::size_t>(best)]);
      }
    }

    const double alpha = make_reflector(work.col(j).tail(p - j), tail);
    auto r = std::make_shared<Reflector>(Reflector{j, tail});
    if (j + 1 < q) {
      r->apply(work.rightCols(q - j - 1));
    }
    work(j, j) = alpha;
    work.col(j).tail(p - j - 1).setZero();
    out.q.push_back(std::move(r));
  }

  out.r = work.topRows(k);
  out.r.triangularView<Eigen::StrictlyLower>().setZero();
  return out;
}

}  // namespace

void Reflector::apply(Eigen::Ref<Matrix> x) const {
  const Index n = tail.size();
  if (n == 0) {
    return;
  }
  auto rows = x.middleRows(offset, n);
  const Eigen::RowVectorXd w = tail.transpose() * rows;
  rows.noalias() -= (2.0 * tail) * w;
}

Vector Reflector::dense(Index dim) const {
  Vector v = Vector::Zero(dim);
  v.segment(offset, tail.size()) = tail;
  return v;
}

void HouseholderStack::push_back(const Vector& v) {
  if (v.size() != dim_) {
    throw std::invalid_argument("householder: vector length " +
                                std::to_string(v.size()) + " != dim " +
                                std::to_string(dim_));
  }
  Index off = 0;
  while (off < v.size() && v(off) == 0.0) {
    ++off;
  }
  if (off == v.size()) {
    refl_.push_back(std::make_shared<const Reflector>(Reflector{0, Vector()}));
    return;
  }
  refl_.push_back(std::make_shared<const Reflector>(
      Reflector{off, v.tail(v.size() - off)}));
}

void HouseholderStack::push_back(std::shared_ptr<const Reflector> r) {
  if (r->offset + r->tail.size() > dim_) {
    throw std::invalid_argument("householder: reflector exceeds dimension");
  }
  refl_.push_back(std::move(r));
}

HouseholderStack HouseholderStack::prefix(Index k) const {
  HouseholderStack out(dim_);
  out.refl_.assign(refl_.begin(), refl_.begin() + std::min(k, size()));
  return out;
}

void HouseholderStack::apply_in_place(Eigen::Ref<Matrix> x,
                                      bool transposed) const {
  if (x.rows() != dim_) {
    throw std::invalid_argument("householder: matrix has " +
                                std::to_string(x.rows()) + " rows, expected " +
                                std::to_string(dim_));
  }
  if (transposed) {
    for (const auto& r : refl_) {
      r->apply(x);
    }
  } else {
    for (auto it = refl_.rbegin(); it != refl_.rend(); ++it) {
      (*it)->apply(x);
    }
  }
}

Matrix HouseholderStack::apply(const Matrix& x, bool transposed) const {
  Matrix out = x;
  apply_in_place(out, transposed);
  return out;
}

Matrix apply_stack(const HouseholderStack& h, const Matrix& x,
                   bool transposed) {
  return h.apply(x, transposed);
}

Matrix PivotedQr::explicit_q() const {
  return q.apply(Matrix::Identity(q.dim(), q.dim()), false);
}

Matrix PivotedQr::permutation_matrix() const {
  const auto n = static_cast<Index>(perm.size());
  Matrix p = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    p(perm[static_cast<std::size_t>(j)], j) = 1.0;
  }
  return p;
}

PivotedQr qr_column_pivot(const Matrix& m) { return factorize(m, true); }

PivotedQr qr_householder(const Matrix& m) { return factorize(m, false); }

DenseSvd dense_svd(const Matrix& m, bool want_v) {
  if (m.size() == 0) {
    throw std::invalid_argument("dense_svd: empty matrix");
  }
  unsigned opts = Eigen::ComputeFullU;
  if (want_v) {
    opts |= Eigen::ComputeFullV;
  }
  Eigen::JacobiSVD<Matrix> svd(m, opts);
  DenseSvd out;
  out.u = svd.matrixU();
  out.sigma = svd.singularValues();
  if (want_v) {
    out.v = svd.matrixV();
  }
  return out;
}

}  // namespace adsvd::linalg
