#pragma once

// Dense linear algebra building blocks: stacks of Householder reflections,
// QR with column pivoting and a small dense SVD. Nothing in here knows about
// images or backgrounds.

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace adsvd::linalg {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// One elementary reflection I - 2 v v^T acting on R^d.
///
/// Only the trailing part of v starting at `offset` is stored; the leading
/// entries are zero. A zero `tail` is the identity reflection.
struct Reflector {
  Index offset = 0;
  Vector tail;

  void apply(Eigen::Ref<Matrix> x) const;
  Vector dense(Index dim) const;
};

/// An ordered product H_1 H_2 ... H_k of reflections over dimension d.
///
/// Reflectors are shared between stacks: appending to a stack yields a new
/// stack that references the old reflectors without copying them.
class HouseholderStack {
 public:
  HouseholderStack() = default;
  explicit HouseholderStack(Index dim) : dim_(dim) {}

  Index dim() const { return dim_; }
  Index size() const { return static_cast<Index>(refl_.size()); }
  bool empty() const { return refl_.empty(); }

  const Reflector& operator[](Index j) const { return *refl_[j]; }

  /// Appends a reflection with unit (or zero) vector `v` of length dim().
  void push_back(const Vector& v);
  void push_back(std::shared_ptr<const Reflector> r);

  /// Keeps the first `k` reflections.
  HouseholderStack prefix(Index k) const;

  /// Returns H_1 ... H_k X, or H_k ... H_1 X when `transposed` is set.
  Matrix apply(const Matrix& x, bool transposed) const;
  void apply_in_place(Eigen::Ref<Matrix> x, bool transposed) const;

 private:
  Index dim_ = 0;
  std::vector<std::shared_ptr<const Reflector>> refl_;
};

/// Free-function form of HouseholderStack::apply.
Matrix apply_stack(const HouseholderStack& h, const Matrix& x, bool transposed);

/// Householder QR with optional column pivoting, kept in factored form.
///
/// `m * P = Q * R` where Q = H_1 ... H_k for the reflectors in `q`, and
/// `perm[j]` is the original index of the j-th column of m * P.
struct PivotedQr {
  HouseholderStack q;
  Matrix r;                 // min(p, q) x q, upper trapezoidal
  std::vector<Index> perm;  // column permutation

  Matrix explicit_q() const;
  Matrix permutation_matrix() const;
};

/// QR with column pivoting by largest remaining column norm. Ties go to the
/// lowest column index, so the result is deterministic.
PivotedQr qr_column_pivot(const Matrix& m);

/// Unpivoted Householder QR; same layout as qr_column_pivot with perm = id.
PivotedQr qr_householder(const Matrix& m);

struct DenseSvd {
  Matrix u;      // p x p
  Vector sigma;  // min(p, q), non-increasing
  Matrix v;      // q x q, empty unless requested
};

DenseSvd dense_svd(const Matrix& m, bool want_v);

}  // namespace adsvd::linalg
