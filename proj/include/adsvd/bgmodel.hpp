#pragma once

// Streaming background subtraction on top of the adaptive SVD: per-frame
// normalization, projection and masking, block buffering with a temporal
// similarity gate, periodic forced updates and re-initialization.

#include "adsvd/adaptive_svd.hpp"
#include "adsvd/mask.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace adsvd::bg {

enum class Strategy {
  kII,   // re-initialize from stored background projections
  kIII,  // truncate U Sigma and renormalize
};

struct Params {
  Index ell = 15;
  Index n_star = 30;
  double eta = 30.0;
  double tau_star_factor = 0.05;  // tau* = factor * rho
  Index beta = 6;
  Index nu = 3;
  Index delta_t = 6;
  double s_bar = 0.97;
  double theta = 1.0;
  int period = 10;  // forced update every `period` blocks; 0 disables
  Strategy strategy = Strategy::kIII;
  Index mu = 30;   // background store size for strategy II
  int stride = 1;  // every stride-th frame is offered for an update
  bool similarity_check = true;

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;
};

/// One vectorized frame after zero-mean, unit-sample-std normalization.
struct Frame {
  Vector pixels;
  double mu = 0.0;
  double sd = 0.0;
  std::int64_t index = 0;
  int width = 0;
  int height = 0;
  bool degenerate = false;  // constant input; pixels are all zero

  Index dim() const { return pixels.size(); }
};

Frame normalize_frame(std::span<const double> raw, int width, int height,
                      std::int64_t index = 0);

/// U[:, :i_hat] U[:, :i_hat]^T f, evaluated through the Householder stack.
Vector project_background(const FactoredBasis& basis, const Frame& f);

/// True where |f - background| > theta.
Mask foreground_mask(const Frame& f, const Vector& background, double theta);

/// Normalized covariance; both frames must be non-degenerate.
double similarity(const Frame& a, const Frame& b);

/// Partner indices (0-based) used for the mean similarity of frame i in a
/// block of m frames: nu distinct j != i with sum |j - i| == delta_t. Among
/// all such sets the first in the order "smaller |j - i|, then smaller j" is
/// chosen; without a feasible set the nu nearest neighbours are returned.
std::vector<Index> select_partners(Index m, Index i, Index nu, Index delta_t);

double mean_similarity(std::span<const Frame> block, Index i, Index nu,
                       Index delta_t);

/// True when the 1-based block counter hits a multiple of `period`.
bool forced_update_due(std::int64_t block_counter, int period);

/// Explicit U[:, :i_hat] for fast per-frame projection.
class Projector {
 public:
  Projector() = default;
  explicit Projector(const FactoredBasis& basis);

  Vector project(const Vector& x) const;
  Index cols() const { return u_.cols(); }

 private:
  Matrix u_;
};

struct StepResult {
  Mask mask;
  std::vector<double> foreground;  // original intensities where mask is set
  Vector background;               // normalized units
  double mu = 0.0;
  double sd = 0.0;
  bool degenerate = false;
  bool block_processed = false;
};

struct Stats {
  std::int64_t frames = 0;
  std::int64_t offered = 0;  // accepted + rejected_* + degenerate + pending
  std::int64_t accepted = 0;
  std::int64_t rejected_tau = 0;
  std::int64_t rejected_similarity = 0;
  std::int64_t degenerate = 0;
  std::int64_t blocks = 0;
  std::int64_t forced_blocks = 0;
  std::int64_t reinits = 0;
  double append_seconds = 0.0;
  double reinit_seconds = 0.0;
};

class BackgroundModel {
 public:
  /// `init` holds raw initialization frames as columns (d x n).
  BackgroundModel(Params params, const Matrix& init, int width, int height);

  StepResult step(std::span<const double> raw);

  const FactoredBasis& basis() const { return basis_; }
  const Params& params() const { return params_; }
  const Stats& stats() const { return stats_; }
  double rho() const { return rho_; }
  double tau_star() const { return tau_star_; }
  Index pending() const { return static_cast<Index>(pending_.size()); }
  Index store_size() const { return static_cast<Index>(store_.size()); }
  /// Set when the initialization matrix had rank below ell.
  const std::string& warning() const { return warning_; }

  /// Called after every re-initialization with the new basis.
  void on_reinit(std::function<void(const FactoredBasis&)> cb) {
    reinit_cb_ = std::move(cb);
  }

 private:
  struct Pending {
    Frame frame;
    Vector background;
  };

  void process_block();
  void reinitialize();

  Params params_;
  int width_;
  int height_;
  FactoredBasis basis_;
  Projector projector_;
  double rho_ = 0.0;
  double tau_star_ = 0.0;
  std::vector<Pending> pending_;
  std::deque<Vector> store_;
  std::int64_t frame_counter_ = 0;
  Stats stats_;
  std::string warning_;
  std::function<void(const FactoredBasis&)> reinit_cb_;
};

}  // namespace adsvd::bg
