#include "adsvd/bgmodel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace adsvd::bg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void require(bool ok, const char* what) {
  if (!ok) {
    throw std::invalid_argument(std::string("params: ") + what);
  }
}

// Depth-first search over candidates ordered by (|j - i|, j); the first hit
// is the lexicographically smallest feasible choice in that order.
bool pick(const std::vector<Index>& cand, const std::vector<Index>& dist,
          std::size_t from, Index left, Index need, std::vector<Index>& out) {
  if (left == 0) {
    return need == 0;
  }
  const std::size_t n = cand.size();
  for (std::size_t p = from; p + static_cast<std::size_t>(left) <= n; ++p) {
    Index lo = 0;
    for (Index k = 0; k < left; ++k) {
      lo += dist[p + static_cast<std::size_t>(k)];
    }
    if (lo > need) {
      break;  // distances only grow further along
    }
    Index hi = 0;
    for (Index k = 0; k < left; ++k) {
      hi += dist[n - 1 - static_cast<std::size_t>(k)];
    }
    if (hi < need) {
      return false;
    }
    out.push_back(cand[p]);
    if (pick(cand, dist, p + 1, left - 1, need - dist[p], out)) {
      return true;
    }
    out.pop_back();
  }
  return false;
}

}  // namespace

void Params::validate() const {
  require(ell >= 1, "ell must be >= 1");
  require(ell <= n_star, "ell must not exceed n_star");
  require(eta > 0.0, "eta must be positive");
  require(tau_star_factor >= 0.0, "tau_star_factor must be >= 0");
  require(beta >= 1, "beta must be >= 1");
  require(nu >= 1, "nu must be >= 1");
  require(nu <= beta - 1 || !similarity_check, "nu must be <= beta - 1");
  require(delta_t >= nu, "delta_t must be >= nu");
  require(theta >= 0.0, "theta must be >= 0");
  require(period >= 0, "period must be >= 0");
  require(mu >= 1, "mu must be >= 1");
  require(stride >= 1, "stride must be >= 1");
}

Frame normalize_frame(std::span<const double> raw, int width, int height,
                      std::int64_t index) {
  const auto d = static_cast<Index>(raw.size());
  if (d < 2) {
    throw std::invalid_argument("normalize_frame: need at least two pixels");
  }
  if (static_cast<Index>(width) * height != d) {
    throw std::invalid_argument("normalize_frame: size does not match " +
                                std::to_string(width) + "x" +
                                std::to_string(height));
  }
  const Eigen::Map<const Vector> x(raw.data(), d);
  Frame f;
  f.index = index;
  f.width = width;
  f.height = height;
  f.mu = x.mean();
  f.sd = std::sqrt((x.array() - f.mu).square().sum() / static_cast<double>(d - 1));
  if (f.sd == 0.0) {
    f.degenerate = true;
    f.pixels = Vector::Zero(d);
    return f;
  }
  f.pixels = (x.array() - f.mu) / f.sd;
  return f;
}

Vector project_background(const FactoredBasis& basis, const Frame& f) {
  if (basis.dim() != f.dim()) {
    throw std::invalid_argument("project_background: dimension mismatch");
  }
  const Index k = basis.i_hat;
  const Matrix w = basis.house.apply(f.pixels, true);
  const Matrix c = basis.u_small.leftCols(k).transpose() * w.topRows(basis.rank());
  return basis.combine(c).col(0);
}

Mask foreground_mask(const Frame& f, const Vector& background, double theta) {
  if (background.size() != f.dim()) {
    throw std::invalid_argument("foreground_mask: size mismatch");
  }
  Mask m(f.width, f.height);
  for (Index i = 0; i < f.dim(); ++i) {
    m.bits[static_cast<std::size_t>(i)] =
        std::abs(f.pixels(i) - background(i)) > theta ? 1 : 0;
  }
  return m;
}

double similarity(const Frame& a, const Frame& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("similarity: dimension mismatch");
  }
  if (a.degenerate || b.degenerate) {
    throw std::invalid_argument("similarity: degenerate frame");
  }
  return a.pixels.dot(b.pixels) / static_cast<double>(a.dim() - 1);
}

std::vector<Index> select_partners(Index m, Index i, Index nu, Index delta_t) {
  if (i < 0 || i >= m || nu < 1 || nu > m - 1) {
    throw std::invalid_argument("select_partners: need 1 <= nu < m, 0 <= i < m");
  }
  std::vector<Index> cand;
  for (Index j = 0; j < m; ++j) {
    if (j != i) {
      cand.push_back(j);
    }
  }
  std::stable_sort(cand.begin(), cand.end(), [i](Index a, Index b) {
    return std::abs(a - i) < std::abs(b - i);
  });
  std::vector<Index> dist;
  for (Index j : cand) {
    dist.push_back(std::abs(j - i));
  }
  std::vector<Index> out;
  if (!pick(cand, dist, 0, nu, delta_t, out)) {
    out.assign(cand.begin(), cand.begin() + nu);
  }
  return out;
}

double mean_similarity(std::span<const Frame> block, Index i, Index nu,
                       Index delta_t) {
  const auto partners =
      select_partners(static_cast<Index>(block.size()), i, nu, delta_t);
  double sum = 0.0;
  for (Index j : partners) {
    sum += similarity(block[static_cast<std::size_t>(i)],
                      block[static_cast<std::size_t>(j)]);
  }
  return sum / static_cast<double>(nu);
}

bool forced_update_due(std::int64_t block_counter, int period) {
  return period > 0 && block_counter > 0 && block_counter % period == 0;
}

Projector::Projector(const FactoredBasis& basis)
    : u_(basis.columns(basis.i_hat)) {}

Vector Projector::project(const Vector& x) const {
  const Vector c = u_.transpose() * x;
  return u_ * c;
}

BackgroundModel::BackgroundModel(Params params, const Matrix& init, int width,
                                 int height)
    : params_(params), width_(width), height_(height) {
  params_.validate();
  const Index d = init.rows();
  if (static_cast<Index>(width) * height != d) {
    throw std::invalid_argument("background model: frame size mismatch");
  }

  std::vector<Frame> frames;
  for (Index j = 0; j < init.cols(); ++j) {
    const auto col = init.col(j);
    Frame f = normalize_frame(std::span<const double>(col.data(), static_cast<std::size_t>(d)),
                              width, height, j);
    if (!f.degenerate) {
      frames.push_back(std::move(f));
    }
  }
  if (frames.empty()) {
    throw std::invalid_argument("background model: no usable initialization frames");
  }
  Matrix a(d, static_cast<Index>(frames.size()));
  for (std::size_t j = 0; j < frames.size(); ++j) {
    a.col(static_cast<Index>(j)) = frames[j].pixels;
  }

  rho_ = compute_rho(a, params_.eta);
  tau_star_ = params_.tau_star_factor * rho_;
  basis_ = svd_comp(a, std::min(params_.ell, a.cols()), tau_star_);
  if (basis_.rank() < params_.ell) {
    warning_ = "initialization matrix has rank " + std::to_string(basis_.rank()) +
               " < ell = " + std::to_string(params_.ell) + "; ell lowered";
    params_.ell = basis_.rank();
  }
  projector_ = Projector(basis_);
}

StepResult BackgroundModel::step(std::span<const double> raw) {
  const auto d = static_cast<Index>(raw.size());
  if (d != basis_.dim()) {
    throw std::invalid_argument("step: frame has " + std::to_string(d) +
                                " pixels, model expects " +
                                std::to_string(basis_.dim()));
  }
  const std::int64_t index = frame_counter_++;
  ++stats_.frames;
  const bool offered = index % params_.stride == 0;
  if (offered) {
    ++stats_.offered;
  }

  StepResult out;
  Frame f = normalize_frame(raw, width_, height_, index);
  out.mu = f.mu;
  out.sd = f.sd;
  if (f.degenerate) {
    out.degenerate = true;
    out.mask = Mask(width_, height_);
    out.foreground.assign(raw.size(), 0.0);
    out.background = Vector::Zero(d);
    if (offered) {
      ++stats_.degenerate;
    }
    return out;
  }

  out.background = projector_.project(f.pixels);
  out.mask = foreground_mask(f, out.background, params_.theta);
  out.foreground.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out.foreground[i] = out.mask.bits[i] ? raw[i] : 0.0;
  }

  if (offered) {
    pending_.push_back({std::move(f), out.background});
    if (static_cast<Index>(pending_.size()) == params_.beta) {
      process_block();
      out.block_processed = true;
    }
  }
  return out;
}

void BackgroundModel::process_block() {
  ++stats_.blocks;
  const bool forced = forced_update_due(stats_.blocks, params_.period);
  if (forced) {
    ++stats_.forced_blocks;
  }

  std::vector<Index> survivors;
  if (params_.similarity_check) {
    std::vector<Frame> frames;
    frames.reserve(pending_.size());
    for (const auto& p : pending_) {
      frames.push_back(p.frame);
    }
    for (Index i = 0; i < static_cast<Index>(frames.size()); ++i) {
      if (mean_similarity(frames, i, params_.nu, params_.delta_t) >= params_.s_bar) {
        survivors.push_back(i);
      } else {
        ++stats_.rejected_similarity;
      }
    }
  } else {
    for (Index i = 0; i < static_cast<Index>(pending_.size()); ++i) {
      survivors.push_back(i);
    }
  }

  if (!survivors.empty()) {
    Matrix block(basis_.dim(), static_cast<Index>(survivors.size()));
    for (std::size_t k = 0; k < survivors.size(); ++k) {
      const Pending& p = pending_[static_cast<std::size_t>(survivors[k])];
      block.col(static_cast<Index>(k)) = p.frame.pixels;
      if (params_.strategy == Strategy::kII) {
        store_.push_back(p.background);
        if (static_cast<Index>(store_.size()) > params_.mu) {
          store_.pop_front();
        }
      }
    }

    const auto t0 = Clock::now();
    AppendResult res = svd_append(basis_, block,
                                  {.tau_star = tau_star_,
                                   .bypass_threshold = forced,
                                   .max_rank = params_.n_star});
    stats_.append_seconds += seconds_since(t0);
    stats_.accepted += res.report.accepted;
    stats_.rejected_tau += static_cast<std::int64_t>(res.report.rejected_frames.size());
    basis_ = std::move(res.basis);

    if (basis_.rank() >= params_.n_star) {
      reinitialize();
    }
    projector_ = Projector(basis_);
  }
  pending_.clear();
}

void BackgroundModel::reinitialize() {
  const auto t0 = Clock::now();
  if (params_.strategy == Strategy::kIII) {
    basis_ = with_threshold(
        normalize_sigma(reinit_iii(basis_, params_.ell), rho_), tau_star_);
  } else {
    Matrix store(basis_.dim(), static_cast<Index>(store_.size()));
    for (std::size_t j = 0; j < store_.size(); ++j) {
      store.col(static_cast<Index>(j)) = store_[j];
    }
    basis_ = reinit_ii(store, params_.ell, tau_star_);
  }
  stats_.reinit_seconds += seconds_since(t0);
  ++stats_.reinits;
  if (reinit_cb_) {
    reinit_cb_(basis_);
  }
}

}  // namespace adsvd::bg
