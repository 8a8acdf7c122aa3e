#pragma once

// Candidate collections, criterion-minimizing selection and greedy
// general-to-specific block elimination.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "selpred/dgp.hpp"
#include "selpred/lsq.hpp"
#include "selpred/oracle.hpp"

namespace selpred {

struct ModelCollection {
  std::vector<ModelMask> masks;

  Index count() const { return static_cast<Index>(masks.size()); }
  Index max_size() const {
    Index m = 0;
    for (const auto& mask : masks) m = std::max(m, mask.size());
    return m;
  }
  void validate_for(Index n, Index width) const {
    if (masks.empty()) throw std::invalid_argument("ModelCollection: empty collection");
    for (const auto& mask : masks) {
      if (mask.width() != width)
        throw std::invalid_argument("ModelCollection: mask " + mask.to_string() + " has width " +
                                    std::to_string(mask.width()) + ", expected " + std::to_string(width));
      mask.validate_for(n);
    }
  }
};

/// Nested masks: intercept plus the first k regressors for each k in `sizes`
/// (model sizes |m| = k + 1).
inline ModelCollection nested_prefix_collection(Index width, const std::vector<Index>& regressor_counts) {
  ModelCollection c;
  for (Index k : regressor_counts) c.masks.push_back(ModelMask::prefix(width, k));
  return c;
}

struct Selection {
  ModelMask mask;
  double value = 0.0;
  Index index = 0;  // position in the collection or path
};

namespace detail {

inline Selection argmin_with_ties(const std::vector<ModelMask>& masks, const std::vector<double>& values) {
  if (masks.empty()) throw std::invalid_argument("selection over an empty collection");
  std::size_t best = 0;
  for (std::size_t i = 1; i < masks.size(); ++i) {
    if (values[i] < values[best] ||
        (values[i] == values[best] && precedes_on_tie(masks[i], masks[best])))
      best = i;
  }
  return {masks[best], values[best], static_cast<Index>(best)};
}

}  // namespace detail

inline Selection select_min(const TrainingSample& sample, const ModelCollection& collection,
                            CriterionKind kind = CriterionKind::rho_hat_sq) {
  collection.validate_for(sample.n(), sample.X.cols());
  std::vector<double> values;
  values.reserve(collection.masks.size());
  for (const auto& mask : collection.masks)
    values.push_back(criterion_from_rss(fit_rss(sample, mask), sample.n(), mask.size(), kind));
  return detail::argmin_with_ties(collection.masks, values);
}

enum class OracleTarget { rho, delta };

inline Selection oracle_best(const Dgp& dgp, const TrainingSample& sample, const ModelCollection& collection,
                             OracleTarget target) {
  collection.validate_for(sample.n(), sample.X.cols());
  std::vector<double> values;
  values.reserve(collection.masks.size());
  for (const auto& mask : collection.masks) {
    const OracleQuantities q = oracle_quantities(dgp, sample, mask);
    values.push_back(target == OracleTarget::rho ? q.rho_sq : q.delta_sq);
  }
  return detail::argmin_with_ties(collection.masks, values);
}

/// Block partition over design columns 1..p (column 0 is the intercept).
using BlockPartition = std::vector<std::vector<Index>>;

/// `count` consecutive blocks of `width` regressors starting at column 1.
inline BlockPartition consecutive_blocks(Index count, Index width) {
  BlockPartition blocks(static_cast<std::size_t>(count));
  for (Index b = 0; b < count; ++b)
    for (Index j = 0; j < width; ++j) blocks[static_cast<std::size_t>(b)].push_back(1 + b * width + j);
  return blocks;
}

struct GreedyPath {
  std::vector<ModelMask> visited;        // most complex first, intercept-only last
  std::vector<double> rss_path;          // RSS of each visited model
  std::vector<Index> elimination_order;  // block removed at each step
  std::vector<VectorXd> coefficients;    // beta_hat (length p+1) of each visited model
};

enum class GreedyStrategy { gram_downdate, refit };

namespace detail {

inline ModelMask mask_from_blocks(Index width, const BlockPartition& blocks, const std::vector<bool>& alive) {
  std::vector<Index> cols;
  for (std::size_t b = 0; b < blocks.size(); ++b)
    if (alive[b]) cols.insert(cols.end(), blocks[b].begin(), blocks[b].end());
  return ModelMask::from_indices(width, cols);
}

inline void validate_blocks(const TrainingSample& sample, const BlockPartition& blocks) {
  if (blocks.empty()) throw std::invalid_argument("greedy_block_path: no blocks");
  std::vector<bool> seen(static_cast<std::size_t>(sample.X.cols()), false);
  Index total = 1;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].empty())
      throw std::invalid_argument("greedy_block_path: block " + std::to_string(b) + " is empty");
    for (Index j : blocks[b]) {
      if (j < 1 || j >= sample.X.cols())
        throw std::invalid_argument("greedy_block_path: column " + std::to_string(j) + " in block " +
                                    std::to_string(b) + " outside [1, " + std::to_string(sample.X.cols() - 1) +
                                    "]");
      if (seen[static_cast<std::size_t>(j)])
        throw std::invalid_argument("greedy_block_path: column " + std::to_string(j) +
                                    " appears in more than one block");
      seen[static_cast<std::size_t>(j)] = true;
      ++total;
    }
  }
  if (!(total < sample.n() - 1))
    throw std::invalid_argument("greedy_block_path: full model size " + std::to_string(total) +
                                " violates |m| < n - 1 for n = " + std::to_string(sample.n()));
}

inline GreedyPath greedy_refit(const TrainingSample& sample, const BlockPartition& blocks) {
  const Index width = sample.X.cols();
  std::vector<bool> alive(blocks.size(), true);
  GreedyPath path;
  ModelMask current = mask_from_blocks(width, blocks, alive);
  path.visited.push_back(current);
  path.rss_path.push_back(fit_rss(sample, current));
  for (std::size_t step = 0; step < blocks.size(); ++step) {
    double best_rss = std::numeric_limits<double>::infinity();
    std::size_t best = blocks.size();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (!alive[b]) continue;
      alive[b] = false;
      const double rss = fit_rss(sample, mask_from_blocks(width, blocks, alive));
      alive[b] = true;
      if (rss < best_rss) {
        best_rss = rss;
        best = b;
      }
    }
    alive[best] = false;
    path.visited.push_back(mask_from_blocks(width, blocks, alive));
    path.rss_path.push_back(best_rss);
    path.elimination_order.push_back(static_cast<Index>(best));
  }
  for (const auto& mask : path.visited) path.coefficients.push_back(fit_model(sample, mask).beta_hat);
  return path;
}

// Backward elimination on the inverse Gram matrix V = (Z'Z)^{-1} of the
// current model: dropping block B raises RSS by b_B' (V_BB)^{-1} b_B, and the
// reduced model has V_RR - V_RB V_BB^{-1} V_BR and b_R - V_RB V_BB^{-1} b_B.
inline bool greedy_gram(const TrainingSample& sample, const BlockPartition& blocks, GreedyPath& path) {
  const Index width = sample.X.cols();
  std::vector<bool> alive(blocks.size(), true);
  const ModelMask full = mask_from_blocks(width, blocks, alive);
  const FitResult fit = fit_model(sample, full);
  if (fit.rank_deficient) return false;

  std::vector<Index> cols = full.indices();  // design column of each local position
  const MatrixXd Z = select_columns(sample.X, cols);
  Eigen::HouseholderQR<MatrixXd> qr(Z);
  const Index k = Z.cols();
  const MatrixXd R = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(MatrixXd::Identity(k, k));
  MatrixXd V = Rinv * Rinv.transpose();
  VectorXd b(k);
  for (Index i = 0; i < k; ++i) b[i] = fit.beta_hat[cols[static_cast<std::size_t>(i)]];

  std::vector<Index> local_of(static_cast<std::size_t>(width), -1);
  auto relabel = [&] {
    std::fill(local_of.begin(), local_of.end(), -1);
    for (std::size_t i = 0; i < cols.size(); ++i) local_of[static_cast<std::size_t>(cols[i])] = static_cast<Index>(i);
  };
  relabel();

  auto store = [&](double rss) {
    VectorXd full_b = VectorXd::Zero(width);
    for (std::size_t i = 0; i < cols.size(); ++i) full_b[cols[i]] = b[static_cast<Index>(i)];
    path.visited.push_back(mask_from_blocks(width, blocks, alive));
    path.rss_path.push_back(rss);
    path.coefficients.push_back(std::move(full_b));
  };
  double rss = fit.rss;
  store(rss);

  for (std::size_t step = 0; step < blocks.size(); ++step) {
    double best_inc = std::numeric_limits<double>::infinity();
    std::size_t best = blocks.size();
    for (std::size_t blk = 0; blk < blocks.size(); ++blk) {
      if (!alive[blk]) continue;
      const auto& members = blocks[blk];
      const Index kb = static_cast<Index>(members.size());
      MatrixXd Vbb(kb, kb);
      VectorXd bb(kb);
      for (Index i = 0; i < kb; ++i) {
        const Index li = local_of[static_cast<std::size_t>(members[static_cast<std::size_t>(i)])];
        bb[i] = b[li];
        for (Index j = 0; j < kb; ++j)
          Vbb(i, j) = V(li, local_of[static_cast<std::size_t>(members[static_cast<std::size_t>(j)])]);
      }
      Eigen::LDLT<MatrixXd> ldlt(Vbb);
      if (ldlt.info() != Eigen::Success) return false;
      const double inc = std::max(0.0, bb.dot(ldlt.solve(bb)));
      if (inc < best_inc) {
        best_inc = inc;
        best = blk;
      }
    }

    std::vector<Index> keep_local, drop_local;
    std::vector<bool> drop_col(static_cast<std::size_t>(width), false);
    for (Index j : blocks[best]) drop_col[static_cast<std::size_t>(j)] = true;
    for (std::size_t i = 0; i < cols.size(); ++i)
      (drop_col[static_cast<std::size_t>(cols[i])] ? drop_local : keep_local).push_back(static_cast<Index>(i));
    const Index kr = static_cast<Index>(keep_local.size());
    const Index kd = static_cast<Index>(drop_local.size());
    MatrixXd Vrr(kr, kr), Vrd(kr, kd), Vdd(kd, kd);
    VectorXd br(kr), bd(kd);
    for (Index i = 0; i < kr; ++i) {
      br[i] = b[keep_local[static_cast<std::size_t>(i)]];
      for (Index j = 0; j < kr; ++j) Vrr(i, j) = V(keep_local[static_cast<std::size_t>(i)], keep_local[static_cast<std::size_t>(j)]);
      for (Index j = 0; j < kd; ++j) Vrd(i, j) = V(keep_local[static_cast<std::size_t>(i)], drop_local[static_cast<std::size_t>(j)]);
    }
    for (Index i = 0; i < kd; ++i) {
      bd[i] = b[drop_local[static_cast<std::size_t>(i)]];
      for (Index j = 0; j < kd; ++j) Vdd(i, j) = V(drop_local[static_cast<std::size_t>(i)], drop_local[static_cast<std::size_t>(j)]);
    }
    Eigen::LDLT<MatrixXd> ldlt(Vdd);
    const MatrixXd Vdd_inv_Vdr = ldlt.solve(Vrd.transpose());
    V = Vrr - Vrd * Vdd_inv_Vdr;
    V = 0.5 * (V + V.transpose()).eval();
    b = br - Vrd * ldlt.solve(bd);

    std::vector<Index> next_cols;
    for (Index li : keep_local) next_cols.push_back(cols[static_cast<std::size_t>(li)]);
    cols = std::move(next_cols);
    relabel();

    alive[best] = false;
    rss += best_inc;
    path.elimination_order.push_back(static_cast<Index>(best));
    store(rss);
  }
  return true;
}

}  // namespace detail

/// Greedy general-to-specific search: starting from all blocks, repeatedly
/// drop the block whose removal raises RSS least (ties: lowest block index)
/// until only the intercept remains. Returns #blocks + 1 nested models.
inline GreedyPath greedy_block_path(const TrainingSample& sample, const BlockPartition& blocks,
                                    GreedyStrategy strategy = GreedyStrategy::gram_downdate) {
  detail::validate_blocks(sample, blocks);
  if (strategy == GreedyStrategy::gram_downdate) {
    GreedyPath path;
    if (detail::greedy_gram(sample, blocks, path)) return path;
  }
  return detail::greedy_refit(sample, blocks);
}

/// Minimizer of the criterion among the models visited by `path`.
inline Selection select_on_path(const TrainingSample& sample, const GreedyPath& path,
                                CriterionKind kind = CriterionKind::rho_hat_sq) {
  if (path.visited.empty()) throw std::invalid_argument("select_on_path: empty path");
  std::vector<double> values;
  values.reserve(path.visited.size());
  for (std::size_t i = 0; i < path.visited.size(); ++i)
    values.push_back(criterion_from_rss(path.rss_path[i], sample.n(), path.visited[i].size(), kind));
  return detail::argmin_with_ties(path.visited, values);
}

}  // namespace selpred
