#include "useembed/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "useembed/errors.hpp"
#include "useembed/rng.hpp"

namespace useembed {

namespace {

std::string padded(const char* prefix, long index, int width) {
  std::string digits = std::to_string(index);
  if (static_cast<int>(digits.size()) < width)
    digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

}  // namespace

double PlantedTruth::min_lambda() const {
  double max_sq = 1.0;  // attribute columns are unit vectors
  for (Eigen::Index c = 0; c < U_cat.cols(); ++c)
    max_sq = std::max(max_sq, U_cat.col(c).squaredNorm());
  for (Eigen::Index s = 0; s < U_sup.cols(); ++s)
    max_sq = std::max(max_sq, U_sup.col(s).squaredNorm());
  return max_sq;
}

Taxonomy gen_taxonomy(int branching, int depth, std::uint64_t /*seed*/) {
  if (branching < 2) throw ValidationError("gen_taxonomy: branching must be >= 2");
  if (depth < 1) throw ValidationError("gen_taxonomy: depth must be >= 1");

  // Level l (0 = leaves, depth = root) has branching^(depth-l) nodes.
  std::vector<long> level_size(depth + 1);
  long total = 0;
  for (int l = 0; l <= depth; ++l) {
    long n = 1;
    for (int i = 0; i < depth - l; ++i) {
      n *= branching;
      if (n > 100000) throw ValidationError("gen_taxonomy: more than 1e5 nodes");
    }
    level_size[l] = n;
    total += n;
    if (total > 100000) throw ValidationError("gen_taxonomy: more than 1e5 nodes");
  }

  const long C = level_size[0];
  const long S = total - C;
  const int leaf_width = std::max(4, static_cast<int>(std::to_string(C).size()));
  const int super_width = std::max(3, static_cast<int>(std::to_string(S).size()));

  std::vector<std::string> leaf_names;
  for (long i = 1; i <= C; ++i) leaf_names.push_back(padded("leaf_", i, leaf_width));
  std::vector<std::string> super_names;
  for (long i = 1; i <= S; ++i) super_names.push_back(padded("super_", i, super_width));

  // Supercategories numbered level by level from just-above-leaves up to the
  // root, left to right: the same order ingestion of the emitted edge file
  // assigns, so generated datasets round-trip with identical ids.
  std::vector<long> level_base(depth + 1, 0);  // offset within supers
  for (int l = 2; l <= depth; ++l) level_base[l] = level_base[l - 1] + level_size[l - 1];

  std::vector<NodeId> parent(total, kNoNode);
  for (long i = 0; i < C; ++i)
    parent[i] = static_cast<NodeId>(C + level_base[1] + i / branching + 1);
  for (int l = 1; l < depth; ++l)
    for (long i = 0; i < level_size[l]; ++i)
      parent[C + level_base[l] + i] =
          static_cast<NodeId>(C + level_base[l + 1] + i / branching + 1);

  return Taxonomy(std::move(leaf_names), std::move(super_names), std::move(parent));
}

namespace {

// Nodes ordered root-to-leaf (ancestors before descendants), ids tie-broken
// ascending.
std::vector<NodeId> topdown_order(const Taxonomy& tax) {
  std::vector<std::pair<int, NodeId>> keyed;
  for (NodeId id = 1; id <= tax.num_nodes(); ++id)
    keyed.push_back({static_cast<int>(tax.ancestors(id).size()), id});
  std::sort(keyed.begin(), keyed.end());
  std::vector<NodeId> order;
  order.reserve(keyed.size());
  for (auto& [depth, id] : keyed) order.push_back(id);
  return order;
}

Eigen::MatrixXd orthonormal_columns(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd G = rng.normal_matrix(rows, cols);
  if (cols <= rows) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  }
  for (int j = 0; j < cols; ++j) G.col(j).normalize();
  return G;
}

}  // namespace

std::pair<Dataset, PlantedTruth> gen_planted(const Taxonomy& taxonomy, int A, int k_star, int d,
                                             int d_e, int n_per_class, double sigma_n,
                                             double gamma1, std::uint64_t seed) {
  if (A < 1) throw ValidationError("gen_planted: A must be >= 1");
  if (k_star < 0 || k_star > A) throw ValidationError("gen_planted: need 0 <= k_star <= A");
  if (d < d_e || d_e < 1) throw ValidationError("gen_planted: need d >= d_e >= 1");
  if (n_per_class < 1) throw ValidationError("gen_planted: n_per_class must be >= 1");
  if (sigma_n < 0) throw ValidationError("gen_planted: sigma_n must be >= 0");
  if (k_star > 0 && gamma1 <= 0)
    throw ValidationError("gen_planted: gamma1 must be > 0 when k_star > 0");

  const int C = taxonomy.num_leaves();
  const int S = taxonomy.num_supers();
  Rng rng(seed);

  PlantedTruth truth;
  truth.sigma_n = sigma_n;
  truth.U_attr = orthonormal_columns(rng, d_e, A);

  // Every embedding under a root carries a unit positive component along
  // each attribute direction, so present attributes clear the correlation
  // margin sigma = 1 at the oracle.
  const Eigen::VectorXd bias = truth.U_attr.rowwise().sum();
  const double root_spread = 4.0;
  const auto order = topdown_order(taxonomy);

  if (taxonomy.roots().size() > 1 && A >= d_e)
    throw ValidationError("gen_planted: multi-root taxonomies need d_e > A");

  constexpr int kMaxAttempts = 500;
  Eigen::MatrixXd U_all(d_e, C + S);  // all concept embeddings by node id
  for (int attempt = 0;; ++attempt) {
    if (attempt >= kMaxAttempts)
      throw ValidationError(
          "gen_planted: failed to satisfy margin separation; "
          "reduce branching or increase A/gamma1");

    truth.B = Eigen::MatrixXd::Zero(A, C + S);
    for (NodeId id : order) {
      if (taxonomy.is_root(id)) {
        // Root = attribute bias + a spread component orthogonal to the
        // attribute span (zero when the attributes fill the space).
        const Eigen::VectorXd g = rng.normal_vector(d_e);
        Eigen::VectorXd r = g - truth.U_attr * (truth.U_attr.transpose() * g);
        const double norm = r.norm();
        if (norm > 1e-9)
          r *= root_spread / norm;
        else
          r.setZero();
        U_all.col(id - 1) = bias + r;
        continue;
      }

      // Prefer supports disjoint from the parent and already-drawn siblings;
      // the exclusive regularizer favors exactly that structure.
      const NodeId p = taxonomy.parent(id);
      std::vector<char> avoid(A, 0);
      for (int a = 0; a < A; ++a)
        if (truth.B(a, p - 1) > 0.0) avoid[a] = 1;
      for (NodeId sib : taxonomy.siblings(id))
        if (sib < id)
          for (int a = 0; a < A; ++a)
            if (truth.B(a, sib - 1) > 0.0) avoid[a] = 1;

      std::vector<int> support;
      for (int tries = 0; tries < 50 && support.empty(); ++tries) {
        auto pick = rng.sample_without_replacement(A, k_star);
        bool clashes = false;
        for (int a : pick) clashes = clashes || avoid[a] != 0;
        if (!clashes || tries == 49) support = pick;
      }
      for (int a : support) truth.B(a, id - 1) = rng.uniform(0.8 * gamma1, gamma1);
      U_all.col(id - 1) = U_all.col(p - 1) + truth.U_attr * truth.B.col(id - 1);
    }

    if (k_star == 0) break;  // leaves coincide with parents; nothing to separate

    // Margin criteria at the oracle embedding z = u_leaf: the category
    // hinges need pairwise leaf separation >= 2, the supercategory hinges
    // need every uncle at least 2 further (squared) than the own ancestor.
    bool ok = true;
    for (NodeId a = 1; a <= C && ok; ++a)
      for (NodeId b = a + 1; b <= C && ok; ++b)
        if ((U_all.col(a - 1) - U_all.col(b - 1)).squaredNorm() < 2.0) ok = false;
    for (NodeId y = 1; y <= C && ok; ++y) {
      for (NodeId s : taxonomy.ancestors(y)) {
        const double d_s = (U_all.col(y - 1) - U_all.col(s - 1)).squaredNorm();
        for (NodeId c : taxonomy.siblings(s)) {
          if ((U_all.col(y - 1) - U_all.col(c - 1)).squaredNorm() - d_s < 2.0) {
            ok = false;
            break;
          }
        }
        if (!ok) break;
      }
    }
    if (ok) break;
  }

  truth.U_cat = U_all.leftCols(C);
  truth.U_sup = U_all.rightCols(S);

  // Well-conditioned mixing: orthonormal columns times mild random scales.
  const Eigen::MatrixXd Q = orthonormal_columns(rng, d, d_e);
  Eigen::VectorXd scales(d_e);
  for (int j = 0; j < d_e; ++j) scales[j] = rng.uniform(0.8, 1.2);
  truth.M = Q * scales.asDiagonal();

  // Attribute labels from the root-to-leaf chain of planted weights.
  Eigen::MatrixXi labels = Eigen::MatrixXi::Zero(C, A);
  for (NodeId leaf = 1; leaf <= C; ++leaf) {
    Eigen::VectorXd chain = truth.B.col(leaf - 1);
    for (NodeId anc : taxonomy.ancestors(leaf))
      if (!taxonomy.is_root(anc)) chain += truth.B.col(anc - 1);
    for (int a = 0; a < A; ++a)
      if (chain[a] > 0.0) labels(leaf - 1, a) = 1;
  }

  std::vector<std::string> attr_names;
  const int attr_width = std::max(3, static_cast<int>(std::to_string(A).size()));
  for (int a = 1; a <= A; ++a) attr_names.push_back(padded("attr_", a, attr_width));

  Dataset dataset;
  dataset.taxonomy = taxonomy;
  dataset.attributes = AttributeTable(std::move(attr_names), std::move(labels));

  dataset.X.resize(static_cast<Eigen::Index>(C) * n_per_class, d);
  dataset.y.resize(static_cast<Eigen::Index>(C) * n_per_class);
  Eigen::Index row = 0;
  for (NodeId leaf = 1; leaf <= C; ++leaf) {
    for (int i = 0; i < n_per_class; ++i, ++row) {
      Eigen::VectorXd u = truth.U_cat.col(leaf - 1);
      if (sigma_n > 0.0) u += sigma_n * rng.normal_vector(d_e);
      const Eigen::VectorXd x = truth.M * u;
      for (int j = 0; j < d; ++j)
        dataset.X(row, j) = static_cast<double>(static_cast<float>(x[j]));
      dataset.y[row] = leaf;
    }
  }
  dataset.validate();
  return {std::move(dataset), std::move(truth)};
}

// Scored per column with either a positive planted weight or a learned
// weight above threshold; columns empty on both sides (roots, or every
// column at k_star = 0) count as perfect and are skipped from the mean.
double support_f1(const Eigen::MatrixXd& B_learned, const PlantedTruth& truth, double threshold) {
  if (B_learned.rows() != truth.B.rows() || B_learned.cols() != truth.B.cols())
    throw ValidationError("support_f1: shape mismatch with planted truth");

  const int A = static_cast<int>(truth.B.rows());
  double sum = 0.0;
  int counted = 0;
  for (Eigen::Index c = 0; c < truth.B.cols(); ++c) {
    int tp = 0, fp = 0, fn = 0;
    for (int a = 0; a < A; ++a) {
      const bool pred = B_learned(a, c) > threshold;
      const bool planted = truth.B(a, c) > 0.0;
      if (pred && planted) ++tp;
      if (pred && !planted) ++fp;
      if (!pred && planted) ++fn;
    }
    if (tp + fp + fn == 0) continue;
    sum += 2.0 * tp / (2.0 * tp + fp + fn);
    ++counted;
  }
  return counted > 0 ? sum / counted : 1.0;
}

}  // namespace useembed
