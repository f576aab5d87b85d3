#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "useembed/dataset.hpp"
#include "useembed/model.hpp"
#include "useembed/solver.hpp"

namespace useembed {

// Any classifier that orders all leaf categories for a feature vector.
using Ranker = std::function<std::vector<NodeId>(const Eigen::VectorXd&)>;

Ranker make_ranker(const EmbeddingModel& model);
Ranker make_ranker(const RidgeModel& model);

// Fraction of instances whose true leaf is among the first k predictions.
// k is clamped to the leaf count (with a warning appended when given).
double flat_hit_at_k(const Ranker& ranker, const Dataset& dataset, int k,
                     std::vector<std::string>* warnings = nullptr);
double flat_hit_at_k(const EmbeddingModel& model, const Dataset& dataset, int k);

// Precision of the top-k predictions against the correct-set of every
// non-root level of the true label (the leaf itself plus its non-root
// ancestors): per level, |top-k  leaves_under(level)| / min(k, |leaves_under|),
// averaged over levels, then over instances.
double hierarchical_precision_at_k(const Ranker& ranker, const Dataset& dataset, int k,
                                   std::vector<std::string>* warnings = nullptr);
double hierarchical_precision_at_k(const EmbeddingModel& model, const Dataset& dataset, int k);

struct EvalReport {
  struct PerClass {
    NodeId id = kNoNode;
    std::string name;
    int count = 0;
    double accuracy = 0.0;  // hit@1 within the class
  };

  int n_test = 0;
  std::vector<std::pair<int, double>> flat_hit;        // (k, value)
  std::vector<std::pair<int, double>> hier_precision;  // (k, value)
  std::vector<PerClass> per_class;
  std::vector<std::string> warnings;

  std::string to_json() const;
  std::string to_text() const;  // aligned table
};

EvalReport evaluate(const Ranker& ranker, const Dataset& dataset,
                    const std::vector<int>& flat_ks, const std::vector<int>& hier_ks);

}  // namespace useembed
