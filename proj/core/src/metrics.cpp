#include "useembed/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unordered_set>

#include "useembed/errors.hpp"

namespace useembed {

Ranker make_ranker(const EmbeddingModel& model) {
  return [model](const Eigen::VectorXd& x) { return predict_ranked(model, x); };
}

Ranker make_ranker(const RidgeModel& model) {
  return [model](const Eigen::VectorXd& x) { return ridge_predict_ranked(model, x); };
}

namespace {

int clamp_k(int k, const Dataset& dataset, const char* metric,
            std::vector<std::string>* warnings) {
  if (k < 1) throw ValidationError(std::string(metric) + ": k must be >= 1");
  const int C = dataset.taxonomy.num_leaves();
  if (k > C) {
    if (warnings)
      warnings->push_back(std::string(metric) + ": k=" + std::to_string(k) +
                          " clamped to leaf count " + std::to_string(C));
    return C;
  }
  return k;
}

std::vector<std::vector<NodeId>> rank_all(const Ranker& ranker, const Dataset& dataset) {
  std::vector<std::vector<NodeId>> ranked(dataset.n());
  for (int i = 0; i < dataset.n(); ++i) ranked[i] = ranker(dataset.X.row(i).transpose());
  return ranked;
}

double flat_hit_from_ranked(const std::vector<std::vector<NodeId>>& ranked,
                            const Dataset& dataset, int k) {
  int hits = 0;
  for (int i = 0; i < dataset.n(); ++i) {
    const auto& r = ranked[i];
    const auto end = r.begin() + std::min<std::size_t>(k, r.size());
    if (std::find(r.begin(), end, dataset.y[i]) != end) ++hits;
  }
  return static_cast<double>(hits) / dataset.n();
}

double hier_precision_from_ranked(const std::vector<std::vector<NodeId>>& ranked,
                                  const Dataset& dataset, int k) {
  const Taxonomy& tax = dataset.taxonomy;
  double sum = 0.0;
  for (int i = 0; i < dataset.n(); ++i) {
    const NodeId y = dataset.y[i];
    // The leaf itself plus its non-root ancestors.
    std::vector<NodeId> levels{y};
    for (NodeId a : tax.ancestors(y))
      if (!tax.is_root(a)) levels.push_back(a);

    double level_sum = 0.0;
    for (NodeId level : levels) {
      const auto& correct = tax.leaves_under(level);
      int inter = 0;
      for (int r = 0; r < k; ++r)
        if (std::binary_search(correct.begin(), correct.end(), ranked[i][r])) ++inter;
      level_sum += static_cast<double>(inter) / std::min<int>(k, static_cast<int>(correct.size()));
    }
    sum += level_sum / levels.size();
  }
  return sum / dataset.n();
}

}  // namespace

double flat_hit_at_k(const Ranker& ranker, const Dataset& dataset, int k,
                     std::vector<std::string>* warnings) {
  if (dataset.n() == 0) throw ValidationError("flat_hit: empty dataset");
  k = clamp_k(k, dataset, "flat_hit", warnings);
  return flat_hit_from_ranked(rank_all(ranker, dataset), dataset, k);
}

double flat_hit_at_k(const EmbeddingModel& model, const Dataset& dataset, int k) {
  return flat_hit_at_k(make_ranker(model), dataset, k, nullptr);
}

double hierarchical_precision_at_k(const Ranker& ranker, const Dataset& dataset, int k,
                                   std::vector<std::string>* warnings) {
  if (dataset.n() == 0) throw ValidationError("hierarchical_precision: empty dataset");
  k = clamp_k(k, dataset, "hierarchical_precision", warnings);
  return hier_precision_from_ranked(rank_all(ranker, dataset), dataset, k);
}

double hierarchical_precision_at_k(const EmbeddingModel& model, const Dataset& dataset, int k) {
  return hierarchical_precision_at_k(make_ranker(model), dataset, k, nullptr);
}

EvalReport evaluate(const Ranker& ranker, const Dataset& dataset,
                    const std::vector<int>& flat_ks, const std::vector<int>& hier_ks) {
  if (dataset.n() == 0) throw ValidationError("evaluate: empty dataset");
  EvalReport report;
  report.n_test = dataset.n();

  const auto ranked = rank_all(ranker, dataset);
  for (int k : flat_ks) {
    const int kk = clamp_k(k, dataset, "flat_hit", &report.warnings);
    report.flat_hit.push_back({k, flat_hit_from_ranked(ranked, dataset, kk)});
  }
  for (int k : hier_ks) {
    const int kk = clamp_k(k, dataset, "hierarchical_precision", &report.warnings);
    report.hier_precision.push_back({k, hier_precision_from_ranked(ranked, dataset, kk)});
  }

  const int C = dataset.taxonomy.num_leaves();
  std::vector<int> count(C, 0), correct(C, 0);
  for (int i = 0; i < dataset.n(); ++i) {
    const int c = dataset.y[i] - 1;
    ++count[c];
    if (ranked[i][0] == dataset.y[i]) ++correct[c];
  }
  for (int c = 0; c < C; ++c) {
    EvalReport::PerClass pc;
    pc.id = c + 1;
    pc.name = dataset.taxonomy.name(c + 1);
    pc.count = count[c];
    pc.accuracy = count[c] > 0 ? static_cast<double>(correct[c]) / count[c] : 0.0;
    report.per_class.push_back(std::move(pc));
  }
  return report;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["n_test"] = n_test;
  for (const auto& [k, v] : flat_hit) j["flat_hit"][std::to_string(k)] = v;
  for (const auto& [k, v] : hier_precision) j["hierarchical_precision"][std::to_string(k)] = v;
  for (const auto& pc : per_class)
    j["per_class"].push_back(
        {{"id", pc.id}, {"name", pc.name}, {"count", pc.count}, {"accuracy", pc.accuracy}});
  j["warnings"] = warnings;
  return j.dump(2);
}

std::string EvalReport::to_text() const {
  std::ostringstream out;
  out << "n_test: " << n_test << "\n";
  out << std::fixed << std::setprecision(4);

  std::size_t name_width = 24;
  for (const auto& pc : per_class) name_width = std::max(name_width, pc.name.size() + 2);

  out << std::left << std::setw(name_width) << "metric" << std::right << std::setw(6) << "k"
      << std::setw(10) << "value" << "\n";
  for (const auto& [k, v] : flat_hit)
    out << std::left << std::setw(name_width) << "flat_hit" << std::right << std::setw(6) << k
        << std::setw(10) << v << "\n";
  for (const auto& [k, v] : hier_precision)
    out << std::left << std::setw(name_width) << "hierarchical_precision" << std::right
        << std::setw(6) << k << std::setw(10) << v << "\n";

  out << "\n"
      << std::left << std::setw(name_width) << "class" << std::right << std::setw(6) << "n"
      << std::setw(10) << "acc@1" << "\n";
  for (const auto& pc : per_class)
    out << std::left << std::setw(name_width) << pc.name << std::right << std::setw(6) << pc.count
        << std::setw(10) << pc.accuracy << "\n";

  for (const auto& w : warnings) out << "warning: " << w << "\n";
  return out.str();
}

}  // namespace useembed
