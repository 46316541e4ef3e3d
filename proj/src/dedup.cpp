#include "agenteval/dedup.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "agenteval/errors.hpp"
#include "agenteval/util.hpp"

namespace agenteval {

void check_dedup_config(const DedupConfig& cfg) {
  if (!(cfg.tau > 0.0 && cfg.tau <= 1.0)) {
    throw PreconditionError("tau must lie in (0, 1], got " + std::to_string(cfg.tau));
  }
}

nlohmann::ordered_json dedup_report_to_json(const DedupReport& report) {
  nlohmann::ordered_json j;
  j["tau"] = report.tau;
  j["provider"] = report.provider;
  j["clusters"] = nlohmann::ordered_json::array();
  for (const auto& c : report.clusters) {
    j["clusters"].push_back({{"representative", c.representative}, {"members", c.members}});
  }
  j["dropped_count"] = report.dropped_count;
  return j;
}

double cosine_similarity(std::span<const double> v, std::span<const double> w) {
  if (v.size() != w.size()) throw PreconditionError("cosine_similarity: dimension mismatch");
  double dot = 0.0;
  double vv = 0.0;
  double ww = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    dot += v[i] * w[i];
    vv += v[i] * v[i];
    ww += w[i] * w[i];
  }
  if (vv == 0.0 || ww == 0.0) throw PreconditionError("cosine_similarity: zero vector");
  return std::clamp(dot / (std::sqrt(vv) * std::sqrt(ww)), -1.0, 1.0);
}

DescriptionSimilarity::DescriptionSimilarity(std::span<const Criterion> universe, EmbeddingProvider& provider) {
  std::vector<std::string> texts;
  for (const auto& c : universe) {
    if (ids_.emplace(c.description, texts.size()).second) texts.push_back(c.description);
  }
  size_ = texts.size();
  matrix_.assign(size_ * size_, 1.0);
  if (size_ < 2) return;
  const auto vectors = provider.embed({texts, {}});
  for (std::size_t a = 0; a < size_; ++a) {
    for (std::size_t b = a + 1; b < size_; ++b) {
      const double s = cosine_similarity(vectors[a], vectors[b]);
      matrix_[a * size_ + b] = s;
      matrix_[b * size_ + a] = s;
    }
  }
}

std::size_t DescriptionSimilarity::id_of(std::string_view description) const {
  auto it = ids_.find(std::string(description));
  if (it == ids_.end()) throw PreconditionError("description not in similarity universe");
  return it->second;
}

ClusterAssignment cluster_criteria(std::span<const Criterion> items, double tau, const DescriptionSimilarity& sim) {
  const std::size_t n = items.size();
  std::vector<std::string> folded(n);
  std::vector<std::size_t> desc(n);
  for (std::size_t i = 0; i < n; ++i) {
    folded[i] = fold(items[i].name);
    desc[i] = sim.id_of(items[i].description);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return folded[a] < folded[b]; });

  ClusterAssignment out;
  out.cluster_of.assign(n, 0);
  std::vector<std::size_t> founders;
  for (std::size_t i : order) {
    std::optional<std::size_t> home;
    for (std::size_t f : founders) {
      if (folded[f] == folded[i]) {
        home = f;
        break;
      }
    }
    if (!home) {
      for (std::size_t f : founders) {
        if (sim.between(desc[f], desc[i]) > tau) {
          home = f;
          break;
        }
      }
    }
    if (home) {
      out.cluster_of[i] = *home;
    } else {
      founders.push_back(i);
      out.cluster_of[i] = i;
    }
  }
  out.representatives = std::move(founders);
  std::sort(out.representatives.begin(), out.representatives.end());
  return out;
}

std::pair<CriteriaSet, DedupReport> dedup_criteria(const CriteriaSet& cs, const DedupConfig& cfg,
                                                   EmbeddingProvider& provider) {
  check_dedup_config(cfg);
  validate(cs);
  const DescriptionSimilarity sim(cs.criteria, provider);
  const ClusterAssignment assignment = cluster_criteria(cs.criteria, cfg.tau, sim);

  CriteriaSet out;
  out.task_name = cs.task_name;
  out.provenance = cs.provenance;
  DedupReport report;
  report.tau = cfg.tau;
  report.provider = provider.id();
  for (std::size_t rep : assignment.representatives) {
    out.criteria.push_back(cs.criteria[rep]);
    DedupCluster cluster{cs.criteria[rep].name, {}};
    for (std::size_t i = 0; i < cs.criteria.size(); ++i) {
      if (assignment.cluster_of[i] == rep) cluster.members.push_back(cs.criteria[i].name);
    }
    report.clusters.push_back(std::move(cluster));
  }
  report.dropped_count = cs.criteria.size() - assignment.representatives.size();
  return {std::move(out), std::move(report)};
}

}  // namespace agenteval
