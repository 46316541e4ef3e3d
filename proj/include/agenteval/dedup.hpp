#pragma once
// Merging of semi-identical criteria: criteria whose description embeddings
// have cosine similarity strictly greater than tau share one representative.

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "agenteval/criteria.hpp"
#include "agenteval/gateway.hpp"
#include "json.hpp"

namespace agenteval {

struct DedupConfig {
  double tau = 0.85;
};

// Throws PreconditionError unless 0 < tau <= 1.
void check_dedup_config(const DedupConfig& cfg);

struct DedupCluster {
  std::string representative;
  std::vector<std::string> members;  // includes the representative

  friend bool operator==(const DedupCluster&, const DedupCluster&) = default;
};

struct DedupReport {
  double tau = 0.0;
  std::string provider;
  std::vector<DedupCluster> clusters;
  std::size_t dropped_count = 0;
};

nlohmann::ordered_json dedup_report_to_json(const DedupReport& report);

// dot(v, w) / (|v| |w|), clamped to [-1, 1]. Throws on zero vectors or a
// dimension mismatch.
double cosine_similarity(std::span<const double> v, std::span<const double> w);

// Pairwise similarity of the distinct descriptions of a criteria universe,
// embedded with one provider call. Identical texts have similarity exactly 1.
class DescriptionSimilarity {
 public:
  DescriptionSimilarity(std::span<const Criterion> universe, EmbeddingProvider& provider);

  std::size_t id_of(std::string_view description) const;
  double between(std::size_t a, std::size_t b) const { return matrix_[a * size_ + b]; }
  std::size_t size() const { return size_; }

 private:
  std::unordered_map<std::string, std::size_t> ids_;
  std::size_t size_ = 0;
  std::vector<double> matrix_;
};

struct ClusterAssignment {
  std::vector<std::size_t> representatives;  // input indices, ascending
  std::vector<std::size_t> cluster_of;       // input index -> representative index
};

// Greedy leader clustering. Items are visited in case-folded name order (ties
// by input position); an item joins the first founded cluster whose founder
// has the same case-folded name, else the first whose founder's description
// similarity is > tau, else founds its own cluster.
ClusterAssignment cluster_criteria(std::span<const Criterion> items, double tau, const DescriptionSimilarity& sim);

std::pair<CriteriaSet, DedupReport> dedup_criteria(const CriteriaSet& cs, const DedupConfig& cfg,
                                                   EmbeddingProvider& provider);

}  // namespace agenteval
