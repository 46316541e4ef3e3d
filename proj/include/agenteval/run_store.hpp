#pragma once
// Run directories: {dir}/{run_id}/manifest.json plus one file per artifact.
// The manifest records each artifact's kind and SHA-256 so it alone is enough
// to reload and integrity-check the run.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "agenteval/criteria.hpp"
#include "agenteval/records.hpp"
#include "agenteval/samples.hpp"
#include "json.hpp"

namespace agenteval {

struct RunArtifact {
  std::string name;  // relative path inside the run directory
  std::string kind;
  std::string content;

  friend bool operator==(const RunArtifact&, const RunArtifact&) = default;
};

struct RunBundle {
  std::string run_id;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  std::vector<RunArtifact> artifacts;

  // Replaces an artifact of the same name, otherwise appends.
  void put(std::string name, std::string kind, std::string content);
  const RunArtifact* find(std::string_view name) const;
  bool has(std::string_view name) const { return find(name) != nullptr; }
  // Throws Error("missing artifact <name>").
  const std::string& require(std::string_view name) const;

  void put_criteria(std::string name, const CriteriaSet& cs);
  void put_records(std::string name, const std::vector<QuantifiedRecord>& records);
  void put_samples(std::string name, const std::vector<TaskSample>& samples);
  void put_json(std::string name, std::string kind, const nlohmann::ordered_json& j);

  CriteriaSet criteria(std::string_view name) const;
  std::vector<QuantifiedRecord> records(std::string_view name) const;
  std::vector<TaskSample> samples(std::string_view name) const;

  friend bool operator==(const RunBundle&, const RunBundle&) = default;
};

inline constexpr std::string_view kManifestName = "manifest.json";

std::string serialize_manifest(const RunBundle& run);

// Writes {dir}/{run_id}/ and returns the manifest path. Refuses to replace an
// existing run unless overwrite is set.
std::filesystem::path save_run(const RunBundle& run, const std::filesystem::path& dir,
                               bool overwrite = false);

// Accepts the manifest path or its directory; verifies every digest.
RunBundle load_run(const std::filesystem::path& manifest_or_dir);

}  // namespace agenteval
