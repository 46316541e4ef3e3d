#include "agenteval/run_store.hpp"

#include <algorithm>
#include <cctype>

#include "agenteval/errors.hpp"
#include "agenteval/util.hpp"

namespace agenteval {

namespace fs = std::filesystem;

namespace {

bool safe_run_id(std::string_view id) {
  if (id.empty() || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
  });
}

bool safe_artifact_name(std::string_view name) {
  if (name.empty() || name.front() == '/' || name == kManifestName) return false;
  const fs::path p{std::string(name)};
  return std::none_of(p.begin(), p.end(), [](const fs::path& part) { return part == ".."; });
}

}  // namespace

void RunBundle::put(std::string name, std::string kind, std::string content) {
  for (auto& a : artifacts) {
    if (a.name == name) {
      a.kind = std::move(kind);
      a.content = std::move(content);
      return;
    }
  }
  artifacts.push_back({std::move(name), std::move(kind), std::move(content)});
}

const RunArtifact* RunBundle::find(std::string_view name) const {
  for (const auto& a : artifacts) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

const std::string& RunBundle::require(std::string_view name) const {
  const auto* a = find(name);
  if (a == nullptr) throw Error("missing artifact " + std::string(name));
  return a->content;
}

void RunBundle::put_criteria(std::string name, const CriteriaSet& cs) {
  put(std::move(name), "criteria", serialize_criteria(cs));
}

void RunBundle::put_records(std::string name, const std::vector<QuantifiedRecord>& records) {
  put(std::move(name), "quantified", serialize_records(records));
}

void RunBundle::put_samples(std::string name, const std::vector<TaskSample>& samples) {
  put(std::move(name), "samples", serialize_samples(samples));
}

void RunBundle::put_json(std::string name, std::string kind, const nlohmann::ordered_json& j) {
  put(std::move(name), std::move(kind), j.dump(2) + "\n");
}

CriteriaSet RunBundle::criteria(std::string_view name) const { return parse_criteria(require(name)); }

std::vector<QuantifiedRecord> RunBundle::records(std::string_view name) const {
  return parse_records(require(name));
}

std::vector<TaskSample> RunBundle::samples(std::string_view name) const {
  return parse_samples(require(name));
}

std::string serialize_manifest(const RunBundle& run) {
  nlohmann::ordered_json j;
  j["run_id"] = run.run_id;
  j["parameters"] = run.parameters;
  j["artifacts"] = nlohmann::ordered_json::array();
  for (const auto& a : run.artifacts) {
    nlohmann::ordered_json aj;
    aj["name"] = a.name;
    aj["kind"] = a.kind;
    aj["sha256"] = sha256_hex(a.content);
    aj["bytes"] = a.content.size();
    j["artifacts"].push_back(std::move(aj));
  }
  return j.dump(2) + "\n";
}

fs::path save_run(const RunBundle& run, const fs::path& dir, bool overwrite) {
  if (!safe_run_id(run.run_id)) throw Error("invalid run id \"" + run.run_id + "\"");
  for (const auto& a : run.artifacts) {
    if (!safe_artifact_name(a.name)) throw Error("invalid artifact name \"" + a.name + "\"");
  }
  const fs::path run_dir = dir / run.run_id;
  std::error_code ec;
  if (fs::exists(run_dir / kManifestName, ec)) {
    if (!overwrite) throw IoError("run \"" + run.run_id + "\" already exists in " + dir.string());
    fs::remove_all(run_dir, ec);
    if (ec) throw IoError("cannot replace " + run_dir.string() + ": " + ec.message());
  }
  for (const auto& a : run.artifacts) write_file_atomic(run_dir / a.name, a.content);
  const fs::path manifest = run_dir / kManifestName;
  write_file_atomic(manifest, serialize_manifest(run));
  return manifest;
}

RunBundle load_run(const fs::path& manifest_or_dir) {
  fs::path manifest = manifest_or_dir;
  if (fs::is_directory(manifest)) manifest /= kManifestName;
  const std::string text = read_file(manifest);
  const auto j = nlohmann::ordered_json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw FormatError("malformed manifest " + manifest.string());
  RunBundle run;
  try {
    run.run_id = j.at("run_id").get<std::string>();
    run.parameters = j.value("parameters", nlohmann::ordered_json::object());
    for (const auto& aj : j.at("artifacts")) {
      RunArtifact a;
      a.name = aj.at("name").get<std::string>();
      a.kind = aj.at("kind").get<std::string>();
      if (!safe_artifact_name(a.name)) throw FormatError("invalid artifact name " + a.name);
      a.content = read_file(manifest.parent_path() / a.name);
      if (sha256_hex(a.content) != aj.at("sha256").get<std::string>()) {
        throw IntegrityError("digest mismatch for artifact " + a.name);
      }
      run.artifacts.push_back(std::move(a));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed manifest " + manifest.string() + ": " + e.what());
  }
  return run;
}

}  // namespace agenteval
