#pragma once
// Report rendering: plot-data CSVs and a markdown summary computed from the
// artifacts of a run, written under reports/ with their own digest manifest.

#include <string>
#include <string_view>
#include <vector>

#include "agenteval/gateway.hpp"
#include "agenteval/run_store.hpp"

namespace agenteval {

struct ReportBundle {
  std::vector<RunArtifact> tables;  // names without the reports/ prefix
  std::string summary;              // summary.md
  std::string manifest;             // reports/manifest.json
};

inline constexpr std::string_view kReportDir = "reports/";

// Requires criteria.json, samples.jsonl and quantified.jsonl; critic_runs.jsonl,
// quantified_disturbed.jsonl and verified.json are used when present, otherwise
// the matching tables carry the header only. Byte-deterministic.
ReportBundle render(const RunBundle& run, EmbeddingProvider& embedder);

// Adds reports/* to the run, replacing earlier ones.
void attach_report(RunBundle& run, const ReportBundle& report);

// Compares the digests in reports/manifest.json with the report artifacts;
// IntegrityError on any mismatch or missing file.
void check_report(const RunBundle& run);

// RFC 4180 field quoting.
std::string csv_field(std::string_view value);

}  // namespace agenteval
