#include "agenteval/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "agenteval/analytics.hpp"
#include "agenteval/critic.hpp"
#include "agenteval/errors.hpp"
#include "agenteval/perturb.hpp"
#include "agenteval/quantifier.hpp"
#include "agenteval/util.hpp"
#include "agenteval/verifier.hpp"

namespace agenteval {

namespace {

class Csv {
 public:
  explicit Csv(std::initializer_list<std::string_view> header) { row(header); }

  void row(std::initializer_list<std::string_view> fields) {
    bool first = true;
    for (const auto f : fields) {
      if (!first) text_ += ',';
      text_ += csv_field(f);
      first = false;
    }
    text_ += '\n';
  }

  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

std::string num(double v) { return format_fixed6(v); }
std::string num(const std::optional<double>& v) { return v ? format_fixed6(*v) : std::string{}; }
std::string cv_text(const CvValue& v) { return v ? format_fixed6(*v) : std::string("UNSTABLE"); }

CiOptions ci_options(const RunBundle& run) {
  CiOptions opts;
  const auto& p = run.parameters;
  if (p.contains("ci_method") && p["ci_method"] == "bootstrap") opts.method = CiMethod::kBootstrap;
  if (p.contains("seed_base") && p["seed_base"].is_number_unsigned()) opts.seed = p["seed_base"].get<std::uint64_t>();
  return opts;
}

template <typename T>
T param_or(const RunBundle& run, const char* key, T fallback) {
  const auto& p = run.parameters;
  if (!p.contains(key) || !p[key].is_number()) return fallback;
  return p[key].get<T>();
}

std::string utility_table(const std::vector<QuantifiedRecord>& records, const std::vector<TaskSample>& samples,
                          const CriteriaSet& cs, const CiOptions& opts) {
  Csv csv({"criterion", "group", "mean", "ci95", "n"});
  const bool flagged = !samples.empty() && std::all_of(samples.begin(), samples.end(), [](const TaskSample& s) {
    return s.is_successful.has_value();
  });
  if (flagged) {
    const auto cmp = group_comparison(records, samples, cs, opts);
    for (const auto& row : cmp.rows) {
      if (row.success) {
        csv.row({row.criterion, "success", num(row.success->mean), num(row.success->ci95),
                 std::to_string(row.success->count)});
      }
      if (row.fail) {
        csv.row({row.criterion, "fail", num(row.fail->mean), num(row.fail->ci95), std::to_string(row.fail->count)});
      }
    }
    return csv.text();
  }
  // No success flags: one pooled group.
  const auto assessments = utility_assessments(records, cs);
  for (const auto& c : cs.criteria) {
    std::vector<double> means;
    for (const auto& a : assessments) {
      const auto it = a.scores.find(c.name);
      if (it == a.scores.end() || it->second.empty()) continue;
      double sum = 0.0;
      for (int s : it->second) sum += s;
      means.push_back(sum / static_cast<double>(it->second.size()));
    }
    if (means.empty()) continue;
    csv.row({c.name, "all", num(mean_of(means)), num(ci95_half_width(means, opts)), std::to_string(means.size())});
  }
  return csv.text();
}

int covered_seed_prefix(const std::vector<QuantifiedRecord>& records) {
  std::set<std::uint64_t> seeds;
  for (const auto& r : records) seeds.insert(r.seed);
  int n = 0;
  while (seeds.contains(static_cast<std::uint64_t>(n + 1))) ++n;
  return n == static_cast<int>(seeds.size()) ? n : 0;
}

}  // namespace

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

ReportBundle render(const RunBundle& run, EmbeddingProvider& embedder) {
  const CriteriaSet cs = run.criteria("criteria.json");
  const auto samples = run.samples("samples.jsonl");
  const auto records = run.records("quantified.jsonl");
  const CiOptions opts = ci_options(run);

  ReportBundle out;
  out.tables.push_back({"utility_by_criterion.csv", "report_table", utility_table(records, samples, cs, opts)});

  std::set<std::uint64_t> seeds;
  for (const auto& r : records) seeds.insert(r.seed);

  Csv stability_csv({"criterion", "mean_cv", "samples_used", "invalid_rate"});
  std::optional<StabilityReport> stability;
  if (seeds.size() >= 2) {
    stability = stability_report(records, cs);
    for (const auto& c : stability->criteria) {
      stability_csv.row({c.criterion, cv_text(c.mean_cv), std::to_string(c.samples_used), num(c.invalid_rate)});
    }
  }
  out.tables.push_back({"stability.csv", "report_table", stability_csv.text()});

  Csv convergence_csv({"n_seeds", "delta"});
  if (const int max_seed = covered_seed_prefix(records); max_seed >= 2) {
    for (const auto& p : convergence_curve(records, cs, max_seed).points) {
      convergence_csv.row({std::to_string(p.n_seeds), num(p.delta)});
    }
  }
  out.tables.push_back({"convergence.csv", "report_table", convergence_csv.text()});

  Csv diversity_csv({"m", "mean_unique", "ci95"});
  std::size_t critic_runs = 0;
  if (const auto* a = run.find("critic_runs.jsonl")) {
    const auto sets = parse_criteria_lines(a->content);
    critic_runs = sets.size();
    if (!sets.empty()) {
      const DedupConfig dcfg{param_or(run, "tau", 0.85)};
      const auto curve = diversity_curve(sets, dcfg, embedder, param_or(run, "diversity_resamples", 50),
                                         param_or<std::uint64_t>(run, "seed_base", 0));
      for (const auto& p : curve.points) diversity_csv.row({std::to_string(p.m), num(p.mean_unique), num(p.ci95)});
    }
  }
  out.tables.push_back({"diversity.csv", "report_table", diversity_csv.text()});

  Csv disc_csv({"criterion", "mean_original", "mean_disturbed", "win_fraction", "passed"});
  if (const auto* a = run.find("quantified_disturbed.jsonl")) {
    const auto disturbed = parse_records(a->content);
    if (!disturbed.empty()) {
      std::set<std::string> present;
      for (const auto& r : disturbed) present.insert(fold(r.criterion));
      CriteriaSet subset = cs;
      subset.criteria.clear();
      for (const auto& c : cs.criteria) {
        if (present.contains(fold(c.name))) subset.criteria.push_back(c);
      }
      for (const auto& row : discriminative_power(records, disturbed, subset).rows) {
        disc_csv.row({row.criterion, num(row.mean_original), num(row.mean_disturbed), num(row.win_fraction),
                      row.passed ? "true" : "false"});
      }
    }
  }
  out.tables.push_back({"discriminative.csv", "report_table", disc_csv.text()});

  Csv verdict_csv({"criterion", "verdict", "mean_cv", "mean_original", "mean_disturbed", "annotation"});
  std::optional<VerifiedCriteriaSet> verified;
  nlohmann::json thresholds = run.parameters;
  if (const auto* a = run.find("verified.json")) {
    verified = parse_verified(a->content);
    const auto j = nlohmann::json::parse(a->content);
    if (j.contains("thresholds")) thresholds = j["thresholds"];
    for (const auto& v : verified->verdicts) {
      verdict_csv.row({v.criterion, to_string(v.kind), cv_text(v.mean_cv), num(v.mean_original),
                       num(v.mean_disturbed), v.annotation});
    }
  }
  out.tables.push_back({"verdicts.csv", "report_table", verdict_csv.text()});

  // summary.md
  std::size_t successful = 0;
  std::size_t failed = 0;
  for (const auto& s : samples) {
    if (s.is_successful) ++(*s.is_successful ? successful : failed);
  }
  std::string md;
  md += "# Task utility report: " + (cs.task_name.empty() ? std::string("(unnamed task)") : cs.task_name) + "\n\n";
  md += "- run: " + run.run_id + "\n";
  md += "- samples: " + std::to_string(samples.size()) + " (successful " + std::to_string(successful) + ", failed " +
        std::to_string(failed) + ", unflagged " + std::to_string(samples.size() - successful - failed) + ")\n";
  md += "- criteria: " + std::to_string(cs.criteria.size()) + "\n";
  md += "- seeds: " + std::to_string(seeds.size()) + "\n";
  if (critic_runs > 0) md += "- critic runs: " + std::to_string(critic_runs) + "\n";
  md += "- records: " + std::to_string(records.size()) + ", invalid rate " + num(invalid_fraction(records)) + "\n";

  md += "\n## Thresholds\n\n";
  const auto threshold_line = [&](const char* key) {
    if (!thresholds.contains(key)) return;
    const auto& v = thresholds[key];
    std::string text;
    if (v.is_boolean()) {
      text = v.get<bool>() ? "true" : "false";
    } else if (v.is_number_integer()) {
      text = std::to_string(v.get<long long>());
    } else if (v.is_number()) {
      text = num(v.get<double>());
    } else if (v.is_string()) {
      text = v.get<std::string>();
    } else {
      return;
    }
    md += std::string("- ") + key + ": " + text + "\n";
  };
  for (const char* key : {"cv_threshold", "tau", "disturb_fraction", "require_adversarial_pass", "quantifier_seeds",
                          "critic_runs", "seed_base"}) {
    threshold_line(key);
  }

  if (stability) {
    md += "\n## Stability\n\n| criterion | mean CV | invalid rate |\n|---|---|---|\n";
    for (const auto& c : stability->criteria) {
      md += "| " + c.criterion + " | " + cv_text(c.mean_cv) + " | " + num(c.invalid_rate) + " |\n";
    }
  }

  if (verified) {
    md += "\n## Verdicts\n\n";
    md += "Kept: ";
    bool any = false;
    for (const auto& v : verified->verdicts) {
      if (v.kind != VerdictKind::kKept) continue;
      md += std::string(any ? ", " : "") + v.criterion;
      any = true;
    }
    md += any ? "\n" : "(none)\n";
    md += "\nDropped:\n\n";
    bool dropped = false;
    for (const auto& v : verified->verdicts) {
      if (v.kind == VerdictKind::kKept) continue;
      dropped = true;
      md += "- " + v.criterion + ": " + std::string(to_string(v.kind));
      if (v.kind == VerdictKind::kDroppedUnstable) {
        md += " (mean CV " + cv_text(v.mean_cv) + ")";
      } else {
        md += " (original " + num(v.mean_original) + ", disturbed " + num(v.mean_disturbed) + ")";
      }
      md += "\n";
    }
    if (!dropped) md += "- none\n";
  }
  out.summary = std::move(md);

  nlohmann::ordered_json manifest;
  manifest["artifacts"] = nlohmann::ordered_json::array();
  const auto add = [&](const std::string& name, const std::string& content) {
    manifest["artifacts"].push_back({{"name", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
  };
  for (const auto& t : out.tables) add(t.name, t.content);
  add("summary.md", out.summary);
  out.manifest = manifest.dump(2) + "\n";
  return out;
}

void attach_report(RunBundle& run, const ReportBundle& report) {
  const std::string dir(kReportDir);
  for (const auto& t : report.tables) run.put(dir + t.name, t.kind, t.content);
  run.put(dir + "summary.md", "report_summary", report.summary);
  run.put(dir + "manifest.json", "report_manifest", report.manifest);
}

void check_report(const RunBundle& run) {
  const std::string dir(kReportDir);
  const auto* m = run.find(dir + "manifest.json");
  if (m == nullptr) throw IntegrityError("missing artifact reports/manifest.json");
  const auto j = nlohmann::json::parse(m->content, nullptr, false);
  if (j.is_discarded() || !j.contains("artifacts") || !j["artifacts"].is_array()) {
    throw IntegrityError("reports/manifest.json is malformed");
  }
  for (const auto& e : j["artifacts"]) {
    const std::string name = e.value("name", std::string{});
    const auto* a = run.find(dir + name);
    if (a == nullptr) throw IntegrityError("report manifest references missing artifact " + name);
    if (sha256_hex(a->content) != e.value("sha256", std::string{})) {
      throw IntegrityError("digest mismatch for reports/" + name);
    }
  }
}

}  // namespace agenteval
