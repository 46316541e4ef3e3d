#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "agenteval/analytics.hpp"
#include "agenteval/context.hpp"
#include "agenteval/critic.hpp"
#include "agenteval/dedup.hpp"
#include "agenteval/errors.hpp"
#include "agenteval/parallel.hpp"
#include "agenteval/perturb.hpp"
#include "agenteval/quantifier.hpp"
#include "agenteval/report.hpp"
#include "agenteval/run_store.hpp"
#include "agenteval/util.hpp"
#include "agenteval/verifier.hpp"
#include "json.hpp"

namespace agenteval::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --config FILE: a JSON object whose keys are long flag names (without the
// dashes). Flat keys belong to the subcommand being run; nested objects
// address a subcommand explicitly.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(std::string subcommand) : subcommand_(std::move(subcommand)) {}

  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const CLI::Option* opt : app->get_options({})) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string name = opt->get_lnames().front();
      if (opt->count() > 0) {
        const auto& res = opt->results();
        j[name] = res.size() == 1 ? nlohmann::ordered_json(res.front()) : nlohmann::ordered_json(res);
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    return j.dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      input >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    std::vector<std::string> root;
    if (!subcommand_.empty()) root.push_back(subcommand_);
    collect(j, root, items);
    return items;
  }

 private:
  std::string subcommand_;

  static std::string scalar(const nlohmann::json& v, const std::string& name) {
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return v.dump();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
      return v.dump();
    }
    if (v.is_string()) return v.get<std::string>();
    throw CLI::ConversionError("unsupported value for " + name);
  }

  static void collect(const nlohmann::json& j, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto sub = std::vector<std::string>{};
        sub.push_back(key);
        collect(value, sub, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v, key));
      } else {
        item.inputs.push_back(scalar(value, key));
      }
      items.push_back(std::move(item));
    }
  }
};

struct Common {
  std::string backend = "mock:hash";
  std::string model = "gpt-4-0613";
  std::string embed_model = "lexical";
  std::string cache_dir;
  std::string prompt_dir;
  std::size_t parallelism = 4;
  std::uint64_t seed_base = 0;
};

const CLI::Validator kTauRange(
    [](std::string& s) -> std::string {
      double v = 0.0;
      if (!CLI::detail::lexical_cast(s, v) || !(v > 0.0 && v <= 1.0)) return "tau must lie in (0, 1]";
      return {};
    },
    "(0,1]");

const CLI::Validator kFractionRange(
    [](std::string& s) -> std::string {
      double v = 0.0;
      if (!CLI::detail::lexical_cast(s, v) || !(v > 0.0 && v < 1.0)) return "fraction must lie in (0, 1)";
      return {};
    },
    "(0,1)");

const CLI::Validator kPositive(
    [](std::string& s) -> std::string {
      double v = 0.0;
      if (!CLI::detail::lexical_cast(s, v) || !(v > 0.0)) return "value must be > 0";
      return {};
    },
    "POSITIVE");

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--backend", c.backend, "mock:hash | mock:<fixture_dir> | openai:<base_url>")
      ->capture_default_str()
      ->multi_option_policy(CLI::MultiOptionPolicy::Throw);
  sub->add_option("--model", c.model, "chat model name")->capture_default_str();
  sub->add_option("--embed-model", c.embed_model, "embedding model for openai backends, or 'lexical'")
      ->capture_default_str();
  sub->add_option("--cache-dir", c.cache_dir, "on-disk response cache directory");
  sub->add_option("--prompt-dir", c.prompt_dir, "prompt template directory");
  sub->add_option("--parallelism", c.parallelism, "concurrent backend requests")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--seed-base", c.seed_base, "base for all seeds (critic base+i, perturb base)")
      ->capture_default_str();
}

std::shared_ptr<ChatBackend> make_backend(const Common& c) {
  std::shared_ptr<ChatBackend> backend;
  if (c.backend == "mock:hash") {
    backend = std::make_shared<HashMockBackend>();
  } else if (c.backend.rfind("mock:", 0) == 0) {
    const fs::path dir = c.backend.substr(5);
    if (!fs::is_directory(dir)) throw UsageError("fixture directory not found: " + dir.string());
    backend = std::make_shared<ScriptedMockBackend>(dir);
  } else if (c.backend.rfind("openai:", 0) == 0) {
    OpenAiConfig oc;
    oc.base_url = c.backend.substr(7);
    backend = std::make_shared<OpenAiChatClient>(oc);
  } else {
    throw UsageError("unknown backend: " + c.backend);
  }
  if (!c.cache_dir.empty()) backend = std::make_shared<CachingBackend>(backend, c.cache_dir);
  return backend;
}

std::unique_ptr<EmbeddingProvider> make_embedder(const Common& c) {
  if (c.embed_model == "lexical") return std::make_unique<LexicalEmbedding>();
  if (c.backend.rfind("openai:", 0) != 0) throw UsageError("--embed-model needs an openai backend");
  OpenAiConfig oc;
  oc.base_url = c.backend.substr(7);
  oc.embed_model = c.embed_model;
  return std::make_unique<OpenAiEmbeddingClient>(oc);
}

AgentContext make_context(const Common& c) {
  AgentContext ctx;
  ctx.chat = make_backend(c);
  ctx.prompts = std::make_shared<const PromptLibrary>(c.prompt_dir.empty() ? PromptLibrary::from_default_location()
                                                                           : PromptLibrary(c.prompt_dir));
  ctx.model = c.model;
  ctx.parallelism = c.parallelism;
  return ctx;
}

CriticMode parse_mode(const std::string& s) {
  if (s == "task_based") return CriticMode::kTaskBased;
  if (s == "solution_based") return CriticMode::kSolutionBased;
  throw UsageError("unknown critic mode: " + s);
}

// A single criteria document, or one set per line.
std::vector<CriteriaSet> load_criteria_sets(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return {parse_criteria(text)};
  } catch (const FormatError&) {
    return parse_criteria_lines(text);
  }
}

CriteriaSet load_single_criteria(const fs::path& path) {
  const auto sets = load_criteria_sets(path);
  if (sets.size() != 1) throw FormatError(path.string() + ": expected one criteria set");
  return sets.front();
}

fs::path sibling(const fs::path& out, const std::string& suffix) { return fs::path(out.string() + suffix); }

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Task-utility assessment of LLM-powered applications", "agenteval"};
  app.require_subcommand(1);
  std::string chosen;
  for (const auto& a : args) {
    if (a == "criticize" || a == "summarize" || a == "dedup" || a == "quantify" || a == "perturb" || a == "verify" ||
        a == "report") {
      chosen = a;
      break;
    }
  }
  app.config_formatter(std::make_shared<JsonConfig>(chosen));
  app.set_config("--config", "", "JSON file supplying any flag; command-line flags take precedence");
  app.fallthrough();
  app.option_defaults()->always_capture_default();

  Common common;

  // criticize
  std::string task_file, samples_file, criteria_file, out_path, mode = "task_based";
  int runs = 50, examples = 2, seeds = 18;
  double tau = 0.85, fraction = 0.25, cv_threshold = 0.5;
  std::size_t bucket_size = 0;
  bool no_llm = false, allow_adversarial_fail = false, overwrite = false, dedup_first = false;
  std::string run_id = "verify", run_dir, runs_dir = "runs";

  auto* criticize = app.add_subcommand("criticize", "generate criteria sets over consecutive seeds");
  add_common(criticize, common);
  criticize->add_option("--task-file", task_file, "task JSON")->required()->check(CLI::ExistingFile);
  criticize->add_option("--samples", samples_file, "samples JSONL (examples for solution_based)")
      ->check(CLI::ExistingFile);
  criticize->add_option("--mode", mode, "task_based | solution_based")
      ->capture_default_str()
      ->check(CLI::IsMember({"task_based", "solution_based"}));
  criticize->add_option("--runs", runs, "critic runs")->capture_default_str()->check(CLI::PositiveNumber);
  criticize->add_option("--examples", examples, "examples per solution_based prompt")->capture_default_str();
  criticize->add_option("--out", out_path, "output JSONL, one criteria set per run")->required();

  auto* summarize = app.add_subcommand("summarize", "consolidate criteria sets into one");
  add_common(summarize, common);
  summarize->add_option("--task-file", task_file, "task JSON")->required()->check(CLI::ExistingFile);
  summarize->add_option("--criteria", criteria_file, "criteria JSON or JSONL of sets")
      ->required()
      ->check(CLI::ExistingFile);
  summarize->add_flag("--no-llm", no_llm, "union by exact name only");
  summarize->add_option("--out", out_path, "output criteria JSON")->required();

  auto* dedup = app.add_subcommand("dedup", "merge semi-identical criteria");
  add_common(dedup, common);
  dedup->add_option("--criteria", criteria_file, "criteria JSON")->required()->check(CLI::ExistingFile);
  dedup->add_option("--tau", tau, "similarity threshold in (0,1]")->capture_default_str()->check(kTauRange);
  dedup->add_option("--out", out_path, "output criteria JSON (report written beside it)")->required();

  auto* quantify = app.add_subcommand("quantify", "score samples against criteria over seeds 1..N");
  add_common(quantify, common);
  quantify->add_option("--task-file", task_file, "task JSON")->check(CLI::ExistingFile);
  quantify->add_option("--criteria", criteria_file, "criteria JSON")->required()->check(CLI::ExistingFile);
  quantify->add_option("--samples", samples_file, "samples JSONL")->required()->check(CLI::ExistingFile);
  quantify->add_option("--seeds", seeds, "quantifier seeds")->capture_default_str()->check(CLI::PositiveNumber);
  quantify->add_option("--bucket-size", bucket_size, "criteria per prompt, 0 = all")->capture_default_str();
  quantify->add_option("--out", out_path, "output quantified JSONL")->required();

  auto* perturb = app.add_subcommand("perturb", "write disturbed copies of samples");
  add_common(perturb, common);
  perturb->add_option("--samples", samples_file, "samples JSONL")->required()->check(CLI::ExistingFile);
  perturb->add_option("--fraction", fraction, "fraction of units removed")
      ->capture_default_str()
      ->check(kFractionRange);
  perturb->add_option("--out", out_path, "output disturbed JSONL")->required();

  auto* verify_cmd = app.add_subcommand("verify", "run the whole verification pipeline");
  add_common(verify_cmd, common);
  verify_cmd->add_option("--task-file", task_file, "task JSON")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--samples", samples_file, "samples JSONL")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--out", runs_dir, "directory holding run directories")->capture_default_str();
  verify_cmd->add_option("--run-id", run_id, "run directory name")->capture_default_str();
  verify_cmd->add_flag("--overwrite", overwrite, "replace an existing run directory");
  verify_cmd->add_option("--runs", runs, "critic runs")->capture_default_str()->check(CLI::PositiveNumber);
  verify_cmd->add_option("--seeds", seeds, "quantifier seeds")->capture_default_str()->check(CLI::Range(2, 1 << 20));
  verify_cmd->add_option("--tau", tau, "similarity threshold in (0,1]")->capture_default_str()->check(kTauRange);
  verify_cmd->add_option("--cv-threshold", cv_threshold, "keep criteria with mean CV <= this")
      ->capture_default_str()
      ->check(kPositive);
  verify_cmd->add_option("--fraction", fraction, "fraction of units removed")
      ->capture_default_str()
      ->check(kFractionRange);
  verify_cmd->add_flag("--allow-adversarial-fail", allow_adversarial_fail,
                       "keep criteria that fail the adversarial check (annotated)");
  verify_cmd->add_option("--mode", mode, "task_based | solution_based")
      ->capture_default_str()
      ->check(CLI::IsMember({"task_based", "solution_based"}));
  verify_cmd->add_option("--examples", examples, "examples per solution_based prompt")->capture_default_str();
  verify_cmd->add_option("--bucket-size", bucket_size, "criteria per prompt, 0 = all")->capture_default_str();
  verify_cmd->add_flag("--dedup-first", dedup_first, "similarity dedup before the summary instead of after");

  auto* report = app.add_subcommand("report", "re-render reports/ of a saved run");
  add_common(report, common);
  report->add_option("--run", run_dir, "run directory or its manifest.json")->required()->check(CLI::ExistingPath);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (criticize->parsed()) {
      const TaskSpec task = load_task(task_file);
      std::vector<TaskSample> samples;
      if (!samples_file.empty()) samples = load_samples(samples_file);
      CriticConfig cfg;
      cfg.mode = parse_mode(mode);
      cfg.runs = runs;
      cfg.examples_per_prompt = examples;
      cfg.seed_base = common.seed_base;
      if (cfg.mode == CriticMode::kSolutionBased && samples.empty()) {
        throw UsageError("solution_based mode needs --samples");
      }
      const AgentContext ctx = make_context(common);
      const CriticBatch batch = run_critic_batch(task, samples, cfg, ctx);
      write_file_atomic(out_path, serialize_criteria_lines(batch.sets));
      write_file_atomic(sibling(out_path, ".audit.jsonl"), serialize_audit(batch.audit));
      out << batch.sets.size() << " criteria sets written to " << out_path << " (" << batch.failures.size()
          << " failed runs)\n";
    } else if (summarize->parsed()) {
      const TaskSpec task = load_task(task_file);
      const auto sets = load_criteria_sets(criteria_file);
      std::optional<AgentContext> ctx;
      if (!no_llm) ctx = make_context(common);
      const SummaryResult r = summarize_criteria(sets, task, ctx ? &*ctx : nullptr, common.seed_base);
      write_file_atomic(out_path, serialize_criteria(r.criteria));
      write_file_atomic(sibling(out_path, ".audit.jsonl"), serialize_audit(r.audit));
      out << r.criteria.criteria.size() << " criteria written to " << out_path << "\n";
    } else if (dedup->parsed()) {
      const CriteriaSet cs = load_single_criteria(criteria_file);
      const auto embedder = make_embedder(common);
      const auto [merged, rep] = dedup_criteria(cs, {tau}, *embedder);
      write_file_atomic(out_path, serialize_criteria(merged));
      const fs::path report_path = fs::path(out_path).parent_path() / "dedup_report.json";
      write_file_atomic(report_path, dedup_report_to_json(rep).dump(2) + "\n");
      out << merged.criteria.size() << " criteria kept, " << rep.dropped_count << " merged\n";
    } else if (quantify->parsed()) {
      const CriteriaSet cs = load_single_criteria(criteria_file);
      const auto samples = load_samples(samples_file);
      TaskSpec task;
      if (!task_file.empty()) {
        task = load_task(task_file);
      } else {
        task.name = cs.task_name;
        task.description = cs.task_name;
      }
      QuantifyConfig qc;
      qc.seeds = seeds;
      qc.bucket_size = bucket_size;
      const AgentContext ctx = make_context(common);
      const auto records = sweep_seeds(task, cs, samples, qc, ctx);
      write_file_atomic(out_path, serialize_records(records));
      out << records.size() << " records written to " << out_path << ", invalid rate "
          << format_fixed6(invalid_fraction(records)) << "\n";
    } else if (perturb->parsed()) {
      const auto samples = load_samples(samples_file);
      const auto disturbed = disturb_corpus(samples, {fraction, common.seed_base});
      write_file_atomic(out_path, serialize_samples(disturbed));
      out << disturbed.size() << " disturbed samples written to " << out_path << "\n";
    } else if (verify_cmd->parsed()) {
      const TaskSpec task = load_task(task_file);
      const auto samples = load_samples(samples_file);
      VerifierConfig cfg;
      cfg.critic_runs = runs;
      cfg.quantifier_seeds = seeds;
      cfg.tau = tau;
      cfg.cv_threshold = cv_threshold;
      cfg.disturb_fraction = fraction;
      cfg.require_adversarial_pass = !allow_adversarial_fail;
      cfg.critic_mode = parse_mode(mode);
      cfg.examples_per_prompt = examples;
      cfg.seed_base = common.seed_base;
      cfg.bucket_size = bucket_size;
      cfg.dedup_before_summary = dedup_first;
      const AgentContext ctx = make_context(common);
      const auto embedder = make_embedder(common);
      const auto outcome = verify(task, samples, cfg, ctx, *embedder, runs_dir, run_id, overwrite);
      for (const auto& v : outcome.verified.verdicts) out << v.criterion << ": " << to_string(v.kind) << "\n";
      out << "run written to " << outcome.manifest->parent_path().string() << "\n";
    } else if (report->parsed()) {
      RunBundle run = load_run(run_dir);
      const auto embedder = make_embedder(common);
      attach_report(run, render(run, *embedder));
      fs::path dir = fs::path(run_dir);
      if (dir.filename() == kManifestName) dir = dir.parent_path();
      dir = fs::absolute(dir).lexically_normal();
      if (dir.filename().empty()) dir = dir.parent_path();
      if (dir.filename() != run.run_id) throw UsageError("run directory name does not match its run id");
      save_run(run, dir.parent_path(), true);
      out << "reports written to " << (dir / "reports").string() << "\n";
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Cancelled&) {
    err << "cancelled\n";
    return kExitPipeline;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitPipeline;
  }
  return kExitOk;
}

}  // namespace agenteval::cli
