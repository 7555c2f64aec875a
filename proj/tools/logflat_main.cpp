#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "logflat/corpus.hpp"
#include "logflat/error.hpp"
#include "logflat/log.hpp"
#include "logflat/pipeline.hpp"

namespace {

using namespace logflat;

// Flag values; unset ones leave the config file's value alone.
struct Flags {
  std::optional<std::string> config;
  std::vector<std::string> inputs;
  std::optional<std::string> mode, out, format, chi, label, error_policy, report, null_fill, abbreviations;
  std::optional<double> pearson_threshold;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers, n_trees, tree_max_depth, max_categories;
  std::vector<std::string> time_columns, dict_paths;
  bool strict_timestamps = false, accept_merges = false, pseudo_labels = false, index_scale = false;
};

void add_run_flags(CLI::App* sub, Flags& f, bool selecting) {
  sub->add_option("input", f.inputs, "JSON-Lines input file(s)");
  sub->add_option("--config", f.config, "JSON config file");
  sub->add_option("--mode", f.mode, "local|global");
  sub->add_option("--error-policy", f.error_policy, "skip|abort");
  sub->add_option("--workers", f.workers, "worker threads");
  sub->add_option("--report", f.report, "report path (default: <out>/report.json or stdout)");
  sub->add_option("--null-fill", f.null_fill, "none|mean|median|sentinel:<value>");
  sub->add_option("--dict-paths", f.dict_paths, "paths forced to dictionary handling");
  sub->add_option("--time-columns", f.time_columns, "columns converted as timestamps regardless of shape");
  sub->add_flag("--strict-timestamps", f.strict_timestamps, "fail on unparseable timestamps");
  sub->add_option("--abbreviations", f.abbreviations, "extra short=long abbreviation file");
  if (sub->get_name() == "inspect") return;
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--format", f.format, "csv|jsonl");
  if (!selecting) return;
  sub->add_option("--pearson-threshold", f.pearson_threshold, "drop one of each pair with |r| at or above this");
  sub->add_option("--chi", f.chi, "numTopFeatures=k|percentile=f|fpr=a|fdr=q");
  sub->add_option("--label", f.label, "label column for chi-square and forest importance");
  sub->add_option("--seed", f.seed, "forest seed");
  sub->add_option("--n-trees", f.n_trees, "trees per forest");
  sub->add_option("--tree-max-depth", f.tree_max_depth, "tree depth limit");
  sub->add_option("--max-categories", f.max_categories, "pseudo-label category limit");
  sub->add_flag("--accept-merges", f.accept_merges, "apply proposed namespace merges");
  sub->add_flag("--pseudo-labels", f.pseudo_labels, "forest importance per low-cardinality column");
  sub->add_flag("--index-scale", f.index_scale, "index text and z-scale columns in written frames");
}

PipelineConfig build_config(const Flags& f) {
  PipelineConfig c = f.config ? PipelineConfig::load(*f.config) : PipelineConfig{};
  if (!f.inputs.empty()) c.inputs = f.inputs;
  if (f.mode) c.flatten.mode = parse_flatten_mode(*f.mode);
  if (f.error_policy) c.error_policy = parse_error_policy(*f.error_policy);
  if (f.workers) c.workers = *f.workers;
  if (f.report) c.report_path = *f.report;
  if (f.null_fill) c.flatten.null_fill = NullFill::parse(*f.null_fill);
  if (!f.dict_paths.empty()) c.flatten.classify.dict_paths = {f.dict_paths.begin(), f.dict_paths.end()};
  if (!f.time_columns.empty()) c.time_columns = f.time_columns;
  if (f.strict_timestamps) c.strict_timestamps = true;
  if (f.abbreviations) c.select.abbreviations = *f.abbreviations;
  if (f.out) c.out_dir = *f.out;
  if (f.format) c.format = parse_output_format(*f.format);
  if (f.pearson_threshold) c.select.pearson_threshold = *f.pearson_threshold;
  if (f.chi) c.select.chi = ChiSelector::parse(*f.chi);
  if (f.label) c.select.label = *f.label;
  if (f.seed) c.select.seed = *f.seed;
  if (f.n_trees) c.select.n_trees = *f.n_trees;
  if (f.tree_max_depth) c.select.tree_max_depth = *f.tree_max_depth;
  if (f.max_categories) c.select.max_categories = *f.max_categories;
  if (f.accept_merges) c.select.accept_merges = true;
  if (f.pseudo_labels) c.select.pseudo_labels = true;
  if (f.index_scale) c.select.index_scale = true;
  c.validate();
  return c;
}

void emit_report(const nlohmann::ordered_json& report, const PipelineConfig& c) {
  std::optional<std::filesystem::path> path;
  if (c.report_path) path = *c.report_path;
  else if (c.out_dir) path = std::filesystem::path(*c.out_dir) / "report.json";
  if (!path) {
    std::cout << report.dump(2) << '\n';
    return;
  }
  if (path->has_parent_path()) std::filesystem::create_directories(path->parent_path());
  std::ofstream out(*path, std::ios::binary);
  if (!out) throw Error("cannot write report '" + path->string() + "'");
  out << report.dump(2) << '\n';
  log::info("report written to " + path->string());
}

int run_kind(const Flags& f, RunKind kind) {
  const PipelineConfig c = build_config(f);
  if (kind == RunKind::Flatten || kind == RunKind::Pipeline) {
    if (!c.out_dir) throw ConfigError("--out is required for this command");
  }
  const RunResult result = run(c, kind);
  emit_report(result.report, c);
  return 0;
}

struct CorpusFlags {
  CorpusOptions options;
  std::optional<std::string> out;
};

int gen_corpus(const CorpusFlags& f) {
  if (!f.out) {
    generate_corpus(std::cout, f.options);
    return 0;
  }
  std::ofstream out(*f.out, std::ios::binary);
  if (!out) throw Error("cannot write '" + *f.out + "'");
  const std::size_t n = generate_corpus(out, f.options);
  log::info(std::to_string(n) + " records written to " + *f.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flatten heterogeneous JSON-Lines logs into frames and select features"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  Flags flags;
  CorpusFlags corpus;
  auto* inspect_cmd = app.add_subcommand("inspect", "Report schemas, field classes and merge candidates");
  auto* flatten_cmd = app.add_subcommand("flatten", "Flatten and convert time columns, then write frames");
  auto* select_cmd = app.add_subcommand("select", "Flatten and run selection; frames written only with --out");
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Every stage, frames written to --out");
  auto* gen_cmd = app.add_subcommand("gen-corpus", "Write the seeded synthetic sensor corpus");
  add_run_flags(inspect_cmd, flags, false);
  add_run_flags(flatten_cmd, flags, false);
  add_run_flags(select_cmd, flags, true);
  add_run_flags(pipeline_cmd, flags, true);
  gen_cmd->add_option("--seed", corpus.options.seed, "generator seed");
  gen_cmd->add_option("--records-per-schema", corpus.options.records_per_schema, "records per template");
  gen_cmd->add_option("--templates", corpus.options.templates, "template indices (default all 13)");
  gen_cmd->add_option("--null-rate", corpus.options.null_rate, "chance a payload value is null");
  gen_cmd->add_option("--out", corpus.out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*inspect_cmd) return run_kind(flags, RunKind::Inspect);
    if (*flatten_cmd) return run_kind(flags, RunKind::Flatten);
    if (*select_cmd) return run_kind(flags, RunKind::Select);
    if (*pipeline_cmd) return run_kind(flags, RunKind::Pipeline);
    if (*gen_cmd) return gen_corpus(corpus);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
