#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "logflat/flatten.hpp"
#include "logflat/ingest.hpp"
#include "logflat/select.hpp"

namespace logflat {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class OutputFormat { Csv, Jsonl };

OutputFormat parse_output_format(std::string_view text);
std::string_view to_string(OutputFormat format) noexcept;

struct SelectConfig {
  std::size_t max_categories = 4;
  double pearson_threshold = 0.9;
  std::optional<ChiSelector> chi;  // runs only when a label is set
  std::optional<std::string> label;
  std::size_t n_trees = 10;
  std::size_t tree_max_depth = 5;
  std::uint64_t seed = 42;
  bool pseudo_labels = false;  // forest importance per low-cardinality column
  bool accept_merges = false;  // otherwise merge candidates are only reported
  bool index_scale = false;    // index text and z-scale everything in written frames
  double name_threshold = 0.5;
  double value_threshold = 0.5;
  std::size_t sample_limit = 1000;
  std::optional<std::string> abbreviations;  // extra short=long file

  void validate() const;
};

struct PipelineConfig {
  std::vector<std::string> inputs;
  ErrorPolicy error_policy = ErrorPolicy::Skip;
  FlattenConfig flatten;
  std::vector<std::string> time_formats;  // empty: built-in list
  std::vector<std::string> time_columns;
  bool strict_timestamps = false;
  SelectConfig select;
  std::optional<std::string> out_dir;
  OutputFormat format = OutputFormat::Csv;
  std::optional<std::string> report_path;
  std::size_t workers = 1;

  // Reads a JSON object whose keys mirror the CLI flags with '-' as '_'.
  // Unknown keys and ill-typed values throw ConfigError.
  static PipelineConfig from_json(const nlohmann::json& doc);
  static PipelineConfig load(const std::string& path);
  nlohmann::ordered_json to_json() const;

  void validate() const;  // throws ConfigError
};

enum class RunKind { Inspect, Flatten, Select, Pipeline };

struct RunResult {
  nlohmann::ordered_json report;
  std::vector<Frame> frames;  // final frames, in output order
  std::vector<std::string> written;
};

// Runs the stages `kind` needs and writes frames when an output directory is
// set (never for Inspect). Throws the library's error types.
RunResult run(const PipelineConfig& config, RunKind kind);

inline RunResult run_pipeline(const PipelineConfig& config) { return run(config, RunKind::Pipeline); }
inline nlohmann::ordered_json inspect(const PipelineConfig& config) { return run(config, RunKind::Inspect).report; }

}  // namespace logflat
