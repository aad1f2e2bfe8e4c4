#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "formine/dataset.hpp"
#include "formine/source_bundle.hpp"

namespace formine {

/// Flat `key = value` config document ('#' and ';' comments allowed).
/// Precedence is applied by the CLI: explicit flags beat config values,
/// config values beat built-in defaults.
std::map<std::string, std::string> load_flat_config(const std::filesystem::path& path);

struct PipelineConfig {
  std::filesystem::path input_dir;
  std::filesystem::path output_dir;
  bool render = false;
  std::string engine;          // empty: FORMINE_ENGINE, then pdflatex
  std::string converter_cmd;   // empty: FORMINE_CONVERTER, then pdftoppm
  std::string template_path;   // render template override
  std::string normalizer_cmd;  // external normalizer adapter, off when empty
  int dpi = 200;
  BucketThresholds thresholds;
  int parallelism = 1;
  int max_depth = 32;
  bool strip_redundant_braces = false;
  int render_timeout_ms = 20000;
};

struct BundleOutcome {
  std::vector<FormulaRecord> records;
  Warnings warnings;
};

/// source_graph -> extractor -> macro recovery -> normalization for one
/// bundle. Never throws for per-formula trouble; everything soft lands in
/// warnings and record flags.
BundleOutcome process_bundle(const SourceBundle& bundle, const PipelineConfig& config);

/// Bundles under input_dir: subdirectories plus tar / tar.gz / tgz / gz
/// archives, sorted by name for deterministic output.
std::vector<std::filesystem::path> discover_bundles(const std::filesystem::path& input_dir);

/// Whole pipeline. Writes dataset.jsonl, report.json and warnings.log under
/// output_dir. Exit status: 0 with at least one kept record, 1 with none,
/// 2 on unusable input or configuration.
int cmd_mine(const PipelineConfig& config, std::ostream& diag);

/// Scores prediction lines against reference lines (JSONL or raw LaTeX) and
/// prints per-bucket plus overall BLEU as JSON. Exit 2 on missing files,
/// line-count mismatch, or zero pairs.
int cmd_bleu(const std::filesystem::path& predictions_path,
             const std::filesystem::path& references_path, std::ostream& out,
             std::ostream& diag, const BucketThresholds& thresholds = {});

}  // namespace formine
