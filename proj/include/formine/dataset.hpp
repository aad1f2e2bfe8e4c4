#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "formine/formula_extractor.hpp"
#include "formine/render.hpp"

#include "json.hpp"

namespace formine {

enum class Bucket { easy, middle, hard };
const char* to_string(Bucket bucket);

struct BucketThresholds {
  int easy_max = 64;    // easy: token_count < easy_max
  int middle_max = 256; // middle: token_count < middle_max; hard otherwise
};

Bucket bucket_difficulty(int token_count, const BucketThresholds& thresholds = {});

/// One mined formula. id is the content hash of the normalized source, so
/// equal normalized text always yields the same id.
struct FormulaRecord {
  std::string id;
  std::string raw;
  std::string expanded;
  std::string normalized;
  EnvKind env_kind = EnvKind::dollar_display;
  int token_count = 0;
  Bucket bucket = Bucket::easy;
  RenderStatus render_status = RenderStatus::not_rendered;
  std::string origin_id;
  std::string image_path;          // relative to the dataset root; empty = none
  std::vector<std::string> flags;  // e.g. normalization_failed, arity_skipped
};

/// SHA-256 hex digest of the normalized source.
std::string content_hash(std::string_view normalized);

/// LaTeX handed to the render template. Alignment-family bodies carry & and
/// \\ which need an aligned/gathered context inside the \[ .. \] wrapper.
std::string render_latex_for(const FormulaRecord& record);

/// First record per id wins; input order preserved.
std::vector<FormulaRecord> dedup(std::vector<FormulaRecord> records);

/// Counts per env_kind, bucket and render_status, plus a power-of-two
/// token-count histogram.
nlohmann::json corpus_report(const std::vector<FormulaRecord>& records);

/// Final dataset schema: {id, normalized, env_kind, token_count, bucket,
/// image, origin_id}, one object per line.
nlohmann::json record_to_dataset_json(const FormulaRecord& record);

/// Stage schema: dataset fields plus raw/expanded/render_status/flags, used
/// by the standalone stage subcommands.
nlohmann::json record_to_stage_json(const FormulaRecord& record);
FormulaRecord record_from_json(const nlohmann::json& j);

void write_jsonl(std::ostream& out, const std::vector<FormulaRecord>& records,
                 bool stage_schema = false);
std::vector<FormulaRecord> read_jsonl(std::istream& in);

}  // namespace formine
