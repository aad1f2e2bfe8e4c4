#include "formine/dataset.hpp"

#include <openssl/evp.h>

#include <istream>
#include <map>
#include <ostream>
#include <unordered_set>

#include "formine/errors.hpp"

namespace formine {

const char* to_string(Bucket bucket) {
  switch (bucket) {
    case Bucket::easy: return "easy";
    case Bucket::middle: return "middle";
    case Bucket::hard: return "hard";
  }
  return "unknown";
}

Bucket bucket_difficulty(int token_count, const BucketThresholds& thresholds) {
  if (token_count < 1) raise(ErrorCode::bad_argument, "token_count must be >= 1");
  if (thresholds.easy_max >= thresholds.middle_max)
    raise(ErrorCode::bad_argument, "bucket thresholds must be strictly increasing");
  if (token_count < thresholds.easy_max) return Bucket::easy;
  if (token_count < thresholds.middle_max) return Bucket::middle;
  return Bucket::hard;
}

std::string content_hash(std::string_view normalized) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(normalized.data(), normalized.size(), digest, &len, EVP_sha256(), nullptr))
    raise(ErrorCode::io_error, "SHA-256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex(len * 2, '0');
  for (unsigned int i = 0; i < len; ++i) {
    hex[2 * i] = kHex[digest[i] >> 4];
    hex[2 * i + 1] = kHex[digest[i] & 0xF];
  }
  return hex;
}

std::string render_latex_for(const FormulaRecord& record) {
  switch (record.env_kind) {
    case EnvKind::align:
    case EnvKind::align_star:
    case EnvKind::eqnarray:
    case EnvKind::eqnarray_star:
      return "\\begin{aligned}" + record.normalized + "\\end{aligned}";
    case EnvKind::multline:
    case EnvKind::multline_star:
    case EnvKind::gather:
    case EnvKind::gather_star:
      return "\\begin{gathered}" + record.normalized + "\\end{gathered}";
    default:
      return record.normalized;
  }
}

std::vector<FormulaRecord> dedup(std::vector<FormulaRecord> records) {
  std::unordered_set<std::string> seen;
  std::vector<FormulaRecord> out;
  out.reserve(records.size());
  for (auto& record : records)
    if (seen.insert(record.id).second) out.push_back(std::move(record));
  return out;
}

nlohmann::json corpus_report(const std::vector<FormulaRecord>& records) {
  std::map<std::string, size_t> by_kind, by_bucket, by_status;
  std::map<std::string, size_t> histogram;
  for (const auto& record : records) {
    ++by_kind[to_string(record.env_kind)];
    ++by_bucket[to_string(record.bucket)];
    ++by_status[to_string(record.render_status)];
    // power-of-two bins: 1, 2-3, 4-7, ...
    int lo = 1;
    while (lo * 2 <= record.token_count) lo *= 2;
    std::string label = lo == 1 ? "1" : std::to_string(lo) + "-" + std::to_string(2 * lo - 1);
    ++histogram[label];
  }
  return nlohmann::json{{"records", records.size()},
                        {"by_env_kind", by_kind},
                        {"by_bucket", by_bucket},
                        {"by_render_status", by_status},
                        {"token_count_histogram", histogram}};
}

nlohmann::json record_to_dataset_json(const FormulaRecord& record) {
  return nlohmann::json{
      {"id", record.id},
      {"normalized", record.normalized},
      {"env_kind", to_string(record.env_kind)},
      {"token_count", record.token_count},
      {"bucket", to_string(record.bucket)},
      {"image", record.image_path.empty() ? nlohmann::json(nullptr)
                                          : nlohmann::json(record.image_path)},
      {"origin_id", record.origin_id}};
}

nlohmann::json record_to_stage_json(const FormulaRecord& record) {
  nlohmann::json j = record_to_dataset_json(record);
  j["raw"] = record.raw;
  j["expanded"] = record.expanded;
  j["render_status"] = to_string(record.render_status);
  if (!record.flags.empty()) j["flags"] = record.flags;
  return j;
}

FormulaRecord record_from_json(const nlohmann::json& j) {
  FormulaRecord record;
  record.id = j.value("id", "");
  record.raw = j.value("raw", "");
  record.expanded = j.value("expanded", "");
  record.normalized = j.value("normalized", "");
  if (j.contains("env_kind"))
    if (auto kind = env_kind_from_string(j["env_kind"].get<std::string>()))
      record.env_kind = *kind;
  record.token_count = j.value("token_count", 0);
  std::string bucket = j.value("bucket", "");
  if (bucket == "middle") record.bucket = Bucket::middle;
  else if (bucket == "hard") record.bucket = Bucket::hard;
  std::string status = j.value("render_status", "");
  for (int s = 0; s <= static_cast<int>(RenderStatus::not_rendered); ++s)
    if (status == to_string(static_cast<RenderStatus>(s)))
      record.render_status = static_cast<RenderStatus>(s);
  record.origin_id = j.value("origin_id", "");
  if (j.contains("image") && j["image"].is_string()) record.image_path = j["image"];
  if (j.contains("flags"))
    for (const auto& f : j["flags"]) record.flags.push_back(f.get<std::string>());
  return record;
}

void write_jsonl(std::ostream& out, const std::vector<FormulaRecord>& records,
                 bool stage_schema) {
  for (const auto& record : records)
    out << (stage_schema ? record_to_stage_json(record) : record_to_dataset_json(record)).dump()
        << '\n';
}

std::vector<FormulaRecord> read_jsonl(std::istream& in) {
  std::vector<FormulaRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(record_from_json(nlohmann::json::parse(line)));
  }
  return records;
}

}  // namespace formine
