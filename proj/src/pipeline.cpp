#include "formine/pipeline.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <thread>

#include "formine/bleu.hpp"
#include "formine/errors.hpp"
#include "formine/formula_extractor.hpp"
#include "formine/latex_tokenizer.hpp"
#include "formine/macro_engine.hpp"
#include "formine/normalizer.hpp"
#include "formine/source_graph.hpp"
#include "formine/subprocess.hpp"

namespace fs = std::filesystem;

namespace formine {

namespace {

void parallel_for(size_t count, int workers, const std::function<void(size_t)>& body) {
  if (count == 0) return;
  std::atomic<size_t> next{0};
  auto drain = [&] {
    for (size_t i; (i = next.fetch_add(1)) < count;) body(i);
  };
  if (workers <= 1 || count == 1) {
    drain();
    return;
  }
  std::vector<std::thread> threads;
  size_t n = std::min<size_t>(static_cast<size_t>(workers), count);
  threads.reserve(n);
  for (size_t t = 0; t < n; ++t) threads.emplace_back(drain);
  for (auto& th : threads) th.join();
}

bool has_archive_extension(const fs::path& path) {
  std::string name = path.filename().string();
  auto ends_with = [&](std::string_view suffix) {
    return name.size() >= suffix.size() &&
           name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  return ends_with(".tar") || ends_with(".tar.gz") || ends_with(".tgz") || ends_with(".gz");
}

std::optional<std::string> run_external_normalizer(const std::string& command,
                                                   const std::string& source,
                                                   Warnings* warnings) {
  std::vector<std::string> argv = split_command(command, {});
  if (argv.empty() || !program_exists(argv.front())) {
    warn(warnings, "normalize", "external normalizer not found: " + command);
    return std::nullopt;
  }
  RunResult run = run_process(argv, fs::current_path(), std::chrono::milliseconds(10000), source);
  if (run.timed_out || run.exit_code != 0) {
    warn(warnings, "normalize", "external normalizer failed, internal rules used");
    return std::nullopt;
  }
  std::string text = run.output;
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  return text;
}

struct MineArtifacts {
  std::vector<FormulaRecord> all;   // every record, dropped ones included
  std::vector<FormulaRecord> kept;  // what dataset.jsonl receives
  Warnings warnings;
};

void render_records(std::vector<FormulaRecord>& records, const PipelineConfig& config,
                    Warnings& warnings) {
  RenderConfig render_config;
  render_config.engine = config.engine;
  render_config.converter_cmd = config.converter_cmd;
  render_config.timeout = std::chrono::milliseconds(config.render_timeout_ms);
  if (!config.template_path.empty()) {
    std::ifstream in(config.template_path, std::ios::binary);
    if (!in) raise(ErrorCode::io_error, "cannot read template " + config.template_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    render_config.template_text = std::move(buf).str();
  }
  fs::path images_dir = config.output_dir / "images";
  fs::path work_root = config.output_dir / "render_work";
  fs::create_directories(images_dir);
  std::vector<Warnings> job_warnings(records.size());
  parallel_for(records.size(), config.parallelism, [&](size_t i) {
    FormulaRecord& record = records[i];
    RenderJob job{record.id, render_latex_for(record), "default", config.dpi};
    fs::path workdir = work_root / record.id;
    RenderResult result = render_formula(job, render_config, workdir);
    record.render_status = result.status;
    if (result.status == RenderStatus::ok) {
      fs::path target = images_dir / (record.id + ".png");
      fs::rename(result.image_path, target);
      record.image_path = "images/" + record.id + ".png";
    } else {
      std::string reason = std::string(to_string(result.status));
      if (!result.log_excerpt.empty()) {
        std::string excerpt = result.log_excerpt.substr(0, 200);
        std::replace(excerpt.begin(), excerpt.end(), '\n', ' ');
        reason += ": " + excerpt;
      }
      job_warnings[i].push_back({record.origin_id, "render", reason});
    }
    std::error_code ec;
    fs::remove_all(workdir, ec);
  });
  for (auto& jw : job_warnings)
    warnings.insert(warnings.end(), jw.begin(), jw.end());
  std::error_code ec;
  fs::remove_all(work_root, ec);
}

MineArtifacts mine(const PipelineConfig& config, const std::vector<fs::path>& bundle_paths,
                   std::ostream& diag) {
  MineArtifacts artifacts;
  std::vector<BundleOutcome> outcomes(bundle_paths.size());
  parallel_for(bundle_paths.size(), config.parallelism, [&](size_t i) {
    std::string origin = bundle_paths[i].filename().string();
    try {
      Warnings load_warnings;
      SourceBundle bundle = load_bundle(bundle_paths[i], &load_warnings);
      outcomes[i] = process_bundle(bundle, config);
      outcomes[i].warnings.insert(outcomes[i].warnings.begin(), load_warnings.begin(),
                                  load_warnings.end());
    } catch (const std::exception& e) {
      outcomes[i].warnings.push_back({origin, "bundle", e.what()});
    }
    for (auto& w : outcomes[i].warnings)
      if (w.origin_id.empty()) w.origin_id = origin;
  });
  std::vector<FormulaRecord> records;
  for (auto& outcome : outcomes) {
    std::move(outcome.records.begin(), outcome.records.end(), std::back_inserter(records));
    std::move(outcome.warnings.begin(), outcome.warnings.end(),
              std::back_inserter(artifacts.warnings));
  }
  records = dedup(std::move(records));
  if (config.render) render_records(records, config, artifacts.warnings);
  artifacts.all = records;
  if (config.render) {
    for (auto& record : records)
      if (record.render_status == RenderStatus::ok)
        artifacts.kept.push_back(std::move(record));
  } else {
    artifacts.kept = std::move(records);
  }
  diag << "bundles: " << bundle_paths.size() << ", records kept: " << artifacts.kept.size()
       << ", warnings: " << artifacts.warnings.size() << "\n";
  return artifacts;
}

}  // namespace

std::map<std::string, std::string> load_flat_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::io_error, "cannot read config " + path.string());
  std::map<std::string, std::string> values;
  std::string line;
  auto trim = [](std::string s) {
    size_t b = s.find_first_not_of(" \t\r");
    size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t.front() == '#' || t.front() == ';') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos) raise(ErrorCode::bad_argument, "config line without '=': " + t);
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    values[key] = value;
  }
  return values;
}

BundleOutcome process_bundle(const SourceBundle& bundle, const PipelineConfig& config) {
  BundleOutcome outcome;
  Warnings* warnings = &outcome.warnings;
  std::string main = detect_main_file(bundle);
  FlatDocument doc = resolve_includes(bundle, main, warnings);
  MacroTable table = parse_macro_definitions(doc, warnings);
  FlatDocument stripped = strip_float_environments(doc, warnings);
  std::vector<FormulaSpan> spans = extract_formulas(stripped, warnings);
  outcome.records.reserve(spans.size());
  for (const auto& span : spans) {
    FormulaRecord record;
    record.origin_id = bundle.origin_id;
    record.env_kind = span.env_kind;
    record.raw = span.body;
    ExpandFlags expand_flags;
    try {
      record.expanded = expand_macros(span.body, table, config.max_depth, warnings,
                                      &expand_flags);
    } catch (const Error& e) {
      warn(warnings, "macro_expand", e.what());
      record.expanded = span.body;
      record.flags.push_back("expansion_failed");
    }
    if (expand_flags.arity_skipped) record.flags.push_back("arity_skipped");
    if (expand_flags.core_redefined) record.flags.push_back("core_redefinition");

    std::optional<std::string> external;
    if (!config.normalizer_cmd.empty())
      external = run_external_normalizer(config.normalizer_cmd, record.expanded, warnings);
    if (external) {
      record.normalized = *external;
    } else {
      NormalizeResult normalized =
          normalize(record.expanded, {.strip_redundant_braces = config.strip_redundant_braces});
      if (!normalized.ok) {
        warn(warnings, "normalize", normalized.reason + "; kept expanded source");
        record.flags.push_back("normalization_failed");
      }
      record.normalized = std::move(normalized.text);
    }
    record.token_count = count_content_tokens(tokenize_latex(record.normalized));
    if (record.token_count < 1) {
      warn(warnings, "dataset", "empty formula body dropped");
      continue;
    }
    record.bucket = bucket_difficulty(record.token_count, config.thresholds);
    record.id = content_hash(record.normalized);
    outcome.records.push_back(std::move(record));
  }
  return outcome;
}

std::vector<fs::path> discover_bundles(const fs::path& input_dir) {
  std::vector<fs::path> bundles;
  for (const auto& entry : fs::directory_iterator(input_dir)) {
    if (entry.is_directory()) {
      bundles.push_back(entry.path());
    } else if (entry.is_regular_file() && has_archive_extension(entry.path())) {
      bundles.push_back(entry.path());
    }
  }
  std::sort(bundles.begin(), bundles.end());
  return bundles;
}

int cmd_mine(const PipelineConfig& config, std::ostream& diag) {
  std::error_code ec;
  if (!fs::is_directory(config.input_dir, ec)) {
    diag << "error: input is not a readable directory: " << config.input_dir.string() << "\n";
    return 2;
  }
  std::vector<fs::path> bundle_paths;
  try {
    bundle_paths = discover_bundles(config.input_dir);
  } catch (const std::exception& e) {
    diag << "error: cannot scan input: " << e.what() << "\n";
    return 2;
  }
  if (bundle_paths.empty()) {
    diag << "error: no bundles (subdirectories or archives) under "
         << config.input_dir.string() << "\n";
    return 2;
  }
  if (config.render) {
    std::string engine = resolve_engine({.engine = config.engine});
    if (!program_exists(engine)) {
      diag << "error: rendering requested but TeX engine not found: " << engine << "\n";
      return 2;
    }
  }
  fs::create_directories(config.output_dir);

  MineArtifacts artifacts = mine(config, bundle_paths, diag);

  {
    std::ofstream out(config.output_dir / "dataset.jsonl", std::ios::binary);
    write_jsonl(out, artifacts.kept);
  }
  {
    std::ofstream out(config.output_dir / "report.json", std::ios::binary);
    nlohmann::json report = corpus_report(artifacts.all);
    report["bundles"] = bundle_paths.size();
    report["records_kept"] = artifacts.kept.size();
    report["warnings"] = artifacts.warnings.size();
    out << report.dump(2) << "\n";
  }
  {
    std::ofstream out(config.output_dir / "warnings.log", std::ios::binary);
    for (const auto& w : artifacts.warnings)
      out << nlohmann::json{{"origin_id", w.origin_id}, {"stage", w.stage},
                            {"reason", w.reason}}
                 .dump()
          << '\n';
  }
  return artifacts.kept.empty() ? 1 : 0;
}

namespace {

struct ScoredLine {
  std::vector<std::string> tokens;
  std::optional<Bucket> bucket;  // from the record, when present
};

std::optional<std::vector<ScoredLine>> read_scoring_file(const fs::path& path,
                                                         bool is_reference,
                                                         std::ostream& diag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    diag << "error: cannot read " << path.string() << "\n";
    return std::nullopt;
  }
  std::vector<ScoredLine> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ScoredLine scored;
    std::string latex = line;
    if (!line.empty() && line.front() == '{') {
      try {
        nlohmann::json j = nlohmann::json::parse(line);
        const char* preferred = is_reference ? "reference" : "prediction";
        if (j.contains(preferred))
          latex = j[preferred].get<std::string>();
        else if (j.contains("normalized"))
          latex = j["normalized"].get<std::string>();
        if (is_reference && j.contains("bucket")) {
          std::string b = j["bucket"].get<std::string>();
          if (b == "easy") scored.bucket = Bucket::easy;
          if (b == "middle") scored.bucket = Bucket::middle;
          if (b == "hard") scored.bucket = Bucket::hard;
        }
      } catch (const nlohmann::json::parse_error&) {
        // not JSON after all: treat the raw line as LaTeX
      }
    }
    scored.tokens = bleu_tokens(latex);
    lines.push_back(std::move(scored));
  }
  return lines;
}

}  // namespace

int cmd_bleu(const fs::path& predictions_path, const fs::path& references_path,
             std::ostream& out, std::ostream& diag, const BucketThresholds& thresholds) {
  auto predictions = read_scoring_file(predictions_path, false, diag);
  auto references = read_scoring_file(references_path, true, diag);
  if (!predictions || !references) return 2;
  if (predictions->size() != references->size()) {
    diag << "error: line counts differ: " << predictions->size() << " predictions vs "
         << references->size() << " references\n";
    return 2;
  }
  if (predictions->empty()) {
    diag << "error: no scoring pairs\n";
    return 2;
  }
  double sum = 0.0;
  std::array<double, 3> bucket_sum{};
  std::array<size_t, 3> bucket_count{};
  for (size_t i = 0; i < predictions->size(); ++i) {
    const auto& ref = (*references)[i];
    if (ref.tokens.empty()) {
      diag << "error: empty reference on line " << i + 1 << "\n";
      return 2;
    }
    double score = bleu_score((*predictions)[i].tokens, ref.tokens);
    Bucket bucket = ref.bucket
                        ? *ref.bucket
                        : bucket_difficulty(static_cast<int>(ref.tokens.size()), thresholds);
    sum += score;
    bucket_sum[static_cast<size_t>(bucket)] += score;
    ++bucket_count[static_cast<size_t>(bucket)];
  }
  nlohmann::json result{{"overall", sum / static_cast<double>(predictions->size())},
                        {"pairs", predictions->size()}};
  for (int b = 0; b < 3; ++b) {
    auto bucket = static_cast<Bucket>(b);
    nlohmann::json entry{{"pairs", bucket_count[b]}};
    entry["bleu"] = bucket_count[b] == 0
                        ? nlohmann::json(nullptr)
                        : nlohmann::json(bucket_sum[b] / static_cast<double>(bucket_count[b]));
    result[to_string(bucket)] = std::move(entry);
  }
  out << result.dump(2) << "\n";
  return 0;
}

}  // namespace formine
