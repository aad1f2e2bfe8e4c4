// formine - mines LaTeX source bundles into normalized formula datasets and
// exposes the model-side numeric kernels for inspection.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "formine/bleu.hpp"
#include "formine/dataset.hpp"
#include "formine/errors.hpp"
#include "formine/formula_extractor.hpp"
#include "formine/latex_tokenizer.hpp"
#include "formine/macro_engine.hpp"
#include "formine/model_math.hpp"
#include "formine/normalizer.hpp"
#include "formine/pipeline.hpp"
#include "formine/source_graph.hpp"

namespace {

using namespace formine;

std::vector<FormulaRecord> read_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::io_error, "cannot read " + path);
  return read_jsonl(in);
}

void write_records(const std::string& path, const std::vector<FormulaRecord>& records) {
  if (path == "-") {
    write_jsonl(std::cout, records, /*stage_schema=*/true);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::io_error, "cannot write " + path);
  write_jsonl(out, records, /*stage_schema=*/true);
}

struct MineFlags {
  PipelineConfig config;
  std::string input, output, config_path;
  int easy_max = 64, middle_max = 256;
};

// Precedence: explicit CLI flags > config-file values > built-in defaults.
void apply_mine_config(const CLI::App& cmd, MineFlags& mine) {
  auto values = load_flat_config(mine.config_path);
  auto given = [&cmd](const char* flag) { return cmd.count(flag) > 0; };
  auto pick_string = [&](const char* flag, const char* key, std::string& target) {
    if (!given(flag) && values.count(key)) target = values.at(key);
  };
  auto pick_int = [&](const char* flag, const char* key, int& target) {
    if (!given(flag) && values.count(key)) target = std::stoi(values.at(key));
  };
  auto pick_bool = [&](const char* flag, const char* key, bool& target) {
    if (given(flag) || !values.count(key)) return;
    const std::string& v = values.at(key);
    if (v == "true" || v == "1" || v == "yes") target = true;
    else if (v == "false" || v == "0" || v == "no") target = false;
    else raise(ErrorCode::bad_argument, "config key " + std::string(key) + " is not a bool");
  };
  pick_string("--input", "input", mine.input);
  pick_string("--output", "output", mine.output);
  pick_bool("--render", "render", mine.config.render);
  pick_string("--engine", "engine", mine.config.engine);
  pick_string("--converter", "converter", mine.config.converter_cmd);
  pick_string("--template", "template", mine.config.template_path);
  pick_string("--normalizer-cmd", "normalizer-cmd", mine.config.normalizer_cmd);
  pick_int("--dpi", "dpi", mine.config.dpi);
  pick_int("--jobs", "jobs", mine.config.parallelism);
  pick_int("--easy-max", "easy-max", mine.easy_max);
  pick_int("--middle-max", "middle-max", mine.middle_max);
  pick_int("--max-depth", "max-depth", mine.config.max_depth);
  pick_bool("--strip-redundant-braces", "strip-redundant-braces",
            mine.config.strip_redundant_braces);
  pick_int("--timeout-ms", "timeout-ms", mine.config.render_timeout_ms);
}

void add_mine(CLI::App& app, MineFlags& mine) {
  CLI::App* cmd = app.add_subcommand(
      "mine", "run the full pipeline over a directory of bundles");
  cmd->add_option("--input", mine.input, "directory holding bundle subdirectories/archives");
  cmd->add_option("--output", mine.output, "output directory for dataset.jsonl etc.");
  cmd->add_flag("--render,!--no-render", mine.config.render,
                "render formulas to PNGs (needs a TeX engine)");
  cmd->add_option("--engine", mine.config.engine, "TeX engine (default: pdflatex)");
  cmd->add_option("--converter", mine.config.converter_cmd,
                  "PDF-to-image command template with {dpi} {pdf} {base}");
  cmd->add_option("--template", mine.config.template_path, "render template file");
  cmd->add_option("--normalizer-cmd", mine.config.normalizer_cmd,
                  "external normalizer command (stdin -> stdout)");
  cmd->add_option("--dpi", mine.config.dpi, "render resolution")->check(CLI::Range(72, 600));
  cmd->add_option("--jobs", mine.config.parallelism, "worker count")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--easy-max", mine.easy_max, "first bucket threshold (exclusive)");
  cmd->add_option("--middle-max", mine.middle_max, "second bucket threshold (exclusive)");
  cmd->add_option("--max-depth", mine.config.max_depth, "macro expansion depth bound")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--strip-redundant-braces", mine.config.strip_redundant_braces,
                "also strip single-token script braces during normalization");
  cmd->add_option("--timeout-ms", mine.config.render_timeout_ms, "per-render wall clock")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--config", mine.config_path,
                  "flat key=value file mirroring these flags");
  cmd->callback([&mine, cmd] {
    if (!mine.config_path.empty()) apply_mine_config(*cmd, mine);
    if (mine.input.empty() || mine.output.empty())
      throw CLI::RequiredError("--input and --output (flags or config file)");
    mine.config.input_dir = mine.input;
    mine.config.output_dir = mine.output;
    mine.config.thresholds = {mine.easy_max, mine.middle_max};
    if (mine.config.thresholds.easy_max >= mine.config.thresholds.middle_max)
      throw CLI::ValidationError("--easy-max must be below --middle-max");
    std::exit(cmd_mine(mine.config, std::cerr));
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"formula mining toolkit"};
  app.require_subcommand(1);

  MineFlags mine;
  add_mine(app, mine);

  // --- bleu -----------------------------------------------------------------
  std::string bleu_predictions, bleu_references;
  int bleu_easy_max = 64, bleu_middle_max = 256;
  CLI::App* bleu_cmd = app.add_subcommand("bleu", "score predictions against references");
  bleu_cmd->add_option("predictions", bleu_predictions, "JSONL or raw-LaTeX lines")->required();
  bleu_cmd->add_option("references", bleu_references, "JSONL or raw-LaTeX lines")->required();
  bleu_cmd->add_option("--easy-max", bleu_easy_max, "bucket threshold");
  bleu_cmd->add_option("--middle-max", bleu_middle_max, "bucket threshold");
  bleu_cmd->callback([&] {
    std::exit(cmd_bleu(bleu_predictions, bleu_references, std::cout, std::cerr,
                       {bleu_easy_max, bleu_middle_max}));
  });

  // --- mask -----------------------------------------------------------------
  long long mask_size = 0, mask_step = 0;
  CLI::App* mask_cmd = app.add_subcommand("mask", "print a parallel causal mask text grid");
  mask_cmd->add_option("size", mask_size, "mask side length")->required();
  mask_cmd->add_option("step", mask_step, "tokens predicted per step")->required();
  mask_cmd->callback([&] {
    if (mask_size < 1 || mask_step < 1) {
      std::cerr << "error: size and step must be >= 1\n";
      std::exit(2);
    }
    std::cout << mask_text_grid(build_parallel_causal_mask(mask_size, mask_step));
    std::exit(0);
  });

  // --- extract ----------------------------------------------------------------
  std::string extract_input, extract_output = "-", extract_macros;
  CLI::App* extract_cmd =
      app.add_subcommand("extract", "flatten one bundle and list its formula spans");
  extract_cmd->add_option("--input", extract_input, "bundle directory or archive")->required();
  extract_cmd->add_option("--output", extract_output, "JSONL output ('-' for stdout)");
  extract_cmd->add_option("--dump-macros", extract_macros, "write the macro table as JSON");
  extract_cmd->callback([&] {
    Warnings warnings;
    SourceBundle bundle = load_bundle(extract_input, &warnings);
    FlatDocument doc = resolve_includes(bundle, detect_main_file(bundle), &warnings);
    if (!extract_macros.empty()) {
      std::ofstream out(extract_macros, std::ios::binary);
      if (!out) raise(ErrorCode::io_error, "cannot write " + extract_macros);
      out << macro_table_to_json(parse_macro_definitions(doc, &warnings)).dump(2) << "\n";
    }
    std::vector<FormulaSpan> spans = extract_formulas(strip_float_environments(doc, &warnings),
                                                      &warnings);
    std::vector<FormulaRecord> records;
    records.reserve(spans.size());
    for (const auto& span : spans) {
      FormulaRecord record;
      record.origin_id = bundle.origin_id;
      record.env_kind = span.env_kind;
      record.raw = span.body;
      records.push_back(std::move(record));
    }
    write_records(extract_output, records);
    for (const auto& w : warnings)
      std::cerr << "warning [" << w.stage << "] " << w.reason << "\n";
    std::exit(0);
  });

  // --- expand -----------------------------------------------------------------
  std::string expand_input, expand_output = "-", expand_macros_path;
  int expand_depth = 32;
  CLI::App* expand_cmd =
      app.add_subcommand("expand", "expand user-defined commands in record raw fields");
  expand_cmd->add_option("--input", expand_input, "stage JSONL")->required();
  expand_cmd->add_option("--macros", expand_macros_path, "macro table JSON from extract")
      ->required();
  expand_cmd->add_option("--output", expand_output, "JSONL output ('-' for stdout)");
  expand_cmd->add_option("--max-depth", expand_depth, "expansion depth bound");
  expand_cmd->callback([&] {
    std::ifstream macros_in(expand_macros_path, std::ios::binary);
    if (!macros_in) raise(ErrorCode::io_error, "cannot read " + expand_macros_path);
    MacroTable table = macro_table_from_json(nlohmann::json::parse(macros_in));
    std::vector<FormulaRecord> records = read_records(expand_input);
    for (auto& record : records) {
      try {
        record.expanded = expand_macros(record.raw, table, expand_depth);
      } catch (const Error& e) {
        std::cerr << "warning [macro_expand] " << e.what() << "\n";
        record.expanded = record.raw;
        record.flags.push_back("expansion_failed");
      }
    }
    write_records(expand_output, records);
    std::exit(0);
  });

  // --- normalize -------------------------------------------------------------
  std::string norm_input, norm_output = "-";
  int norm_easy = 64, norm_middle = 256;
  bool norm_strip = false;
  CLI::App* norm_cmd =
      app.add_subcommand("normalize", "canonicalize expanded sources, bucket and hash");
  norm_cmd->add_option("--input", norm_input, "stage JSONL")->required();
  norm_cmd->add_option("--output", norm_output, "JSONL output ('-' for stdout)");
  norm_cmd->add_option("--easy-max", norm_easy, "bucket threshold");
  norm_cmd->add_option("--middle-max", norm_middle, "bucket threshold");
  norm_cmd->add_flag("--strip-redundant-braces", norm_strip, "also strip script braces");
  norm_cmd->callback([&] {
    std::vector<FormulaRecord> records = read_records(norm_input);
    for (auto& record : records) {
      const std::string& source = record.expanded.empty() ? record.raw : record.expanded;
      NormalizeResult result = normalize(source, {.strip_redundant_braces = norm_strip});
      if (!result.ok) record.flags.push_back("normalization_failed");
      record.normalized = std::move(result.text);
      record.token_count = count_content_tokens(tokenize_latex(record.normalized));
      if (record.token_count >= 1)
        record.bucket = bucket_difficulty(record.token_count, {norm_easy, norm_middle});
      record.id = content_hash(record.normalized);
    }
    write_records(norm_output, records);
    std::exit(0);
  });

  // --- dedup ------------------------------------------------------------------
  std::string dedup_input, dedup_output = "-";
  CLI::App* dedup_cmd = app.add_subcommand("dedup", "keep the first record per content id");
  dedup_cmd->add_option("--input", dedup_input, "stage JSONL")->required();
  dedup_cmd->add_option("--output", dedup_output, "JSONL output ('-' for stdout)");
  dedup_cmd->callback([&] {
    write_records(dedup_output, dedup(read_records(dedup_input)));
    std::exit(0);
  });

  // --- render -----------------------------------------------------------------
  std::string render_input, render_output = "-", render_images = "images";
  RenderConfig render_config;
  int render_dpi = 200;
  long long render_timeout = 20000;
  CLI::App* render_cmd =
      app.add_subcommand("render", "render records to cropped PNGs and annotate status");
  render_cmd->add_option("--input", render_input, "stage JSONL")->required();
  render_cmd->add_option("--output", render_output, "JSONL output ('-' for stdout)");
  render_cmd->add_option("--images-dir", render_images, "where PNG files land");
  render_cmd->add_option("--engine", render_config.engine, "TeX engine");
  render_cmd->add_option("--converter", render_config.converter_cmd, "converter template");
  render_cmd->add_option("--dpi", render_dpi, "render resolution")->check(CLI::Range(72, 600));
  render_cmd->add_option("--timeout-ms", render_timeout, "per-render wall clock");
  render_cmd->callback([&] {
    render_config.timeout = std::chrono::milliseconds(render_timeout);
    std::vector<FormulaRecord> records = read_records(render_input);
    std::filesystem::create_directories(render_images);
    for (auto& record : records) {
      if (record.id.empty()) record.id = content_hash(record.normalized);
      RenderJob job{record.id, render_latex_for(record), "default", render_dpi};
      std::filesystem::path workdir = std::filesystem::path(render_images) / ".work";
      RenderResult result = render_formula(job, render_config, workdir);
      record.render_status = result.status;
      if (result.status == RenderStatus::ok) {
        std::filesystem::path target =
            std::filesystem::path(render_images) / (record.id + ".png");
        std::filesystem::rename(result.image_path, target);
        record.image_path = target.string();
      } else if (!result.log_excerpt.empty()) {
        std::cerr << "warning [render] " << record.id << ": " << to_string(result.status)
                  << "\n";
      }
    }
    std::error_code ec;
    std::filesystem::remove_all(std::filesystem::path(render_images) / ".work", ec);
    write_records(render_output, records);
    std::exit(0);
  });

  // --- rules ------------------------------------------------------------------
  CLI::App* rules_cmd = app.add_subcommand("rules", "list the normalization rewrite rules");
  rules_cmd->callback([] {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& rule : rewrite_rules())
      out.push_back({{"id", rule.id},
                     {"description", rule.description},
                     {"example_before", rule.example_before},
                     {"example_after", rule.example_after},
                     {"enabled_by_default", rule.enabled_by_default}});
    std::cout << out.dump(2) << "\n";
    std::exit(0);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
