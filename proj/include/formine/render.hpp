#pragma once

#include <chrono>
#include <filesystem>
#include <string>

#include "formine/warnings.hpp"

namespace formine {

enum class RenderStatus { ok, compile_error, empty_crop, timeout, not_rendered };
const char* to_string(RenderStatus status);

struct RenderJob {
  std::string formula_id;  // content hash; names the .tex/.pdf/.png files
  std::string latex;
  std::string template_id = "default";
  int dpi = 200;
};

struct RenderResult {
  RenderStatus status = RenderStatus::not_rendered;
  std::string image_path;   // set when status == ok
  std::string log_excerpt;  // first error lines on failure
};

struct RenderConfig {
  std::string engine;         // empty: FORMINE_ENGINE env var, then "pdflatex"
  std::string converter_cmd;  // empty: FORMINE_CONVERTER env var, then pdftoppm
  std::string template_text;  // empty: built-in default
  std::chrono::milliseconds timeout{20000};
  int crop_margin_px = 8;
  int ink_threshold = 250;
};

/// The built-in wrapping document: standalone-style, amsmath/amssymb, the
/// formula inside \[ ... \]. The placeholder is {formula}.
std::string default_render_template();

/// pdftoppm invocation with {dpi}, {pdf} and {base} placeholders.
std::string default_converter_cmd();

std::string resolve_engine(const RenderConfig& config);
std::string resolve_converter_cmd(const RenderConfig& config);

std::string instantiate_template(const std::string& template_text, const std::string& latex);

/// Writes <id>.tex from the template, runs the engine in nonstop mode under
/// the timeout, converts the first PDF page to PNG at job.dpi, crops to
/// content and writes <id>.png, all inside workdir. Raises engine_missing
/// when the engine cannot be invoked; every per-job failure is reported
/// through the returned status instead.
RenderResult render_formula(const RenderJob& job, const RenderConfig& config,
                            const std::filesystem::path& workdir);

}  // namespace formine
