#include "formine/render.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "formine/errors.hpp"
#include "formine/image.hpp"
#include "formine/subprocess.hpp"

namespace fs = std::filesystem;

namespace formine {

namespace {

std::string first_error_lines(const std::string& log, size_t max_lines = 6) {
  std::istringstream in(log);
  std::string line, out;
  size_t taken = 0;
  bool in_error = false;
  while (std::getline(in, line) && taken < max_lines) {
    if (!in_error && (line.rfind("!", 0) == 0 || line.find("Error") != std::string::npos))
      in_error = true;
    if (in_error) {
      out += line + "\n";
      ++taken;
    }
  }
  if (out.empty()) {  // no recognizable error marker: take the tail
    std::istringstream again(log);
    std::vector<std::string> lines;
    while (std::getline(again, line)) lines.push_back(line);
    size_t start = lines.size() > max_lines ? lines.size() - max_lines : 0;
    for (size_t i = start; i < lines.size(); ++i) out += lines[i] + "\n";
  }
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::io_error, "cannot write " + path.string());
  out << content;
}

}  // namespace

const char* to_string(RenderStatus status) {
  switch (status) {
    case RenderStatus::ok: return "ok";
    case RenderStatus::compile_error: return "compile_error";
    case RenderStatus::empty_crop: return "empty_crop";
    case RenderStatus::timeout: return "timeout";
    case RenderStatus::not_rendered: return "not_rendered";
  }
  return "unknown";
}

std::string default_render_template() {
  return "\\documentclass[preview,border=2pt]{standalone}\n"
         "\\usepackage{amsmath}\n"
         "\\usepackage{amssymb}\n"
         "\\begin{document}\n"
         "\\[ {formula} \\]\n"
         "\\end{document}\n";
}

std::string default_converter_cmd() {
  return "pdftoppm -r {dpi} -gray -png -singlefile {pdf} {base}";
}

std::string resolve_engine(const RenderConfig& config) {
  if (!config.engine.empty()) return config.engine;
  if (const char* env = std::getenv("FORMINE_ENGINE"); env && *env) return env;
  return "pdflatex";
}

std::string resolve_converter_cmd(const RenderConfig& config) {
  if (!config.converter_cmd.empty()) return config.converter_cmd;
  if (const char* env = std::getenv("FORMINE_CONVERTER"); env && *env) return env;
  return default_converter_cmd();
}

std::string instantiate_template(const std::string& template_text, const std::string& latex) {
  std::string out = template_text;
  const std::string placeholder = "{formula}";
  size_t pos = out.find(placeholder);
  if (pos == std::string::npos)
    raise(ErrorCode::bad_argument, "render template lacks a {formula} placeholder");
  while (pos != std::string::npos) {
    out.replace(pos, placeholder.size(), latex);
    pos = out.find(placeholder, pos + latex.size());
  }
  return out;
}

RenderResult render_formula(const RenderJob& job, const RenderConfig& config,
                            const fs::path& workdir) {
  if (job.latex.empty()) raise(ErrorCode::bad_argument, "render job has empty latex");
  if (job.dpi < 72 || job.dpi > 600)
    raise(ErrorCode::bad_argument, "render dpi out of range [72, 600]");
  std::string engine = resolve_engine(config);
  if (!program_exists(engine))
    raise(ErrorCode::engine_missing, "TeX engine not found: " + engine);

  fs::create_directories(workdir);
  const std::string stem = job.formula_id.empty() ? "formula" : job.formula_id;
  const fs::path tex_path = workdir / (stem + ".tex");
  const fs::path pdf_path = workdir / (stem + ".pdf");
  const fs::path png_path = workdir / (stem + ".png");
  const std::string template_text =
      config.template_text.empty() ? default_render_template() : config.template_text;
  write_file(tex_path, instantiate_template(template_text, job.latex));

  RunResult compiled = run_process(
      {engine, "-interaction=nonstopmode", "-halt-on-error", tex_path.filename().string()},
      workdir, config.timeout);
  if (compiled.timed_out) return {RenderStatus::timeout, "", "engine timed out"};
  if (compiled.exit_code != 0 || !fs::exists(pdf_path))
    return {RenderStatus::compile_error, "", first_error_lines(compiled.output)};

  std::vector<std::string> converter = split_command(
      resolve_converter_cmd(config),
      {{"dpi", std::to_string(job.dpi)},
       {"pdf", pdf_path.string()},
       {"base", (workdir / stem).string()},
       {"png", png_path.string()}});
  if (converter.empty() || !program_exists(converter.front()))
    raise(ErrorCode::engine_missing,
          "PDF converter not found: " + (converter.empty() ? "<none>" : converter.front()));
  RunResult converted = run_process(converter, workdir, config.timeout);
  if (converted.timed_out) return {RenderStatus::timeout, "", "converter timed out"};
  if (converted.exit_code != 0 || !fs::exists(png_path))
    return {RenderStatus::compile_error, "", first_error_lines(converted.output)};

  try {
    GrayImage image = load_png_gray(png_path);
    GrayImage cropped = crop_to_content(image, config.crop_margin_px, config.ink_threshold);
    save_png_gray(png_path, cropped);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::empty_crop) return {RenderStatus::empty_crop, "", e.what()};
    return {RenderStatus::compile_error, "", e.what()};
  }
  return {RenderStatus::ok, png_path.string(), ""};
}

}  // namespace formine
