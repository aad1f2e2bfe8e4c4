#include "synthetic_corpus.hpp"

#include <fstream>
#include <random>

namespace formine::testing {

namespace {

using formine::EnvKind;

constexpr EnvKind kAllKinds[] = {
    EnvKind::dollar_display, EnvKind::bracket_display, EnvKind::equation,
    EnvKind::equation_star,  EnvKind::align,           EnvKind::align_star,
    EnvKind::multline,       EnvKind::multline_star,   EnvKind::gather,
    EnvKind::gather_star,    EnvKind::eqnarray,        EnvKind::eqnarray_star,
    EnvKind::displaymath};

const char* env_name(EnvKind kind) {
  switch (kind) {
    case EnvKind::equation: return "equation";
    case EnvKind::equation_star: return "equation*";
    case EnvKind::align: return "align";
    case EnvKind::align_star: return "align*";
    case EnvKind::multline: return "multline";
    case EnvKind::multline_star: return "multline*";
    case EnvKind::gather: return "gather";
    case EnvKind::gather_star: return "gather*";
    case EnvKind::eqnarray: return "eqnarray";
    case EnvKind::eqnarray_star: return "eqnarray*";
    case EnvKind::displaymath: return "displaymath";
    default: return "";
  }
}

bool is_alignment_kind(EnvKind kind) {
  return kind == EnvKind::align || kind == EnvKind::align_star || kind == EnvKind::eqnarray ||
         kind == EnvKind::eqnarray_star;
}

// Normalization fixpoints: single spaces, no trailing row breaks, no
// matrix-family environments.
std::string make_body(EnvKind kind, int serial) {
  std::string n = std::to_string(serial);
  if (is_alignment_kind(kind))
    return "u_{" + n + "} & = v_{" + n + "} + w \\\\ s_{" + n + "} & = t^{2}";
  if (kind == EnvKind::multline || kind == EnvKind::multline_star ||
      kind == EnvKind::gather || kind == EnvKind::gather_star)
    return "g_{" + n + "} + h_{" + n + "} \\\\ - k^{3} + m";
  return "p_{" + n + "} + q^{2} = r_{" + n + "}";
}

std::string wrap_formula(EnvKind kind, const std::string& body, bool with_label, int serial) {
  std::string inner = body;
  if (with_label) inner += " \\label{eq:" + std::to_string(serial) + "}";
  switch (kind) {
    case EnvKind::dollar_display: return "$$ " + inner + " $$";
    case EnvKind::bracket_display: return "\\[ " + inner + " \\]";
    default: {
      std::string name = env_name(kind);
      return "\\begin{" + name + "}\n" + inner + "\n\\end{" + name + "}";
    }
  }
}

std::string decoy_float(std::mt19937& rng, int serial) {
  std::string n = std::to_string(serial);
  switch (rng() % 3) {
    case 0:
      return "\\begin{figure}\n\\centering\n$$ bad_{" + n +
             "} + 1 $$\n\\caption{decoy " + n + "}\n\\end{figure}\n";
    case 1:
      return "\\begin{table}\n\\begin{tabular}{cc}\nbad_{" + n +
             "} & 0 \\\\ 1 & 2\n\\end{tabular}\n\\end{table}\n";
    default:
      return "\\begin{table*}\n\\begin{equation}nope_{" + n +
             "}\\end{equation}\n\\end{table*}\n";
  }
}

std::string prose(std::mt19937& rng, int serial) {
  static const char* kSnippets[] = {
      "We now consider the boundary case. ",
      "The estimate follows from the triangle inequality. ",
      "Let the operator act on the dense subspace. ",
      "This step mirrors the classical argument. ",
  };
  std::string out = kSnippets[rng() % 4];
  if (rng() % 3 == 0) out += "Here $inl_{" + std::to_string(serial) + "}$ is inline. ";
  if (rng() % 4 == 0) out += "% comment decoy: $$ ghost_{" + std::to_string(serial) + "} $$\n";
  if (rng() % 5 == 0) out += "Also \\(par_{" + std::to_string(serial) + "}\\) in parens. ";
  return out + "\n";
}

}  // namespace

SyntheticCorpus make_synthetic_corpus(int bundle_count, int formula_count, unsigned seed) {
  SyntheticCorpus corpus;
  std::mt19937 rng(seed);
  int serial = 0;
  int planted_total = 0;
  for (int b = 0; b < bundle_count; ++b) {
    SyntheticBundle bundle;
    char name[32];
    std::snprintf(name, sizeof name, "bundle_%03d", b);
    bundle.name = name;

    int remaining_bundles = bundle_count - b;
    int quota = (formula_count - planted_total + remaining_bundles - 1) / remaining_bundles;
    // four content slots: main body, sec0, sec1, sub0 (depth main->sec0->sub0)
    std::vector<std::string> slots(4);
    for (int f = 0; f < quota; ++f) {
      EnvKind kind = kAllKinds[(planted_total + f) % std::size(kAllKinds)];
      std::string body = make_body(kind, serial);
      bool with_label = (serial % 50) == 7;
      std::string& slot = slots[rng() % slots.size()];
      slot += prose(rng, serial);
      slot += wrap_formula(kind, body, with_label, serial) + "\n";
      corpus.planted.push_back({body, kind});
      ++serial;
    }
    // decoys land in random slots too
    int decoys = 1 + static_cast<int>(rng() % 3);
    for (int d = 0; d < decoys; ++d) {
      slots[rng() % slots.size()] += decoy_float(rng, serial * 10 + d);
    }
    planted_total += quota;

    std::string main_tex = "\\documentclass{article}\n\\usepackage{amsmath}\n";
    main_tex += "% preamble comment with $$ fake_{" + std::to_string(b) + "} $$\n";
    main_tex += "\\begin{document}\n";
    main_tex += prose(rng, serial * 13 + 1);
    main_tex += slots[0];
    main_tex += "\\input{sec0}\n";
    main_tex += prose(rng, serial * 13 + 2);
    main_tex += "\\input{sec1}\n";
    if (rng() % 7 == 0) main_tex += "\\input{missingfile}\n";
    main_tex += "\\end{document}\n";

    bundle.files["main.tex"] = main_tex;
    bundle.files["sec0.tex"] = slots[1] + "\\input{parts/sub0}\n";
    bundle.files["sec1.tex"] = slots[2] + prose(rng, serial * 13 + 3);
    bundle.files["parts/sub0.tex"] = slots[3];
    corpus.bundles.push_back(std::move(bundle));
  }
  return corpus;
}

void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (const auto& bundle : corpus.bundles) {
    for (const auto& [rel, content] : bundle.files) {
      fs::path full = dir / bundle.name / rel;
      fs::create_directories(full.parent_path());
      std::ofstream out(full, std::ios::binary);
      out << content;
    }
  }
}

}  // namespace formine::testing
