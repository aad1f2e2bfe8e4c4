#include "formine/source_graph.hpp"

#include <algorithm>
#include <optional>
#include <tuple>

#include "formine/errors.hpp"

namespace formine {

namespace {

bool contains_token(const std::string& text, std::string_view command) {
  // a command match must not continue with a letter (\usepackagex is not \usepackage)
  size_t pos = 0;
  while ((pos = text.find(command, pos)) != std::string::npos) {
    size_t end = pos + command.size();
    if (end >= text.size() || !std::isalpha(static_cast<unsigned char>(text[end]))) return true;
    pos = end;
  }
  return false;
}

struct Splicer {
  const SourceBundle& bundle;
  Warnings* warnings;
  FlatDocument out;
  std::vector<std::string> chain;  // active include chain, for cycle detection

  // Resolves `name` against the bundle, with and without a .tex extension.
  std::optional<std::string> lookup(const std::string& name) const {
    if (bundle.files.count(name)) return name;
    if (bundle.files.count(name + ".tex")) return name + ".tex";
    return std::nullopt;
  }

  void append_text(std::string_view piece, const std::string& path) {
    if (piece.empty()) return;
    size_t begin = out.text.size();
    out.text.append(piece);
    if (!out.provenance.empty() && out.provenance.back().path == path &&
        out.provenance.back().end == begin) {
      out.provenance.back().end = out.text.size();
    } else {
      out.provenance.push_back({begin, out.text.size(), path});
    }
  }

  void splice_file(const std::string& path) {
    if (std::find(chain.begin(), chain.end(), path) != chain.end())
      raise(ErrorCode::include_cycle, "include cycle through " + path);
    chain.push_back(path);
    std::string content = strip_comments(sanitize_utf8(bundle.files.at(path)));
    size_t i = 0, flushed = 0;
    while (i < content.size()) {
      if (content[i] != '\\') {
        ++i;
        continue;
      }
      if (i + 1 < content.size() && !std::isalpha(static_cast<unsigned char>(content[i + 1]))) {
        i += 2;  // control symbol; also keeps \\ from opening a bogus command
        continue;
      }
      size_t j = i + 1;
      while (j < content.size() && std::isalpha(static_cast<unsigned char>(content[j]))) ++j;
      std::string_view word(content.data() + i + 1, j - i - 1);
      if (word != "input" && word != "include") {
        i = j;
        continue;
      }
      size_t k = j;
      while (k < content.size() && (content[k] == ' ' || content[k] == '\t')) ++k;
      if (k >= content.size() || content[k] != '{') {
        i = j;
        continue;
      }
      size_t close = content.find('}', k + 1);
      if (close == std::string::npos) {
        i = j;
        continue;
      }
      std::string name = content.substr(k + 1, close - k - 1);
      // trim surrounding whitespace in the argument
      while (!name.empty() && std::isspace(static_cast<unsigned char>(name.front())))
        name.erase(name.begin());
      while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back())))
        name.pop_back();
      append_text(std::string_view(content).substr(flushed, i - flushed), path);
      if (auto target = lookup(name)) {
        splice_file(*target);
      } else {
        warn(warnings, "include_resolution", "missing include: " + name);
      }
      i = flushed = close + 1;
    }
    append_text(std::string_view(content).substr(flushed), path);
    chain.pop_back();
  }
};

}  // namespace

std::string detect_main_file(const SourceBundle& bundle) {
  if (bundle.files.empty()) raise(ErrorCode::empty_bundle, "bundle " + bundle.origin_id);
  const std::string* best = nullptr;
  std::tuple<int, int, int, size_t> best_score;
  for (const auto& [path, content] : bundle.files) {
    if (!has_tex_extension(path)) continue;
    std::tuple<int, int, int, size_t> score{
        contains_token(content, "\\documentclass") ? 1 : 0,
        contains_token(content, "\\begin{document}") ? 1 : 0,
        contains_token(content, "\\usepackage") ? 1 : 0, content.size()};
    // ties fall through to lexicographic path order: the map iterates in
    // path order, so strict improvement keeps the earliest path
    if (!best || score > best_score) {
      best = &path;
      best_score = score;
    }
  }
  if (!best)
    raise(ErrorCode::no_main_file, "no TeX file in bundle " + bundle.origin_id);
  return *best;
}

FlatDocument resolve_includes(const SourceBundle& bundle, const std::string& main,
                              Warnings* warnings) {
  if (!bundle.files.count(main))
    raise(ErrorCode::no_main_file, "main file not in bundle: " + main);
  Splicer splicer{bundle, warnings, {}, {}};
  splicer.out.main_path = main;
  splicer.splice_file(main);
  return std::move(splicer.out);
}

FlatDocument remove_ranges(const FlatDocument& doc,
                           const std::vector<std::pair<size_t, size_t>>& ranges) {
  FlatDocument out;
  out.main_path = doc.main_path;
  out.text.reserve(doc.text.size());
  size_t cursor = 0;
  auto keep = [&](size_t begin, size_t end) {
    if (begin >= end) return;
    // copy text and the intersecting provenance, shifted left
    size_t shift_base = out.text.size();
    out.text.append(doc.text, begin, end - begin);
    for (const auto& span : doc.provenance) {
      size_t lo = std::max(span.begin, begin), hi = std::min(span.end, end);
      if (lo >= hi) continue;
      size_t nb = shift_base + (lo - begin), ne = shift_base + (hi - begin);
      if (!out.provenance.empty() && out.provenance.back().path == span.path &&
          out.provenance.back().end == nb) {
        out.provenance.back().end = ne;
      } else {
        out.provenance.push_back({nb, ne, span.path});
      }
    }
  };
  for (const auto& [begin, end] : ranges) {
    keep(cursor, begin);
    cursor = std::max(cursor, end);
  }
  keep(cursor, doc.text.size());
  return out;
}

std::string strip_comments(std::string_view src) {
  std::string out;
  out.reserve(src.size());
  size_t i = 0;
  while (i < src.size()) {
    char c = src[i];
    if (c == '\\' && i + 1 < src.size()) {
      out += c;
      out += src[i + 1];
      i += 2;
      continue;
    }
    if (c == '%') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;  // the newline itself is copied on the next round
    }
    out += c;
    ++i;
  }
  return out;
}

std::string sanitize_utf8(std::string_view bytes) {
  static constexpr char kReplacement[] = "\xEF\xBF\xBD";
  std::string out;
  out.reserve(bytes.size());
  size_t i = 0;
  while (i < bytes.size()) {
    unsigned char lead = static_cast<unsigned char>(bytes[i]);
    if (lead < 0x80) {
      out += static_cast<char>(lead);
      ++i;
      continue;
    }
    size_t len = 0;
    unsigned cp = 0;
    if ((lead & 0xE0) == 0xC0) {
      len = 2;
      cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
      len = 3;
      cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
      len = 4;
      cp = lead & 0x07;
    } else {
      out += kReplacement;
      ++i;
      continue;
    }
    bool ok = i + len <= bytes.size();
    for (size_t k = 1; ok && k < len; ++k) {
      unsigned char cont = static_cast<unsigned char>(bytes[i + k]);
      if ((cont & 0xC0) != 0x80)
        ok = false;
      else
        cp = (cp << 6) | (cont & 0x3F);
    }
    if (ok) {
      // reject overlong forms, surrogates, and out-of-range code points
      static constexpr unsigned kMin[] = {0, 0, 0x80, 0x800, 0x10000};
      if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) ok = false;
    }
    if (ok) {
      out.append(bytes.substr(i, len));
      i += len;
    } else {
      out += kReplacement;
      ++i;
    }
  }
  return out;
}

}  // namespace formine
