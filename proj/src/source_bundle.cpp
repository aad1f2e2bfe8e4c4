#include "formine/source_bundle.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "formine/errors.hpp"

namespace fs = std::filesystem;

namespace formine {

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::io_error, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

bool is_gzip(const std::string& bytes) {
  return bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1f &&
         static_cast<unsigned char>(bytes[1]) == 0x8b;
}

std::string gunzip(const std::string& bytes) {
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
    raise(ErrorCode::bad_archive, "inflateInit failed");
  std::string out;
  std::vector<char> chunk(1 << 16);
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
  zs.avail_in = static_cast<uInt>(bytes.size());
  int rc = Z_OK;
  do {
    zs.next_out = reinterpret_cast<Bytef*>(chunk.data());
    zs.avail_out = static_cast<uInt>(chunk.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      raise(ErrorCode::bad_archive, "gzip stream is corrupt");
    }
    out.append(chunk.data(), chunk.size() - zs.avail_out);
  } while (rc != Z_STREAM_END && zs.avail_in > 0);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END) raise(ErrorCode::bad_archive, "gzip stream is truncated");
  return out;
}

// Relative, dot-free form of an archive entry name; empty when the path is
// unsafe (absolute or escaping the root).
std::string sanitize_entry_path(std::string name) {
  while (name.rfind("./", 0) == 0) name.erase(0, 2);
  if (name.empty() || name.front() == '/') return {};
  std::vector<std::string> parts;
  std::stringstream ss(name);
  std::string part;
  while (std::getline(ss, part, '/')) {
    if (part.empty() || part == ".") continue;
    if (part == "..") {
      if (parts.empty()) return {};
      parts.pop_back();
      continue;
    }
    parts.push_back(part);
  }
  if (parts.empty()) return {};
  std::string out = parts.front();
  for (size_t i = 1; i < parts.size(); ++i) out += "/" + parts[i];
  return out;
}

size_t parse_octal(const char* field, size_t width) {
  size_t value = 0;
  for (size_t i = 0; i < width && field[i]; ++i) {
    if (field[i] == ' ') continue;
    if (field[i] < '0' || field[i] > '7') break;
    value = value * 8 + static_cast<size_t>(field[i] - '0');
  }
  return value;
}

bool block_is_zero(const char* block) {
  for (size_t i = 0; i < 512; ++i)
    if (block[i] != 0) return false;
  return true;
}

}  // namespace

bool has_tex_extension(const std::string& path) {
  auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return false;
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == "tex" || ext == "latex" || ext == "ltx";
}

bool looks_like_tar(const std::string& bytes) {
  if (bytes.size() < 512) return false;
  if (std::memcmp(bytes.data() + 257, "ustar", 5) == 0) return true;
  // pre-POSIX tar: validate the header checksum
  const char* block = bytes.data();
  size_t stored = parse_octal(block + 148, 8);
  unsigned long sum = 0;
  for (size_t i = 0; i < 512; ++i)
    sum += (i >= 148 && i < 156) ? ' ' : static_cast<unsigned char>(block[i]);
  return stored != 0 && stored == sum;
}

SourceBundle parse_tar(const std::string& bytes, const std::string& origin_id,
                       Warnings* warnings) {
  SourceBundle bundle;
  bundle.origin_id = origin_id;
  size_t pos = 0;
  std::string pending_long_name;
  while (pos + 512 <= bytes.size()) {
    const char* block = bytes.data() + pos;
    if (block_is_zero(block)) break;
    char name_field[101] = {};
    std::memcpy(name_field, block, 100);
    char prefix_field[156] = {};
    std::memcpy(prefix_field, block + 345, 155);
    size_t size = parse_octal(block + 124, 12);
    char type = block[156];
    pos += 512;
    size_t data_blocks = (size + 511) / 512;
    if (pos + data_blocks * 512 > bytes.size() && size > 0) {
      warn(warnings, "bundle_load", "tar archive is truncated");
      break;
    }
    std::string name = name_field;
    if (prefix_field[0] && std::memcmp(block + 257, "ustar", 5) == 0)
      name = std::string(prefix_field) + "/" + name;
    if (!pending_long_name.empty()) {
      name = pending_long_name;
      pending_long_name.clear();
    }
    if (type == 'L') {  // GNU long-name record: data holds the real name
      pending_long_name = std::string(bytes.data() + pos, size);
      while (!pending_long_name.empty() && pending_long_name.back() == '\0')
        pending_long_name.pop_back();
    } else if (type == '0' || type == '\0') {
      std::string safe = sanitize_entry_path(name);
      if (safe.empty()) {
        warn(warnings, "bundle_load", "skipped unsafe archive path: " + name);
      } else {
        bundle.files[safe] = std::string(bytes.data() + pos, size);
      }
    }
    // directories, pax headers, links: no file content to keep
    pos += data_blocks * 512;
  }
  return bundle;
}

SourceBundle load_bundle(const fs::path& path, Warnings* warnings) {
  std::string origin = path.filename().string();
  if (fs::is_directory(path)) {
    SourceBundle bundle;
    bundle.origin_id = origin;
    for (const auto& entry : fs::recursive_directory_iterator(path)) {
      if (!entry.is_regular_file()) continue;
      std::string rel = fs::relative(entry.path(), path).generic_string();
      bundle.files[rel] = read_file(entry.path());
    }
    return bundle;
  }
  if (!fs::is_regular_file(path)) raise(ErrorCode::io_error, "no such bundle: " + path.string());
  std::string bytes = read_file(path);
  if (is_gzip(bytes)) bytes = gunzip(bytes);
  if (looks_like_tar(bytes)) return parse_tar(bytes, origin, warnings);
  // single gzip-compressed TeX file, the other common arXiv form
  SourceBundle bundle;
  bundle.origin_id = origin;
  bundle.files["main.tex"] = std::move(bytes);
  return bundle;
}

}  // namespace formine
