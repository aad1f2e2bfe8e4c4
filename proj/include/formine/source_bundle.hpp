#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "formine/warnings.hpp"

namespace formine {

/// One paper's source files, keyed by relative path. Paths are unique,
/// relative, and free of `..` escapes; the map is ordered so iteration is
/// deterministic.
struct SourceBundle {
  std::string origin_id;
  std::map<std::string, std::string> files;
};

bool has_tex_extension(const std::string& path);

/// Loads a bundle from its on-disk form: a directory tree, a (optionally
/// gzip-compressed) tar archive, or a plain gzip-compressed single TeX file.
/// Entries with unsafe paths are skipped with a warning.
SourceBundle load_bundle(const std::filesystem::path& path, Warnings* warnings = nullptr);

/// Parses an in-memory ustar archive. Exposed for tests.
SourceBundle parse_tar(const std::string& bytes, const std::string& origin_id,
                       Warnings* warnings = nullptr);

/// True if the byte buffer starts like a tar archive (ustar magic or a
/// plausible header block checksum).
bool looks_like_tar(const std::string& bytes);

}  // namespace formine
