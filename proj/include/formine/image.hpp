#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>

namespace formine {

/// Grayscale raster, row-major, 0 = black ink, 255 = white background.
using GrayImage =
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct CropBox {
  Eigen::Index top = 0;
  Eigen::Index left = 0;
  Eigen::Index bottom = 0;  // inclusive
  Eigen::Index right = 0;   // inclusive
};

/// Bounding box of pixels darker than the luminance threshold, or nullopt
/// when the image holds no ink.
std::optional<CropBox> content_bbox(const GrayImage& image, int threshold = 250);

/// Sub-image around the content box expanded by margin_px, clamped to the
/// image bounds. Raises empty_crop when nothing is darker than threshold.
GrayImage crop_to_content(const GrayImage& image, int margin_px = 8, int threshold = 250);

GrayImage load_png_gray(const std::filesystem::path& path);
void save_png_gray(const std::filesystem::path& path, const GrayImage& image);

}  // namespace formine
