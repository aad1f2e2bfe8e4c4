#include "formine/image.hpp"

#include <png.h>

#include <algorithm>
#include <cstring>
#include <vector>

#include "formine/errors.hpp"

namespace formine {

std::optional<CropBox> content_bbox(const GrayImage& image, int threshold) {
  CropBox box{image.rows(), image.cols(), -1, -1};
  for (Eigen::Index r = 0; r < image.rows(); ++r) {
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      if (image(r, c) >= threshold) continue;
      box.top = std::min(box.top, r);
      box.left = std::min(box.left, c);
      box.bottom = std::max(box.bottom, r);
      box.right = std::max(box.right, c);
    }
  }
  if (box.bottom < 0) return std::nullopt;
  return box;
}

GrayImage crop_to_content(const GrayImage& image, int margin_px, int threshold) {
  auto box = content_bbox(image, threshold);
  if (!box) raise(ErrorCode::empty_crop, "no pixel below threshold");
  Eigen::Index top = std::max<Eigen::Index>(0, box->top - margin_px);
  Eigen::Index left = std::max<Eigen::Index>(0, box->left - margin_px);
  Eigen::Index bottom = std::min<Eigen::Index>(image.rows() - 1, box->bottom + margin_px);
  Eigen::Index right = std::min<Eigen::Index>(image.cols() - 1, box->right + margin_px);
  return image.block(top, left, bottom - top + 1, right - left + 1);
}

GrayImage load_png_gray(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str()))
    raise(ErrorCode::io_error, "cannot read PNG " + path.string() + ": " + png.message);
  png.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    std::string message = png.message;
    png_image_free(&png);
    raise(ErrorCode::io_error, "cannot decode PNG " + path.string() + ": " + message);
  }
  GrayImage image(png.height, png.width);
  std::memcpy(image.data(), buffer.data(), buffer.size());
  return image;
}

void save_png_gray(const std::filesystem::path& path, const GrayImage& image) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.cols());
  png.height = static_cast<png_uint_32>(image.rows());
  png.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, image.data(), 0, nullptr))
    raise(ErrorCode::io_error, "cannot write PNG " + path.string() + ": " + png.message);
}

}  // namespace formine
