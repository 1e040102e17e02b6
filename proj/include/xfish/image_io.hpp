#pragma once

#include <filesystem>
#include <string>

#include "xfish/image.hpp"

namespace xfish {

// Thin wrappers over the OpenCV codecs. Everything past decode/encode works
// on the plain rasters from image.hpp.

/// Decodes an image file as 3-channel RGB. Throws std::runtime_error on
/// unreadable or missing files.
RgbU8 read_rgb(const std::filesystem::path& path);

/// Decodes an image file as single-channel grayscale (color inputs are
/// reduced with the BT.601 weights by to_grayscale, not by the codec).
GrayU8 read_gray(const std::filesystem::path& path);

void write_png(const GrayU8& img, const std::filesystem::path& path);
void write_png(const RgbU8& img, const std::filesystem::path& path);

bool is_image_file(const std::filesystem::path& path);

/// Decodes a video file into frame_%06d.png under out_dir. Returns the
/// number of frames written. Requires a codec OpenCV can open.
int extract_frames(const std::filesystem::path& video, const std::filesystem::path& out_dir);

}  // namespace xfish
