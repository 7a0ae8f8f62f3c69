#pragma once

#include <filesystem>
#include <string>

#include "hybridzoom/image.hpp"

namespace hz {

/// Reads an 8- or 16-bit PNG (or anything imgcodecs decodes) into [0,1].
/// Gray files give 1 channel, color files 3 (RGB order), alpha is dropped.
/// Decode failures are ErrorKind::Io.
PlanarImage read_image(const std::filesystem::path& path);

/// 16-bit PNG, value = round(65535 * clamp(v, 0, 1)). 1 or 3 channels.
/// Written to a temporary sibling and renamed, so failures leave no file.
void write_png16(const std::filesystem::path& path, const PlanarImage& img);

/// 8-bit grayscale PNG, value = round(255 * m).
void write_mask_png8(const std::filesystem::path& path, const Mask& m);

/// Writes text atomically (temporary sibling + rename).
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace hz
