#pragma once

#include <string>

#include "gfuse/image.hpp"

namespace gfuse {

// Decodes an 8- or 16-bit grayscale or RGB PNG/BMP and scales to [0,1].
Image load_image(const std::string& path);

// Writes 8-bit PNG or BMP depending on the extension; values are clamped
// and rounded to 255 levels.
void save_image(const Image& img, const std::string& path);

}  // namespace gfuse
