#pragma once

#include <string>

#include "corrmap/core/image.hpp"

namespace corrmap::io {

// 8-bit PNG round trip. Gray inputs are expanded when rgb is requested;
// palette/16-bit/alpha inputs are normalized down to 8-bit rgb or gray.
ImageU8 read_png(const std::string& path, int want_channels /* 1 or 3 */);
void write_png(const std::string& path, const ImageU8& img);

// Mask helpers: on-disk masks are 0/255 gray, in memory they are 0/1.
Mask read_mask_png(const std::string& path);
void write_mask_png(const std::string& path, const Mask& mask);

}  // namespace corrmap::io
