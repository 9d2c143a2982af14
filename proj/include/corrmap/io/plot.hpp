#pragma once

#include <string>
#include <vector>

#include "corrmap/core/image.hpp"

namespace corrmap::io {

// Minimal chart emitter: axes, grid, one polyline with markers, numeric tick
// labels in a built-in 3x5 digit font.
ImageU8 line_chart(const std::vector<double>& xs, const std::vector<double>& ys,
                   int width = 480, int height = 320);

// Side-by-side panel composition with a thin separator.
ImageU8 hstack(const std::vector<const ImageU8*>& panels, int pad = 2);

}  // namespace corrmap::io
