#pragma once

#include <string>

#include "core/grid.hpp"

namespace hiflow {

// Binary PPM (P6, maxval 255). Values are clamped to [0, 1] and rounded half
// up to a byte; single-channel grids are replicated to RGB. Grids with other
// channel counts are rejected.
void write_ppm(const ImageGrid& grid, const std::string& path);

// Reads binary PGM (P5) or PPM (P6) with maxval <= 255 into a 1- or
// 3-channel grid scaled to [0, 1].
ImageGrid read_image(const std::string& path);

}  // namespace hiflow
