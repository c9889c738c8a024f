#include "core/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace hiflow {

ImageGrid::ImageGrid(int channels, int height, int width, double fill)
    : channels_(channels), height_(height), width_(width) {
    if (channels <= 0 || height <= 0 || width <= 0) {
        throw_invalid("grid dims must be positive, got " + std::to_string(channels) +
                      "x" + std::to_string(height) + "x" + std::to_string(width));
    }
    data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
}

bool ImageGrid::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double ImageGrid::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

ImageGrid& ImageGrid::operator+=(const ImageGrid& other) {
    require_same_dims(*this, other, "grid add");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

ImageGrid& ImageGrid::operator-=(const ImageGrid& other) {
    require_same_dims(*this, other, "grid sub");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

ImageGrid& ImageGrid::operator*=(double factor) {
    for (double& v : data_) v *= factor;
    return *this;
}

ImageGrid operator+(ImageGrid lhs, const ImageGrid& rhs) { return lhs += rhs; }
ImageGrid operator-(ImageGrid lhs, const ImageGrid& rhs) { return lhs -= rhs; }
ImageGrid operator*(ImageGrid grid, double factor) { return grid *= factor; }

void require_same_dims(const ImageGrid& a, const ImageGrid& b, const char* where) {
    if (!a.same_dims(b)) {
        throw_invalid(std::string(where) + ": dim mismatch " +
                      std::to_string(a.channels()) + "x" + std::to_string(a.height()) +
                      "x" + std::to_string(a.width()) + " vs " +
                      std::to_string(b.channels()) + "x" + std::to_string(b.height()) +
                      "x" + std::to_string(b.width()));
    }
}

namespace {

inline int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

// Catmull-Rom weights (Keys kernel, a = -1/2); sums to 1 for any phase.
inline void cubic_weights(double frac, double w[4]) {
    const double a = -0.5;
    double x;
    x = 1.0 + frac;  // sample at offset -1
    w[0] = ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
    x = frac;
    w[1] = ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    x = 1.0 - frac;
    w[2] = ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    x = 2.0 - frac;
    w[3] = ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
}

}  // namespace

ImageGrid upsample(const ImageGrid& grid, int factor, Interp method) {
    if (grid.empty()) throw_invalid("upsample: empty grid");
    if (factor < 1) throw_invalid("upsample: factor must be >= 1, got " + std::to_string(factor));
    if (factor == 1) return grid;

    const int ch = grid.channels();
    const int sh = grid.height();
    const int sw = grid.width();
    const int oh = sh * factor;
    const int ow = sw * factor;
    ImageGrid out(ch, oh, ow);

    if (method == Interp::Nearest) {
        for (int c = 0; c < ch; ++c)
            for (int y = 0; y < oh; ++y)
                for (int x = 0; x < ow; ++x)
                    out.at(c, y, x) = grid.at(c, y / factor, x / factor);
        return out;
    }

    for (int y = 0; y < oh; ++y) {
        const double sy = (y + 0.5) / factor - 0.5;
        const int y0 = static_cast<int>(std::floor(sy));
        const double ty = sy - y0;
        for (int x = 0; x < ow; ++x) {
            const double sx = (x + 0.5) / factor - 0.5;
            const int x0 = static_cast<int>(std::floor(sx));
            const double tx = sx - x0;

            if (method == Interp::Bilinear) {
                const int ya = clamp_index(y0, sh), yb = clamp_index(y0 + 1, sh);
                const int xa = clamp_index(x0, sw), xb = clamp_index(x0 + 1, sw);
                for (int c = 0; c < ch; ++c) {
                    const double top = (1.0 - tx) * grid.at(c, ya, xa) + tx * grid.at(c, ya, xb);
                    const double bot = (1.0 - tx) * grid.at(c, yb, xa) + tx * grid.at(c, yb, xb);
                    out.at(c, y, x) = (1.0 - ty) * top + ty * bot;
                }
            } else {
                double wy[4], wx[4];
                cubic_weights(ty, wy);
                cubic_weights(tx, wx);
                for (int c = 0; c < ch; ++c) {
                    double acc = 0.0;
                    for (int j = 0; j < 4; ++j) {
                        const int yy = clamp_index(y0 - 1 + j, sh);
                        double row = 0.0;
                        for (int i = 0; i < 4; ++i)
                            row += wx[i] * grid.at(c, yy, clamp_index(x0 - 1 + i, sw));
                        acc += wy[j] * row;
                    }
                    out.at(c, y, x) = acc;
                }
            }
        }
    }
    return out;
}

ImageGrid downsample(const ImageGrid& grid, int factor) {
    if (grid.empty()) throw_invalid("downsample: empty grid");
    if (factor < 1) throw_invalid("downsample: factor must be >= 1, got " + std::to_string(factor));
    if (factor == 1) return grid;
    if (grid.height() % factor != 0 || grid.width() % factor != 0) {
        throw_invalid("downsample: dims " + std::to_string(grid.height()) + "x" +
                      std::to_string(grid.width()) + " not divisible by factor " +
                      std::to_string(factor));
    }
    const int oh = grid.height() / factor;
    const int ow = grid.width() / factor;
    const double inv = 1.0 / (static_cast<double>(factor) * factor);
    ImageGrid out(grid.channels(), oh, ow);
    for (int c = 0; c < grid.channels(); ++c)
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                double acc = 0.0;
                for (int j = 0; j < factor; ++j)
                    for (int i = 0; i < factor; ++i)
                        acc += grid.at(c, y * factor + j, x * factor + i);
                out.at(c, y, x) = acc * inv;
            }
    return out;
}

ImageGrid quantize_f32(const ImageGrid& grid) {
    ImageGrid out = grid;
    for (double& v : out.data()) v = static_cast<double>(static_cast<float>(v));
    return out;
}

std::uint64_t grid_hash(const ImageGrid& grid) {
    const std::uint64_t prime = 1099511628211ull;
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&](std::uint64_t word, int bytes) {
        for (int i = 0; i < bytes; ++i) {
            h ^= (word >> (8 * i)) & 0xffu;
            h *= prime;
        }
    };
    mix(static_cast<std::uint32_t>(grid.channels()), 4);
    mix(static_cast<std::uint32_t>(grid.height()), 4);
    mix(static_cast<std::uint32_t>(grid.width()), 4);
    for (double v : grid.data()) mix(std::bit_cast<std::uint64_t>(v), 8);
    return h;
}

}  // namespace hiflow
