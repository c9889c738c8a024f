#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace hiflow {

enum class Interp {
    Nearest = 0,
    Bilinear = 1,
    Bicubic = 2,
};

// Dense multi-channel 2D grid of 64-bit floats, row-major per channel.
// Values are immutable by convention once an operation returns; all public
// operations produce finite values for finite inputs.
class ImageGrid {
public:
    ImageGrid() = default;
    ImageGrid(int channels, int height, int width, double fill = 0.0);

    int channels() const { return channels_; }
    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& at(int c, int y, int x) { return data_[index(c, y, x)]; }
    double at(int c, int y, int x) const { return data_[index(c, y, x)]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_dims(const ImageGrid& other) const {
        return channels_ == other.channels_ && height_ == other.height_ &&
               width_ == other.width_;
    }
    bool all_finite() const;
    double max_abs() const;

    ImageGrid& operator+=(const ImageGrid& other);
    ImageGrid& operator-=(const ImageGrid& other);
    ImageGrid& operator*=(double factor);

private:
    std::size_t index(int c, int y, int x) const {
        return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
    }

    int channels_ = 0;
    int height_ = 0;
    int width_ = 0;
    std::vector<double> data_;
};

ImageGrid operator+(ImageGrid lhs, const ImageGrid& rhs);
ImageGrid operator-(ImageGrid lhs, const ImageGrid& rhs);
ImageGrid operator*(ImageGrid grid, double factor);

// Throws InvalidArgument naming `where` when the two grids disagree in shape.
void require_same_dims(const ImageGrid& a, const ImageGrid& b, const char* where);

// Interpolation upsampling by an integer factor. Output pixels are sampled at
// half-pixel centers with edge clamping; nearest keeps source pixels exactly
// and factor 1 is the identity for every method.
ImageGrid upsample(const ImageGrid& grid, int factor, Interp method);

// Box-filter average over factor x factor blocks; dims must divide evenly.
ImageGrid downsample(const ImageGrid& grid, int factor);

// Round every value to the nearest binary32 and back; the lattice used by the
// trajectory dump format and the cascade stage hand-off.
ImageGrid quantize_f32(const ImageGrid& grid);

// FNV-1a over dims and raw little-endian doubles.
std::uint64_t grid_hash(const ImageGrid& grid);

}  // namespace hiflow
