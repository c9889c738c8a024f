#pragma once

#include <complex>
#include <vector>

#include "core/grid.hpp"

namespace hiflow {

// Complex 2D spectrum per channel. DC sits at bin (0, 0); the forward
// transform is unnormalized and the inverse divides by height * width.
class SpectralGrid {
public:
    SpectralGrid() = default;
    SpectralGrid(int channels, int height, int width);

    int channels() const { return channels_; }
    int height() const { return height_; }
    int width() const { return width_; }

    std::complex<double>& at(int c, int u, int v) { return data_[index(c, u, v)]; }
    const std::complex<double>& at(int c, int u, int v) const { return data_[index(c, u, v)]; }

    std::vector<std::complex<double>>& data() { return data_; }
    const std::vector<std::complex<double>>& data() const { return data_; }

private:
    std::size_t index(int c, int u, int v) const {
        return (static_cast<std::size_t>(c) * height_ + u) * width_ + v;
    }

    int channels_ = 0;
    int height_ = 0;
    int width_ = 0;
    std::vector<std::complex<double>> data_;
};

SpectralGrid forward_fft(const ImageGrid& grid);
ImageGrid inverse_fft(const SpectralGrid& spectrum);

// Radial frequency of FFT bin (u, v), normalized so the Nyquist corner maps
// to 1: f = sqrt((u'/(H/2))^2 + (v'/(W/2))^2) / sqrt(2) with signed u', v'.
double normalized_radial_frequency(int u, int v, int height, int width);

// Squared-magnitude Butterworth response, 1/(1 + (f/D)^(2n)): exactly 1 at
// f = 0 and exactly 0.5 at f = D.
double butterworth_response(double freq, double cutoff, int order);

// Per-bin [0, 1] weights over an FFT layout.
class FilterMask {
public:
    FilterMask() = default;
    FilterMask(int height, int width, std::vector<double> values,
               double cutoff = 0.0, int order = 0);

    int height() const { return height_; }
    int width() const { return width_; }
    double cutoff() const { return cutoff_; }
    int order() const { return order_; }
    double at(int u, int v) const { return values_[static_cast<std::size_t>(u) * width_ + v]; }
    const std::vector<double>& values() const { return values_; }

private:
    int height_ = 0;
    int width_ = 0;
    double cutoff_ = 0.0;
    int order_ = 0;
    std::vector<double> values_;
};

FilterMask butterworth_mask(int height, int width, double cutoff, int order);

// Binary projection mask: 1 where f <= cutoff, else 0. Used where an exact
// band partition is wanted (property tests, band metrics).
FilterMask ideal_lowpass_mask(int height, int width, double cutoff);

// target + weight * (IFFT(FFT(source) . mask) - IFFT(FFT(target) . mask)),
// computed per channel; the imaginary residue of the inverse transforms is
// discarded. weight 0 returns target unchanged.
ImageGrid lowpass_swap(const ImageGrid& target, const ImageGrid& source,
                       const FilterMask& mask, double weight);

// Circular Gaussian blur with exact transfer function exp(-2 pi^2 sigma^2 f^2)
// (f in cycles/pixel). sigma <= 0 is the identity.
ImageGrid gaussian_blur_periodic(const ImageGrid& grid, double sigma);

}  // namespace hiflow
