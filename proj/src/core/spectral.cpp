#include "core/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "core/errors.hpp"

namespace hiflow {

namespace {

// FFTW plan creation/destruction is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    fftw_complex* ptr = nullptr;
    explicit FftwBuffer(std::size_t n) {
        ptr = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    }
    ~FftwBuffer() { fftw_free(ptr); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
};

void transform_channel(const std::complex<double>* in, std::complex<double>* out,
                       int height, int width, int sign) {
    const std::size_t n = static_cast<std::size_t>(height) * width;
    FftwBuffer buf_in(n), buf_out(n);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_2d(height, width, buf_in.ptr, buf_out.ptr, sign,
                                FFTW_ESTIMATE);
    }
    for (std::size_t i = 0; i < n; ++i) {
        buf_in.ptr[i][0] = in[i].real();
        buf_in.ptr[i][1] = in[i].imag();
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::complex<double>(buf_out.ptr[i][0], buf_out.ptr[i][1]);
}

}  // namespace

SpectralGrid::SpectralGrid(int channels, int height, int width)
    : channels_(channels), height_(height), width_(width) {
    if (channels <= 0 || height <= 0 || width <= 0)
        throw_invalid("spectral grid dims must be positive");
    data_.assign(static_cast<std::size_t>(channels) * height * width, {0.0, 0.0});
}

SpectralGrid forward_fft(const ImageGrid& grid) {
    if (grid.empty()) throw_invalid("forward_fft: empty grid");
    const int ch = grid.channels(), h = grid.height(), w = grid.width();
    const std::size_t n = static_cast<std::size_t>(h) * w;
    SpectralGrid out(ch, h, w);
    std::vector<std::complex<double>> in(n);
    for (int c = 0; c < ch; ++c) {
        const double* src = grid.data().data() + c * n;
        for (std::size_t i = 0; i < n; ++i) in[i] = {src[i], 0.0};
        transform_channel(in.data(), out.data().data() + c * n, h, w, FFTW_FORWARD);
    }
    return out;
}

ImageGrid inverse_fft(const SpectralGrid& spectrum) {
    const int ch = spectrum.channels(), h = spectrum.height(), w = spectrum.width();
    if (ch <= 0) throw_invalid("inverse_fft: empty spectrum");
    const std::size_t n = static_cast<std::size_t>(h) * w;
    const double norm = 1.0 / static_cast<double>(n);
    ImageGrid out(ch, h, w);
    std::vector<std::complex<double>> tmp(n);
    for (int c = 0; c < ch; ++c) {
        transform_channel(spectrum.data().data() + c * n, tmp.data(), h, w, FFTW_BACKWARD);
        double* dst = out.data().data() + c * n;
        for (std::size_t i = 0; i < n; ++i) dst[i] = tmp[i].real() * norm;
    }
    return out;
}

double normalized_radial_frequency(int u, int v, int height, int width) {
    const int su = (u <= height / 2) ? u : u - height;
    const int sv = (v <= width / 2) ? v : v - width;
    const double fu = su / (height / 2.0);
    const double fv = sv / (width / 2.0);
    return std::sqrt(fu * fu + fv * fv) / std::numbers::sqrt2;
}

double butterworth_response(double freq, double cutoff, int order) {
    if (!(cutoff > 0.0) || cutoff > 1.0)
        throw_invalid("butterworth: cutoff must be in (0, 1], got " + std::to_string(cutoff));
    if (order < 1) throw_invalid("butterworth: order must be >= 1");
    return 1.0 / (1.0 + std::pow(freq / cutoff, 2.0 * order));
}

FilterMask::FilterMask(int height, int width, std::vector<double> values,
                       double cutoff, int order)
    : height_(height), width_(width), cutoff_(cutoff), order_(order),
      values_(std::move(values)) {
    if (height <= 0 || width <= 0) throw_invalid("filter mask dims must be positive");
    if (values_.size() != static_cast<std::size_t>(height) * width)
        throw_invalid("filter mask value count does not match dims");
    for (double v : values_)
        if (!(v >= 0.0 && v <= 1.0)) throw_invalid("filter mask values must be in [0, 1]");
}

FilterMask butterworth_mask(int height, int width, double cutoff, int order) {
    if (height <= 0 || width <= 0) throw_invalid("butterworth_mask: dims must be positive");
    if (!(cutoff > 0.0) || cutoff > 1.0)
        throw_invalid("butterworth_mask: cutoff must be in (0, 1], got " + std::to_string(cutoff));
    if (order < 1) throw_invalid("butterworth_mask: order must be >= 1");
    std::vector<double> values(static_cast<std::size_t>(height) * width);
    for (int u = 0; u < height; ++u)
        for (int v = 0; v < width; ++v)
            values[static_cast<std::size_t>(u) * width + v] =
                butterworth_response(normalized_radial_frequency(u, v, height, width),
                                     cutoff, order);
    return FilterMask(height, width, std::move(values), cutoff, order);
}

FilterMask ideal_lowpass_mask(int height, int width, double cutoff) {
    if (height <= 0 || width <= 0) throw_invalid("ideal_lowpass_mask: dims must be positive");
    std::vector<double> values(static_cast<std::size_t>(height) * width);
    for (int u = 0; u < height; ++u)
        for (int v = 0; v < width; ++v)
            values[static_cast<std::size_t>(u) * width + v] =
                normalized_radial_frequency(u, v, height, width) <= cutoff ? 1.0 : 0.0;
    return FilterMask(height, width, std::move(values), cutoff, 0);
}

ImageGrid lowpass_swap(const ImageGrid& target, const ImageGrid& source,
                       const FilterMask& mask, double weight) {
    require_same_dims(target, source, "lowpass_swap");
    if (mask.height() != target.height() || mask.width() != target.width())
        throw_invalid("lowpass_swap: mask dims do not match grids");
    if (!(weight >= 0.0 && weight <= 1.0))
        throw_invalid("lowpass_swap: weight must be in [0, 1], got " + std::to_string(weight));
    if (weight == 0.0) return target;

    SpectralGrid st = forward_fft(target);
    SpectralGrid ss = forward_fft(source);
    for (int c = 0; c < st.channels(); ++c)
        for (int u = 0; u < st.height(); ++u)
            for (int v = 0; v < st.width(); ++v) {
                const double m = mask.at(u, v);
                st.at(c, u, v) *= m;
                ss.at(c, u, v) *= m;
            }
    ImageGrid low_target = inverse_fft(st);
    ImageGrid low_source = inverse_fft(ss);
    ImageGrid out = target;
    double* dst = out.data().data();
    const double* ls = low_source.data().data();
    const double* lt = low_target.data().data();
    for (std::size_t i = 0; i < out.size(); ++i) dst[i] += weight * (ls[i] - lt[i]);
    return out;
}

ImageGrid gaussian_blur_periodic(const ImageGrid& grid, double sigma) {
    if (grid.empty()) throw_invalid("gaussian_blur_periodic: empty grid");
    if (sigma <= 0.0) return grid;
    const int h = grid.height(), w = grid.width();
    SpectralGrid s = forward_fft(grid);
    const double k = -2.0 * std::numbers::pi * std::numbers::pi * sigma * sigma;
    for (int u = 0; u < h; ++u) {
        const int su = (u <= h / 2) ? u : u - h;
        const double fu = static_cast<double>(su) / h;
        for (int v = 0; v < w; ++v) {
            const int sv = (v <= w / 2) ? v : v - w;
            const double fv = static_cast<double>(sv) / w;
            const double g = std::exp(k * (fu * fu + fv * fv));
            for (int c = 0; c < s.channels(); ++c) s.at(c, u, v) *= g;
        }
    }
    return inverse_fft(s);
}

}  // namespace hiflow
