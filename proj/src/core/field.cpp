#include "core/field.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "core/errors.hpp"
#include "core/schedule.hpp"
#include "core/spectral.hpp"

namespace hiflow {

VelocityField::VelocityField(int channels, int height, int width)
    : channels_(channels), height_(height), width_(width) {
    if (channels <= 0 || height <= 0 || width <= 0)
        throw_invalid("velocity field dims must be positive");
}

void VelocityField::check_input(const ImageGrid& x, double t) const {
    if (x.channels() != channels_ || x.height() != height_ || x.width() != width_)
        throw_invalid("evaluate: state dims do not match field context");
    if (!(t > 0.0)) throw_invalid("evaluate: velocity is defined for t > 0 only");
    if (t > 1.0) throw_invalid("evaluate: t must be <= 1");
}

GaussianField::GaussianField(double mu0, double sigma0, int channels, int height, int width)
    : VelocityField(channels, height, width), mu0_(mu0), sigma0_(sigma0) {
    if (!(sigma0 > 0.0)) throw_invalid("gaussian field: sigma0 must be > 0");
}

ImageGrid GaussianField::evaluate(const ImageGrid& x, double t) const {
    check_input(x, t);
    const double s2 = (1.0 - t) * (1.0 - t) * sigma0_ * sigma0_ + t * t;
    const double coef = (1.0 - t) * sigma0_ * sigma0_ / s2;
    const double mean_t = (1.0 - t) * mu0_;
    ImageGrid v = x;
    for (double& val : v.data()) {
        const double e0 = mu0_ + coef * (val - mean_t);
        val = (val - e0) / t;
    }
    return v;
}

AnchoredField::AnchoredField(ImageGrid target)
    : VelocityField(target.channels(), target.height(), target.width()),
      target_(std::move(target)) {}

ImageGrid AnchoredField::evaluate(const ImageGrid& x, double t) const {
    check_input(x, t);
    ImageGrid v = x;
    v -= target_;
    v *= 1.0 / t;
    return v;
}

CoarseToFineField::CoarseToFineField(ImageGrid target, double blur0)
    : VelocityField(target.channels(), target.height(), target.width()),
      target_(std::move(target)), blur0_(blur0) {
    if (!(blur0 > 0.0)) throw_invalid("coarse2fine field: blur0 must be > 0");
}

ImageGrid CoarseToFineField::evaluate(const ImageGrid& x, double t) const {
    check_input(x, t);
    ImageGrid v = x;
    v -= gaussian_blur_periodic(target_, blur0_ * t);
    v *= 1.0 / t;
    return v;
}

void MlpWeights::validate() const {
    if (layers.empty()) throw_format("mlp weights: no layers");
    if (layers.front().in != 4) throw_format("mlp weights: first layer must take 4 inputs");
    if (layers.back().out != 1) throw_format("mlp weights: last layer must emit 1 output");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const MlpLayer& l = layers[i];
        if (l.in == 0 || l.out == 0) throw_format("mlp weights: zero-sized layer");
        if (l.weights.size() != static_cast<std::size_t>(l.in) * l.out ||
            l.biases.size() != l.out)
            throw_format("mlp weights: declared sizes do not match stored arrays");
        if (i > 0 && layers[i - 1].out != l.in)
            throw_format("mlp weights: layer sizes do not chain");
    }
}

namespace {

constexpr char kMlpMagic[4] = {'H', 'F', 'W', '1'};

void append_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xffu));
}

void append_f32(std::vector<unsigned char>& buf, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    append_u32(buf, bits);
}

struct ByteReader {
    const unsigned char* p;
    std::size_t n;
    std::size_t pos = 0;
    const std::string& path;

    std::uint32_t u32() {
        if (pos + 4 > n) throw_format(path + ": truncated weight file");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    float f32() {
        const std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
};

}  // namespace

void save_mlp_weights(const MlpWeights& weights, const std::string& path) {
    weights.validate();
    std::vector<unsigned char> buf;
    buf.insert(buf.end(), kMlpMagic, kMlpMagic + 4);
    append_u32(buf, static_cast<std::uint32_t>(weights.layers.size()));
    for (const MlpLayer& l : weights.layers) {
        append_u32(buf, l.in);
        append_u32(buf, l.out);
        for (float w : l.weights) append_f32(buf, w);
        for (float b : l.biases) append_f32(buf, b);
    }
    const std::uint32_t crc =
        static_cast<std::uint32_t>(crc32(0L, buf.data(), static_cast<uInt>(buf.size())));
    append_u32(buf, crc);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_io("save_mlp_weights: cannot open " + path);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw_io("save_mlp_weights: write failed for " + path);
}

MlpWeights load_mlp_weights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io("load_mlp_weights: cannot open " + path);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (buf.size() < 12 || std::memcmp(buf.data(), kMlpMagic, 4) != 0)
        throw_format(path + ": bad magic, expected HFW1");
    const std::uint32_t stored_crc = [&] {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(buf[buf.size() - 4 + i]) << (8 * i);
        return v;
    }();
    const std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(0L, buf.data(), static_cast<uInt>(buf.size() - 4)));
    if (crc != stored_crc) throw_format(path + ": checksum mismatch");

    ByteReader r{buf.data(), buf.size() - 4, 4, path};
    const std::uint32_t layer_count = r.u32();
    if (layer_count == 0 || layer_count > 64) throw_format(path + ": implausible layer count");
    MlpWeights weights;
    weights.layers.resize(layer_count);
    for (MlpLayer& l : weights.layers) {
        l.in = r.u32();
        l.out = r.u32();
        if (l.in == 0 || l.out == 0 || l.in > 4096 || l.out > 4096)
            throw_format(path + ": implausible layer size");
        l.weights.resize(static_cast<std::size_t>(l.in) * l.out);
        l.biases.resize(l.out);
        for (float& w : l.weights) w = r.f32();
        for (float& b : l.biases) b = r.f32();
    }
    if (r.pos != r.n) throw_format(path + ": trailing bytes in weight file");
    weights.validate();
    return weights;
}

MlpField::MlpField(MlpWeights weights, int channels, int height, int width)
    : VelocityField(channels, height, width), weights_(std::move(weights)) {
    weights_.validate();
}

ImageGrid MlpField::evaluate(const ImageGrid& x, double t) const {
    check_input(x, t);
    ImageGrid v(x.channels(), x.height(), x.width());
    std::vector<double> act, next;
    for (int c = 0; c < x.channels(); ++c)
        for (int py = 0; py < x.height(); ++py)
            for (int px = 0; px < x.width(); ++px) {
                act = {x.at(c, py, px), (px + 0.5) / x.width(), (py + 0.5) / x.height(), t};
                for (std::size_t li = 0; li < weights_.layers.size(); ++li) {
                    const MlpLayer& l = weights_.layers[li];
                    next.assign(l.out, 0.0);
                    for (std::uint32_t j = 0; j < l.out; ++j) {
                        double acc = l.biases[j];
                        const float* row = l.weights.data() + static_cast<std::size_t>(j) * l.in;
                        for (std::uint32_t i = 0; i < l.in; ++i) acc += row[i] * act[i];
                        // hidden layers tanh, output layer linear
                        next[j] = (li + 1 < weights_.layers.size()) ? std::tanh(acc) : acc;
                    }
                    act = next;
                }
                v.at(c, py, px) = act[0];
            }
    return v;
}

ImageGrid render_target(TargetKind kind, int channels, int height, int width) {
    ImageGrid out(channels, height, width);
    for (int c = 0; c < channels; ++c) {
        const double phase = 0.4 * c;
        for (int y = 0; y < height; ++y) {
            const double v = (y + 0.5) / height;
            for (int x = 0; x < width; ++x) {
                const double u = (x + 0.5) / width;
                double value = 0.5;
                switch (kind) {
                    case TargetKind::Gradient:
                        value = 0.15 + 0.7 * (0.6 * u + 0.4 * v) + 0.05 * c;
                        break;
                    case TargetKind::Rings: {
                        const double r = std::hypot(u - 0.5, v - 0.5);
                        value = 0.5 + 0.22 * std::cos(2.0 * std::numbers::pi * 6.0 * r + phase) +
                                0.13 * std::cos(2.0 * std::numbers::pi * 20.0 * r) +
                                0.12 * std::exp(-((u - 0.3) * (u - 0.3) + (v - 0.35) * (v - 0.35)) / 0.02);
                        break;
                    }
                    case TargetKind::Blobs: {
                        static const double cx[4] = {0.25, 0.7, 0.4, 0.8};
                        static const double cy[4] = {0.3, 0.25, 0.75, 0.7};
                        static const double amp[4] = {0.35, 0.3, 0.25, 0.3};
                        value = 0.2;
                        for (int k = 0; k < 4; ++k) {
                            const double d2 = (u - cx[k]) * (u - cx[k]) + (v - cy[k]) * (v - cy[k]);
                            value += amp[k] * std::exp(-d2 / (0.02 + 0.01 * k + 0.005 * c));
                        }
                        break;
                    }
                    case TargetKind::Checker: {
                        const int cell = (static_cast<int>(u * 8.0) + static_cast<int>(v * 8.0)) & 1;
                        value = cell ? 0.85 : 0.15;
                        break;
                    }
                }
                out.at(c, y, x) = value;
            }
        }
    }
    return out;
}

ImageGrid make_texture(std::uint64_t seed, double amp, int channels, int height, int width) {
    // Dedicated stage id keeps texture noise out of every sampling stream.
    const NoiseSpec spec{seed, 0xFFFFFFFFu};
    ImageGrid noise = sample_noise(spec, channels, height, width);
    ImageGrid blurred = gaussian_blur_periodic(noise, 1.5);
    noise -= blurred;
    noise *= amp;
    return noise;
}

}  // namespace hiflow
