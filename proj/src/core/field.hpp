#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "core/grid.hpp"

namespace hiflow {

// Velocity field v(x, t) standing in for a pretrained network. evaluate is a
// pure function; identical inputs give identical outputs.
class VelocityField {
public:
    virtual ~VelocityField() = default;

    virtual ImageGrid evaluate(const ImageGrid& x, double t) const = 0;

    int channels() const { return channels_; }
    int height() const { return height_; }
    int width() const { return width_; }

protected:
    VelocityField(int channels, int height, int width);
    void check_input(const ImageGrid& x, double t) const;

private:
    int channels_, height_, width_;
};

// Closed-form marginal velocity for independent coupling of
// X0 ~ N(mu0, sigma0^2 I) and X1 ~ N(0, I).
class GaussianField : public VelocityField {
public:
    GaussianField(double mu0, double sigma0, int channels, int height, int width);
    ImageGrid evaluate(const ImageGrid& x, double t) const override;
    double mu0() const { return mu0_; }
    double sigma0() const { return sigma0_; }

private:
    double mu0_, sigma0_;
};

// Predicted clean sample is constantly the target: v = (x - target)/t.
class AnchoredField : public VelocityField {
public:
    explicit AnchoredField(ImageGrid target);
    ImageGrid evaluate(const ImageGrid& x, double t) const override;
    const ImageGrid& target() const { return target_; }

private:
    ImageGrid target_;
};

// Predicted clean sample is the target under a time-shrinking Gaussian blur,
// sigma(t) = blur0 * t: low frequencies settle first, details appear late.
class CoarseToFineField : public VelocityField {
public:
    CoarseToFineField(ImageGrid target, double blur0);
    ImageGrid evaluate(const ImageGrid& x, double t) const override;
    const ImageGrid& target() const { return target_; }
    double blur0() const { return blur0_; }

private:
    ImageGrid target_;
    double blur0_;
};

// Tiny learned stand-in: per-pixel MLP over (value, x/W, y/H, t).
struct MlpLayer {
    std::uint32_t in = 0;
    std::uint32_t out = 0;
    std::vector<float> weights;  // row-major, out x in
    std::vector<float> biases;   // out
};

struct MlpWeights {
    std::vector<MlpLayer> layers;
    void validate() const;  // chain consistency, 4 inputs, 1 output
};

// "HFW1" file: u32 layer count, per layer u32 in/out then f32 weights and
// biases (little endian), trailing CRC32 of everything before it.
MlpWeights load_mlp_weights(const std::string& path);
void save_mlp_weights(const MlpWeights& weights, const std::string& path);

class MlpField : public VelocityField {
public:
    MlpField(MlpWeights weights, int channels, int height, int width);
    ImageGrid evaluate(const ImageGrid& x, double t) const override;

private:
    MlpWeights weights_;
};

// Procedural targets, defined in normalized coordinates so the same pattern
// renders consistently at any resolution.
enum class TargetKind {
    Gradient = 0,
    Rings = 1,
    Blobs = 2,
    Checker = 3,
};

ImageGrid render_target(TargetKind kind, int channels, int height, int width);

// Seeded high-frequency texture: noise minus its own blur, scaled by amp.
ImageGrid make_texture(std::uint64_t seed, double amp, int channels, int height, int width);

}  // namespace hiflow
