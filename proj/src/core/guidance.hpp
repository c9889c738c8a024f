#pragma once

#include "core/field.hpp"
#include "core/grid.hpp"
#include "core/reference.hpp"
#include "core/sampler.hpp"
#include "core/schedule.hpp"
#include "core/spectral.hpp"

namespace hiflow {

enum class WeightKind {
    PaperLinear = 0,  // t / tau
    Constant = 1,
    Off = 2,
};

struct WeightSchedule {
    WeightKind kind = WeightKind::PaperLinear;
    double value = 1.0;  // used by Constant

    double at(double t, double tau) const;
};

struct GuidanceConfig {
    double tau = 1.0;     // noise-addition ratio; sampling enters the grid here
    double cutoff = 0.4;  // Butterworth normalized cutoff D
    int order = 4;        // Butterworth order n
    WeightSchedule alpha;  // direction weight
    WeightSchedule beta;   // acceleration weight
    bool enable_init = true;
    bool enable_direction = true;
    bool enable_accel = true;

    void validate() const;
};

// Which grid feeds direction alignment: the time-matched reference entry, or
// the fixed upsampled low-res terminal at every step (prior-work baseline).
enum class GuidanceMode {
    TimeMatched = 0,
    ConstantAnchor = 1,
};

// t / tau for 0 <= t <= tau.
double guidance_weight(double t, double tau);

// tau*noise + (1 - tau)*clean(tau): the guided run's start state.
ImageGrid init_align(const ReferenceFlow& reference, double tau, const ImageGrid& noise);

// Low-frequency fusion of predicted clean samples from the same t:
// lowpass_swap(x0_high, x0_ref, mask, alpha).
ImageGrid direction_align(const ImageGrid& x0_high, const ImageGrid& x0_ref,
                          const FilterMask& mask, double alpha);

// Blend the per-step velocity change toward the reference's:
// v_cur + beta*(ref_delta - (v_cur - v_prev)).
ImageGrid accel_align(const ImageGrid& v_cur, const ImageGrid& v_prev,
                      const ImageGrid& ref_delta, double beta);

// Guided high-resolution sampling from t = tau down to 0. Per step: evaluate,
// direction-align the predicted clean sample, acceleration-align the velocity
// (from the second step on), Euler update. Records carry the velocity the
// Euler update actually used. With all three alignments off and tau = 1 the
// run is bit-identical to sample() from pure noise.
Trajectory guided_sample(const VelocityField& field, const TimeSchedule& schedule,
                         const ReferenceFlow& reference, const GuidanceConfig& config,
                         const NoiseSpec& noise_spec, bool record = true,
                         GuidanceMode mode = GuidanceMode::TimeMatched);

}  // namespace hiflow
