#include "core/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "core/errors.hpp"

namespace hiflow {

namespace {

bool kind_out_of_range(WeightKind k) {
    return k != WeightKind::PaperLinear && k != WeightKind::Constant && k != WeightKind::Off;
}

}  // namespace

double WeightSchedule::at(double t, double tau) const {
    switch (kind) {
        case WeightKind::PaperLinear:
            return std::clamp(guidance_weight(std::min(t, tau), tau), 0.0, 1.0);
        case WeightKind::Constant:
            return std::clamp(value, 0.0, 1.0);
        case WeightKind::Off:
            return 0.0;
    }
    return 0.0;
}

void GuidanceConfig::validate() const {
    if (!(tau > 0.0) || tau > 1.0)
        throw_invalid("guidance: tau must be in (0, 1], got " + std::to_string(tau));
    if (!(cutoff > 0.0) || cutoff > 1.0)
        throw_invalid("guidance: cutoff must be in (0, 1], got " + std::to_string(cutoff));
    if (order < 1) throw_invalid("guidance: filter order must be >= 1");
    if (kind_out_of_range(alpha.kind) || kind_out_of_range(beta.kind))
        throw_invalid("guidance: unknown weight schedule kind");
}

double guidance_weight(double t, double tau) {
    if (!(tau > 0.0)) throw_invalid("guidance_weight: tau must be > 0");
    if (t < 0.0) throw_invalid("guidance_weight: t must be >= 0");
    if (t > tau) throw_invalid("guidance_weight: t exceeds tau");
    return t / tau;
}

ImageGrid init_align(const ReferenceFlow& reference, double tau, const ImageGrid& noise) {
    const int idx = reference.index_at_time(tau);
    if (idx < 0) throw_invalid("init_align: tau is not a time on the reference grid");
    const ImageGrid& clean = reference.clean(idx);
    require_same_dims(clean, noise, "init_align");
    return mix_noise(clean, noise, reference.time(idx));
}

ImageGrid direction_align(const ImageGrid& x0_high, const ImageGrid& x0_ref,
                          const FilterMask& mask, double alpha) {
    require_same_dims(x0_high, x0_ref, "direction_align");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw_invalid("direction_align: alpha must be in [0, 1]");
    return lowpass_swap(x0_high, x0_ref, mask, alpha);
}

ImageGrid accel_align(const ImageGrid& v_cur, const ImageGrid& v_prev,
                      const ImageGrid& ref_delta, double beta) {
    require_same_dims(v_cur, v_prev, "accel_align");
    require_same_dims(v_cur, ref_delta, "accel_align");
    if (!(beta >= 0.0 && beta <= 1.0))
        throw_invalid("accel_align: beta must be in [0, 1]");
    ImageGrid out = v_cur;
    double* dst = out.data().data();
    const double* vp = v_prev.data().data();
    const double* rd = ref_delta.data().data();
    for (std::size_t i = 0; i < out.size(); ++i)
        dst[i] += beta * (rd[i] - (dst[i] - vp[i]));
    return out;
}

Trajectory guided_sample(const VelocityField& field, const TimeSchedule& schedule,
                         const ReferenceFlow& reference, const GuidanceConfig& config,
                         const NoiseSpec& noise_spec, bool record, GuidanceMode mode) {
    config.validate();
    if (reference.channels() != field.channels() || reference.height() != field.height() ||
        reference.width() != field.width())
        throw_invalid("guided_sample: reference dims do not match field context");

    const int start = schedule.index_of(config.tau);
    if (start < 0) throw_invalid("guided_sample: tau is not on the schedule grid");
    const double tau = schedule.time(start);  // snapped grid value

    const bool any_guidance = config.enable_direction || config.enable_accel;
    const bool time_matched = mode == GuidanceMode::TimeMatched;
    if (time_matched && any_guidance) {
        // Every evaluation time at or below tau needs a reference entry.
        for (int i = start; i < schedule.steps(); ++i)
            if (reference.index_at_time(schedule.time(i)) < 0)
                throw_invalid("guided_sample: missing reference entry at t = " +
                              std::to_string(schedule.time(i)));
    }

    const ImageGrid noise =
        sample_noise(noise_spec, field.channels(), field.height(), field.width());
    ImageGrid x = (config.enable_init && time_matched)
                      ? init_align(reference, tau, noise)
                      : mix_noise(reference.anchor(), noise, tau);

    FilterMask mask;
    if (config.enable_direction)
        mask = butterworth_mask(field.height(), field.width(), config.cutoff, config.order);

    Trajectory trajectory;
    if (record) trajectory.steps.reserve(static_cast<std::size_t>(schedule.steps() - start));
    std::optional<ImageGrid> v_prev;

    for (int i = start; i < schedule.steps(); ++i) {
        const double t = schedule.time(i);
        const double t_next = schedule.time(i + 1);

        ImageGrid v = field.evaluate(x, t);
        ImageGrid x0 = predict_clean(x, v, t);

        if (config.enable_direction) {
            const double alpha = config.alpha.at(t, tau);
            const ImageGrid& src = time_matched
                                       ? reference.clean(reference.index_at_time(t))
                                       : reference.anchor();
            x0 = direction_align(x0, src, mask, alpha);
            v = x;
            v -= x0;
            for (double& val : v.data()) val /= t;
        }
        if (config.enable_accel && v_prev.has_value()) {
            const double beta = config.beta.at(t, tau);
            // Reference velocity change across the transition into t; a
            // constant anchor has a constant reference, hence zero change.
            ImageGrid ref_delta;
            if (time_matched) {
                const int idx = reference.index_at_time(t);
                if (idx < 1 ||
                    std::abs(reference.time(idx - 1) - schedule.time(i - 1)) > 1e-12)
                    throw_invalid(
                        "guided_sample: reference transition does not align with the "
                        "schedule at t = " + std::to_string(t));
                ref_delta = reference.velocity_delta(idx);
            } else {
                ref_delta = ImageGrid(field.channels(), field.height(), field.width(), 0.0);
            }
            v = accel_align(v, *v_prev, ref_delta, beta);
            x0 = predict_clean(x, v, t);
        }

        if (record) {
            ImageGrid x1 = x0 + v;
            trajectory.steps.push_back({t, x, v, std::move(x0), std::move(x1)});
        }
        x = euler_step(x, v, t, t_next);
        v_prev = std::move(v);
    }
    trajectory.terminal = std::move(x);
    return trajectory;
}

}  // namespace hiflow
