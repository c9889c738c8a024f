#include "hiflow/hiflow.h"

#include <cstring>
#include <fstream>
#include <string>

#include "core/cascade.hpp"
#include "core/errors.hpp"
#include "core/field.hpp"
#include "core/grid.hpp"
#include "core/guidance.hpp"
#include "core/image_io.hpp"
#include "core/metrics.hpp"
#include "core/reference.hpp"
#include "core/sampler.hpp"
#include "core/schedule.hpp"
#include "core/spectral.hpp"

struct hf_grid {
    hiflow::ImageGrid value;
};
struct hf_mask {
    hiflow::FilterMask value;
};
struct hf_schedule {
    hiflow::TimeSchedule value;
};
struct hf_field {
    std::unique_ptr<hiflow::VelocityField> value;
};
struct hf_trajectory {
    hiflow::Trajectory value;
    bool from_dump = false;
};
struct hf_reference {
    hiflow::ReferenceFlow value;
};
struct hf_config {
    hiflow::Config value;
};

namespace {

thread_local std::string g_last_error;

void require(const void* ptr, const char* name) {
    if (!ptr) hiflow::throw_invalid(std::string(name) + " must not be null");
}

template <typename Fn>
hf_status wrap(Fn&& fn) {
    try {
        fn();
        return HF_OK;
    } catch (const hiflow::Error& e) {
        g_last_error = e.what();
        switch (e.code()) {
            case hiflow::ErrorCode::InvalidArgument: return HF_ERR_INVALID_ARGUMENT;
            case hiflow::ErrorCode::Format: return HF_ERR_FORMAT;
            case hiflow::ErrorCode::Io: return HF_ERR_IO;
        }
        return HF_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return HF_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return HF_ERR_INTERNAL;
    }
}

hiflow::Interp to_interp(hf_interp method) {
    switch (method) {
        case HF_INTERP_NEAREST: return hiflow::Interp::Nearest;
        case HF_INTERP_BILINEAR: return hiflow::Interp::Bilinear;
        case HF_INTERP_BICUBIC: return hiflow::Interp::Bicubic;
    }
    hiflow::throw_invalid("unknown interpolation method");
}

hiflow::GuidanceConfig to_guidance(const hf_guidance_params* params) {
    require(params, "params");
    hiflow::GuidanceConfig config;
    config.tau = params->tau;
    config.cutoff = params->cutoff;
    config.order = static_cast<int>(params->order);
    config.alpha = {static_cast<hiflow::WeightKind>(params->alpha_kind), params->alpha_value};
    config.beta = {static_cast<hiflow::WeightKind>(params->beta_kind), params->beta_value};
    config.enable_init = params->enable_init != 0;
    config.enable_direction = params->enable_direction != 0;
    config.enable_accel = params->enable_accel != 0;
    return config;
}

hiflow::RunOptions to_run_options(const hf_run_options* options) {
    hiflow::RunOptions out;
    if (options) {
        if (options->out_dir) out.out_dir = options->out_dir;
        out.dump_trajectories = options->dump_trajectories != 0;
        out.quiet = options->quiet != 0;
        if (options->has_seed_override) out.seed_override = options->seed_override;
    }
    return out;
}

}  // namespace

extern "C" {

const char* hf_last_error(void) { return g_last_error.c_str(); }

/* ---- grids ---- */

hf_status hf_grid_create(uint32_t channels, uint32_t height, uint32_t width, hf_grid** out) {
    return wrap([&] {
        require(out, "out");
        *out = new hf_grid{hiflow::ImageGrid(static_cast<int>(channels), static_cast<int>(height),
                                             static_cast<int>(width))};
    });
}

void hf_grid_free(hf_grid* grid) { delete grid; }

hf_status hf_grid_dims(const hf_grid* grid, uint32_t* channels, uint32_t* height,
                       uint32_t* width) {
    return wrap([&] {
        require(grid, "grid");
        if (channels) *channels = static_cast<uint32_t>(grid->value.channels());
        if (height) *height = static_cast<uint32_t>(grid->value.height());
        if (width) *width = static_cast<uint32_t>(grid->value.width());
    });
}

const double* hf_grid_data(const hf_grid* grid) {
    return grid ? grid->value.data().data() : nullptr;
}

hf_status hf_grid_set_data(hf_grid* grid, const double* values, size_t count) {
    return wrap([&] {
        require(grid, "grid");
        require(values, "values");
        if (count != grid->value.size())
            hiflow::throw_invalid("value count does not match grid size");
        std::memcpy(grid->value.data().data(), values, count * sizeof(double));
    });
}

hf_status hf_grid_fill(hf_grid* grid, double value) {
    return wrap([&] {
        require(grid, "grid");
        for (double& v : grid->value.data()) v = value;
    });
}

uint64_t hf_grid_hash(const hf_grid* grid) {
    return grid ? hiflow::grid_hash(grid->value) : 0;
}

hf_status hf_grid_upsample(const hf_grid* grid, uint32_t factor, hf_interp method,
                           hf_grid** out) {
    return wrap([&] {
        require(grid, "grid");
        require(out, "out");
        *out = new hf_grid{
            hiflow::upsample(grid->value, static_cast<int>(factor), to_interp(method))};
    });
}

hf_status hf_grid_downsample(const hf_grid* grid, uint32_t factor, hf_grid** out) {
    return wrap([&] {
        require(grid, "grid");
        require(out, "out");
        *out = new hf_grid{hiflow::downsample(grid->value, static_cast<int>(factor))};
    });
}

hf_status hf_grid_write_ppm(const hf_grid* grid, const char* path) {
    return wrap([&] {
        require(grid, "grid");
        require(path, "path");
        hiflow::write_ppm(grid->value, path);
    });
}

hf_status hf_grid_read_image(const char* path, hf_grid** out) {
    return wrap([&] {
        require(path, "path");
        require(out, "out");
        *out = new hf_grid{hiflow::read_image(path)};
    });
}

/* ---- frequency-domain filtering ---- */

double hf_butterworth_response(double freq, double cutoff, uint32_t order) {
    try {
        return hiflow::butterworth_response(freq, cutoff, static_cast<int>(order));
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return -1.0;
    }
}

hf_status hf_mask_create_butterworth(uint32_t height, uint32_t width, double cutoff,
                                     uint32_t order, hf_mask** out) {
    return wrap([&] {
        require(out, "out");
        *out = new hf_mask{hiflow::butterworth_mask(static_cast<int>(height),
                                                    static_cast<int>(width), cutoff,
                                                    static_cast<int>(order))};
    });
}

hf_status hf_mask_create_ideal(uint32_t height, uint32_t width, double cutoff, hf_mask** out) {
    return wrap([&] {
        require(out, "out");
        *out = new hf_mask{hiflow::ideal_lowpass_mask(static_cast<int>(height),
                                                      static_cast<int>(width), cutoff)};
    });
}

void hf_mask_free(hf_mask* mask) { delete mask; }

hf_status hf_mask_value(const hf_mask* mask, uint32_t u, uint32_t v, double* out) {
    return wrap([&] {
        require(mask, "mask");
        require(out, "out");
        if (u >= static_cast<uint32_t>(mask->value.height()) ||
            v >= static_cast<uint32_t>(mask->value.width()))
            hiflow::throw_invalid("mask index out of range");
        *out = mask->value.at(static_cast<int>(u), static_cast<int>(v));
    });
}

hf_status hf_lowpass_swap(const hf_grid* target, const hf_grid* source, const hf_mask* mask,
                          double weight, hf_grid** out) {
    return wrap([&] {
        require(target, "target");
        require(source, "source");
        require(mask, "mask");
        require(out, "out");
        *out = new hf_grid{hiflow::lowpass_swap(target->value, source->value, mask->value, weight)};
    });
}

/* ---- schedules and noise ---- */

hf_status hf_schedule_create(uint32_t steps, hf_schedule_shape shape, double shift,
                             hf_schedule** out) {
    return wrap([&] {
        require(out, "out");
        *out = new hf_schedule{hiflow::make_schedule(
            static_cast<int>(steps),
            shape == HF_SCHEDULE_SHIFT ? hiflow::ScheduleShape::Shift
                                       : hiflow::ScheduleShape::Uniform,
            shift)};
    });
}

void hf_schedule_free(hf_schedule* schedule) { delete schedule; }

hf_status hf_schedule_steps(const hf_schedule* schedule, uint32_t* out) {
    return wrap([&] {
        require(schedule, "schedule");
        require(out, "out");
        *out = static_cast<uint32_t>(schedule->value.steps());
    });
}

hf_status hf_schedule_time(const hf_schedule* schedule, uint32_t index, double* out) {
    return wrap([&] {
        require(schedule, "schedule");
        require(out, "out");
        if (index > static_cast<uint32_t>(schedule->value.steps()))
            hiflow::throw_invalid("schedule index out of range");
        *out = schedule->value.time(static_cast<int>(index));
    });
}

hf_status hf_sample_noise(uint64_t seed, uint32_t stage, uint32_t channels, uint32_t height,
                          uint32_t width, hf_grid** out) {
    return wrap([&] {
        require(out, "out");
        *out = new hf_grid{hiflow::sample_noise(hiflow::NoiseSpec{seed, stage},
                                                static_cast<int>(channels),
                                                static_cast<int>(height),
                                                static_cast<int>(width))};
    });
}

hf_status hf_mix_noise(const hf_grid* x0, const hf_grid* noise, double t, hf_grid** out) {
    return wrap([&] {
        require(x0, "x0");
        require(noise, "noise");
        require(out, "out");
        *out = new hf_grid{hiflow::mix_noise(x0->value, noise->value, t)};
    });
}

/* ---- velocity fields ---- */

hf_status hf_field_create_gaussian(double mu0, double sigma0, uint32_t channels, uint32_t height,
                                   uint32_t width, hf_field** out) {
    return wrap([&] {
        require(out, "out");
        *out = new hf_field{std::make_unique<hiflow::GaussianField>(
            mu0, sigma0, static_cast<int>(channels), static_cast<int>(height),
            static_cast<int>(width))};
    });
}

hf_status hf_field_create_anchored(const hf_grid* target, hf_field** out) {
    return wrap([&] {
        require(target, "target");
        require(out, "out");
        *out = new hf_field{std::make_unique<hiflow::AnchoredField>(target->value)};
    });
}

hf_status hf_field_create_coarse2fine(const hf_grid* target, double blur0, hf_field** out) {
    return wrap([&] {
        require(target, "target");
        require(out, "out");
        *out = new hf_field{std::make_unique<hiflow::CoarseToFineField>(target->value, blur0)};
    });
}

hf_status hf_field_create_mlp(const char* weights_path, uint32_t channels, uint32_t height,
                              uint32_t width, hf_field** out) {
    return wrap([&] {
        require(weights_path, "weights_path");
        require(out, "out");
        *out = new hf_field{std::make_unique<hiflow::MlpField>(
            hiflow::load_mlp_weights(weights_path), static_cast<int>(channels),
            static_cast<int>(height), static_cast<int>(width))};
    });
}

void hf_field_free(hf_field* field) { delete field; }

hf_status hf_field_evaluate(const hf_field* field, const hf_grid* x, double t, hf_grid** out) {
    return wrap([&] {
        require(field, "field");
        require(x, "x");
        require(out, "out");
        *out = new hf_grid{field->value->evaluate(x->value, t)};
    });
}

/* ---- sampling ---- */

hf_status hf_predict_clean(const hf_grid* x, const hf_grid* v, double t, hf_grid** out) {
    return wrap([&] {
        require(x, "x");
        require(v, "v");
        require(out, "out");
        *out = new hf_grid{hiflow::predict_clean(x->value, v->value, t)};
    });
}

hf_status hf_euler_step(const hf_grid* x, const hf_grid* v, double t_from, double t_to,
                        hf_grid** out) {
    return wrap([&] {
        require(x, "x");
        require(v, "v");
        require(out, "out");
        *out = new hf_grid{hiflow::euler_step(x->value, v->value, t_from, t_to)};
    });
}

hf_status hf_sample(const hf_field* field, const hf_schedule* schedule, const hf_grid* init,
                    double start_t, int record, hf_trajectory** out) {
    return wrap([&] {
        require(field, "field");
        require(schedule, "schedule");
        require(init, "init");
        require(out, "out");
        *out = new hf_trajectory{
            hiflow::sample(*field->value, schedule->value, init->value, start_t, record != 0),
            false};
    });
}

void hf_trajectory_free(hf_trajectory* trajectory) { delete trajectory; }

hf_status hf_trajectory_step_count(const hf_trajectory* trajectory, uint32_t* out) {
    return wrap([&] {
        require(trajectory, "trajectory");
        require(out, "out");
        *out = static_cast<uint32_t>(trajectory->value.steps.size());
    });
}

hf_status hf_trajectory_step_time(const hf_trajectory* trajectory, uint32_t index, double* out) {
    return wrap([&] {
        require(trajectory, "trajectory");
        require(out, "out");
        if (index >= trajectory->value.steps.size())
            hiflow::throw_invalid("step index out of range");
        *out = trajectory->value.steps[index].t;
    });
}

hf_status hf_trajectory_step_grid(const hf_trajectory* trajectory, uint32_t index,
                                  hf_step_grid which, hf_grid** out) {
    return wrap([&] {
        require(trajectory, "trajectory");
        require(out, "out");
        if (index >= trajectory->value.steps.size())
            hiflow::throw_invalid("step index out of range");
        const hiflow::StepRecord& s = trajectory->value.steps[index];
        switch (which) {
            case HF_STEP_X: *out = new hf_grid{s.x}; return;
            case HF_STEP_V: *out = new hf_grid{s.v}; return;
            case HF_STEP_X0: *out = new hf_grid{s.x0}; return;
            case HF_STEP_X1: *out = new hf_grid{s.x1}; return;
        }
        hiflow::throw_invalid("unknown step grid selector");
    });
}

hf_status hf_trajectory_terminal(const hf_trajectory* trajectory, hf_grid** out) {
    return wrap([&] {
        require(trajectory, "trajectory");
        require(out, "out");
        *out = new hf_grid{trajectory->value.terminal};
    });
}

hf_status hf_trajectory_save(const hf_trajectory* trajectory, const char* path) {
    return wrap([&] {
        require(trajectory, "trajectory");
        require(path, "path");
        hiflow::save_trajectory(trajectory->value, path);
    });
}

hf_status hf_trajectory_load(const char* path, hf_trajectory** out) {
    return wrap([&] {
        require(path, "path");
        require(out, "out");
        *out = new hf_trajectory{hiflow::load_trajectory(path), true};
    });
}

hf_status hf_trajectory_step_stats(const hf_trajectory* trajectory, uint32_t index,
                                   hf_step_stats* out) {
    return wrap([&] {
        require(trajectory, "trajectory");
        require(out, "out");
        const hiflow::StepStats s =
            hiflow::step_stats(trajectory->value, static_cast<int>(index), trajectory->from_dump);
        out->t = s.t;
        out->eq4_residual = s.eq4_residual;
        out->residual_bound = s.residual_bound;
        out->velocity_rms = s.velocity_rms;
        out->accel_rms = s.accel_rms;
    });
}

/* ---- reference flow ---- */

hf_status hf_reference_build(const hf_trajectory* low, uint32_t target_height,
                             uint32_t target_width, hf_interp method, hf_reference** out) {
    return wrap([&] {
        require(low, "low");
        require(out, "out");
        *out = new hf_reference{hiflow::build_reference(low->value,
                                                        static_cast<int>(target_height),
                                                        static_cast<int>(target_width),
                                                        to_interp(method))};
    });
}

void hf_reference_free(hf_reference* reference) { delete reference; }

hf_status hf_reference_count(const hf_reference* reference, uint32_t* out) {
    return wrap([&] {
        require(reference, "reference");
        require(out, "out");
        *out = static_cast<uint32_t>(reference->value.count());
    });
}

hf_status hf_reference_time(const hf_reference* reference, uint32_t index, double* out) {
    return wrap([&] {
        require(reference, "reference");
        require(out, "out");
        if (index >= static_cast<uint32_t>(reference->value.count()))
            hiflow::throw_invalid("reference index out of range");
        *out = reference->value.time(static_cast<int>(index));
    });
}

hf_status hf_reference_clean(const hf_reference* reference, uint32_t index, hf_grid** out) {
    return wrap([&] {
        require(reference, "reference");
        require(out, "out");
        if (index >= static_cast<uint32_t>(reference->value.count()))
            hiflow::throw_invalid("reference index out of range");
        *out = new hf_grid{reference->value.clean(static_cast<int>(index))};
    });
}

hf_status hf_reference_anchor(const hf_reference* reference, hf_grid** out) {
    return wrap([&] {
        require(reference, "reference");
        require(out, "out");
        *out = new hf_grid{reference->value.anchor()};
    });
}

hf_status hf_reference_velocity_delta(const hf_reference* reference, uint32_t index,
                                      hf_grid** out) {
    return wrap([&] {
        require(reference, "reference");
        require(out, "out");
        *out = new hf_grid{reference->value.velocity_delta(static_cast<int>(index))};
    });
}

hf_status hf_reference_save(const hf_reference* reference, const char* path) {
    return wrap([&] {
        require(reference, "reference");
        require(path, "path");
        hiflow::save_reference(reference->value, path);
    });
}

hf_status hf_reference_load(const char* path, hf_reference** out) {
    return wrap([&] {
        require(path, "path");
        require(out, "out");
        *out = new hf_reference{hiflow::load_reference(path)};
    });
}

/* ---- guidance ---- */

void hf_guidance_params_defaults(hf_guidance_params* params) {
    if (!params) return;
    params->tau = 0.6;
    params->cutoff = 0.4;
    params->order = 4;
    params->alpha_kind = HF_WEIGHT_PAPER_LINEAR;
    params->alpha_value = 1.0;
    params->beta_kind = HF_WEIGHT_PAPER_LINEAR;
    params->beta_value = 1.0;
    params->enable_init = 1;
    params->enable_direction = 1;
    params->enable_accel = 1;
}

hf_status hf_guidance_weight(double t, double tau, double* out) {
    return wrap([&] {
        require(out, "out");
        *out = hiflow::guidance_weight(t, tau);
    });
}

hf_status hf_init_align(const hf_reference* reference, double tau, const hf_grid* noise,
                        hf_grid** out) {
    return wrap([&] {
        require(reference, "reference");
        require(noise, "noise");
        require(out, "out");
        *out = new hf_grid{hiflow::init_align(reference->value, tau, noise->value)};
    });
}

hf_status hf_direction_align(const hf_grid* x0_high, const hf_grid* x0_ref, const hf_mask* mask,
                             double alpha, hf_grid** out) {
    return wrap([&] {
        require(x0_high, "x0_high");
        require(x0_ref, "x0_ref");
        require(mask, "mask");
        require(out, "out");
        *out = new hf_grid{
            hiflow::direction_align(x0_high->value, x0_ref->value, mask->value, alpha)};
    });
}

hf_status hf_accel_align(const hf_grid* v_cur, const hf_grid* v_prev, const hf_grid* ref_delta,
                         double beta, hf_grid** out) {
    return wrap([&] {
        require(v_cur, "v_cur");
        require(v_prev, "v_prev");
        require(ref_delta, "ref_delta");
        require(out, "out");
        *out = new hf_grid{
            hiflow::accel_align(v_cur->value, v_prev->value, ref_delta->value, beta)};
    });
}

hf_status hf_guided_sample(const hf_field* field, const hf_schedule* schedule,
                           const hf_reference* reference, const hf_guidance_params* params,
                           uint64_t noise_seed, uint32_t noise_stage, hf_guidance_mode mode,
                           int record, hf_trajectory** out) {
    return wrap([&] {
        require(field, "field");
        require(schedule, "schedule");
        require(reference, "reference");
        require(out, "out");
        *out = new hf_trajectory{
            hiflow::guided_sample(*field->value, schedule->value, reference->value,
                                  to_guidance(params), hiflow::NoiseSpec{noise_seed, noise_stage},
                                  record != 0,
                                  mode == HF_GUIDANCE_CONSTANT_ANCHOR
                                      ? hiflow::GuidanceMode::ConstantAnchor
                                      : hiflow::GuidanceMode::TimeMatched),
            false};
    });
}

/* ---- metrics ---- */

hf_status hf_mse(const hf_grid* a, const hf_grid* b, double* out) {
    return wrap([&] {
        require(a, "a");
        require(b, "b");
        require(out, "out");
        *out = hiflow::mse(a->value, b->value);
    });
}

hf_status hf_lowband_mse(const hf_grid* a, const hf_grid* b, double cutoff, uint32_t order,
                         double* out) {
    return wrap([&] {
        require(a, "a");
        require(b, "b");
        require(out, "out");
        *out = hiflow::lowband_mse(a->value, b->value, cutoff, static_cast<int>(order));
    });
}

hf_status hf_psnr(const hf_grid* a, const hf_grid* b, double peak, double* out) {
    return wrap([&] {
        require(a, "a");
        require(b, "b");
        require(out, "out");
        *out = hiflow::psnr(a->value, b->value, peak);
    });
}

hf_status hf_highband_energy_ratio(const hf_grid* grid, double cutoff, uint32_t order,
                                   double* out) {
    return wrap([&] {
        require(grid, "grid");
        require(out, "out");
        *out = hiflow::highband_energy_ratio(grid->value, cutoff, static_cast<int>(order));
    });
}

hf_status hf_radial_spectrum(const hf_grid* grid, uint32_t bins, double* out_bins) {
    return wrap([&] {
        require(grid, "grid");
        require(out_bins, "out_bins");
        const std::vector<double> rs =
            hiflow::radial_spectrum(grid->value, static_cast<int>(bins));
        std::memcpy(out_bins, rs.data(), rs.size() * sizeof(double));
    });
}

hf_status hf_accel_spectrum_distance(const hf_trajectory* trajectory,
                                     const hf_reference* reference, uint32_t bins, double* out) {
    return wrap([&] {
        require(trajectory, "trajectory");
        require(reference, "reference");
        require(out, "out");
        *out = hiflow::accel_spectrum_distance(trajectory->value, reference->value,
                                               static_cast<int>(bins));
    });
}

/* ---- configuration and drivers ---- */

hf_status hf_config_load(const char* path, hf_config** out) {
    return wrap([&] {
        require(path, "path");
        require(out, "out");
        *out = new hf_config{hiflow::Config::load(path)};
    });
}

hf_status hf_config_parse(const char* text, hf_config** out) {
    return wrap([&] {
        require(text, "text");
        require(out, "out");
        *out = new hf_config{hiflow::Config::from_string(text)};
    });
}

void hf_config_free(hf_config* config) { delete config; }

hf_status hf_config_set(hf_config* config, const char* dotted_key, const char* value) {
    return wrap([&] {
        require(config, "config");
        require(dotted_key, "dotted_key");
        require(value, "value");
        config->value.set(dotted_key, value);
    });
}

hf_status hf_config_get(const hf_config* config, const char* dotted_key, char* buffer,
                        size_t buffer_size) {
    return wrap([&] {
        require(config, "config");
        require(dotted_key, "dotted_key");
        require(buffer, "buffer");
        if (buffer_size == 0) hiflow::throw_invalid("buffer_size must be > 0");
        const auto value = config->value.get(dotted_key);
        if (!value) hiflow::throw_invalid(std::string("config key not present: ") + dotted_key);
        const std::size_t n = std::min(buffer_size - 1, value->size());
        std::memcpy(buffer, value->data(), n);
        buffer[n] = '\0';
    });
}

hf_status hf_config_validate(const hf_config* config) {
    return wrap([&] {
        require(config, "config");
        (void)hiflow::resolve_config(config->value);
    });
}

hf_status hf_config_stage_count(const hf_config* config, uint32_t* out) {
    return wrap([&] {
        require(config, "config");
        require(out, "out");
        *out = static_cast<uint32_t>(hiflow::resolve_config(config->value).stage_count());
    });
}

hf_status hf_config_stage_info(const hf_config* config, uint32_t stage, hf_stage_info* out) {
    return wrap([&] {
        require(config, "config");
        require(out, "out");
        const hiflow::CascadeSpec spec = hiflow::resolve_config(config->value);
        if (stage >= static_cast<uint32_t>(spec.stage_count()))
            hiflow::throw_invalid("stage index out of range");
        const int s = static_cast<int>(stage);
        out->channels = static_cast<uint32_t>(spec.channels);
        out->height = static_cast<uint32_t>(spec.stage_height(s));
        out->width = static_cast<uint32_t>(spec.stage_width(s));
        out->steps = static_cast<uint32_t>(spec.stage_steps(s));
        out->seed = spec.stage_seed(s);
        out->scale_from_base = static_cast<uint32_t>(spec.stage_scale_from_base(s));
    });
}

hf_status hf_config_stage_field(const hf_config* config, uint32_t stage, hf_field** out) {
    return wrap([&] {
        require(config, "config");
        require(out, "out");
        const hiflow::CascadeSpec spec = hiflow::resolve_config(config->value);
        if (stage >= static_cast<uint32_t>(spec.stage_count()))
            hiflow::throw_invalid("stage index out of range");
        const int s = static_cast<int>(stage);
        *out = new hf_field{hiflow::make_field(spec.stage_field_spec(s), spec.channels,
                                               spec.stage_height(s), spec.stage_width(s))};
    });
}

hf_status hf_config_schedule(const hf_config* config, uint32_t stage, hf_schedule** out) {
    return wrap([&] {
        require(config, "config");
        require(out, "out");
        const hiflow::CascadeSpec spec = hiflow::resolve_config(config->value);
        if (stage >= static_cast<uint32_t>(spec.stage_count()))
            hiflow::throw_invalid("stage index out of range");
        *out = new hf_schedule{hiflow::make_schedule(spec.stage_steps(static_cast<int>(stage)),
                                                     spec.schedule_shape, spec.schedule_shift)};
    });
}

hf_status hf_run_generate(const hf_config* config, const hf_run_options* options) {
    return wrap([&] {
        require(config, "config");
        (void)hiflow::run_generate(hiflow::resolve_config(config->value),
                                   to_run_options(options));
    });
}

hf_status hf_run_cascade(const hf_config* config, const hf_run_options* options) {
    return wrap([&] {
        require(config, "config");
        (void)hiflow::run_cascade(hiflow::resolve_config(config->value), to_run_options(options));
    });
}

hf_status hf_run_compare(const hf_config* config, const hf_run_options* options) {
    return wrap([&] {
        require(config, "config");
        (void)hiflow::run_compare(hiflow::resolve_config(config->value), to_run_options(options));
    });
}

/* ---- dump inspection ---- */

hf_status hf_dump_probe(const char* path, hf_dump_kind* out) {
    return wrap([&] {
        require(path, "path");
        require(out, "out");
        std::ifstream in(path, std::ios::binary);
        if (!in) hiflow::throw_io(std::string("cannot open ") + path);
        char magic[4] = {};
        in.read(magic, 4);
        if (in.gcount() != 4) hiflow::throw_format(std::string(path) + ": truncated file");
        if (std::memcmp(magic, "HFT1", 4) == 0) *out = HF_DUMP_TRAJECTORY;
        else if (std::memcmp(magic, "HFR1", 4) == 0) *out = HF_DUMP_REFERENCE;
        else hiflow::throw_format(std::string(path) + ": unknown dump magic");
    });
}

} /* extern "C" */
