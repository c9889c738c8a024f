/* hiflow  flow-aligned guidance for rectified-flow sampling
 *
 * C interface of the shared library. Objects are opaque handles created and
 * destroyed through this API; every fallible call returns an hf_status and
 * leaves a message readable via hf_last_error() on failure. Handles are not
 * reference counted: free each exactly once. Distinct handles may be used
 * from different threads concurrently; sharing one handle across threads is
 * safe for reads only.
 */
#ifndef HIFLOW_H
#define HIFLOW_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define HF_API __declspec(dllexport)
#else
#  define HF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hf_status {
    HF_OK = 0,
    HF_ERR_INVALID_ARGUMENT = 1,
    HF_ERR_FORMAT = 2,
    HF_ERR_IO = 3,
    HF_ERR_INTERNAL = 4
} hf_status;

/* Message for the most recent failing call on this thread ("" if none). */
HF_API const char* hf_last_error(void);

typedef struct hf_grid hf_grid;
typedef struct hf_mask hf_mask;
typedef struct hf_schedule hf_schedule;
typedef struct hf_field hf_field;
typedef struct hf_trajectory hf_trajectory;
typedef struct hf_reference hf_reference;
typedef struct hf_config hf_config;

/* ---- grids ---- */

typedef enum hf_interp {
    HF_INTERP_NEAREST = 0,
    HF_INTERP_BILINEAR = 1,
    HF_INTERP_BICUBIC = 2
} hf_interp;

HF_API hf_status hf_grid_create(uint32_t channels, uint32_t height, uint32_t width,
                                hf_grid** out);
HF_API void hf_grid_free(hf_grid* grid);
HF_API hf_status hf_grid_dims(const hf_grid* grid, uint32_t* channels, uint32_t* height,
                              uint32_t* width);
/* Row-major per channel; valid until the handle is freed. */
HF_API const double* hf_grid_data(const hf_grid* grid);
HF_API hf_status hf_grid_set_data(hf_grid* grid, const double* values, size_t count);
HF_API hf_status hf_grid_fill(hf_grid* grid, double value);
HF_API uint64_t hf_grid_hash(const hf_grid* grid);
HF_API hf_status hf_grid_upsample(const hf_grid* grid, uint32_t factor, hf_interp method,
                                  hf_grid** out);
HF_API hf_status hf_grid_downsample(const hf_grid* grid, uint32_t factor, hf_grid** out);
HF_API hf_status hf_grid_write_ppm(const hf_grid* grid, const char* path);
HF_API hf_status hf_grid_read_image(const char* path, hf_grid** out);

/* ---- frequency-domain filtering ---- */

HF_API double hf_butterworth_response(double freq, double cutoff, uint32_t order);
HF_API hf_status hf_mask_create_butterworth(uint32_t height, uint32_t width, double cutoff,
                                            uint32_t order, hf_mask** out);
/* Ideal 0/1 partition at the cutoff, for exact band splits. */
HF_API hf_status hf_mask_create_ideal(uint32_t height, uint32_t width, double cutoff,
                                      hf_mask** out);
HF_API void hf_mask_free(hf_mask* mask);
HF_API hf_status hf_mask_value(const hf_mask* mask, uint32_t u, uint32_t v, double* out);
/* target + weight*(lowpass(source) - lowpass(target)) through the mask. */
HF_API hf_status hf_lowpass_swap(const hf_grid* target, const hf_grid* source,
                                 const hf_mask* mask, double weight, hf_grid** out);

/* ---- schedules and noise ---- */

typedef enum hf_schedule_shape {
    HF_SCHEDULE_UNIFORM = 0,
    HF_SCHEDULE_SHIFT = 1
} hf_schedule_shape;

HF_API hf_status hf_schedule_create(uint32_t steps, hf_schedule_shape shape, double shift,
                                    hf_schedule** out);
HF_API void hf_schedule_free(hf_schedule* schedule);
HF_API hf_status hf_schedule_steps(const hf_schedule* schedule, uint32_t* out);
HF_API hf_status hf_schedule_time(const hf_schedule* schedule, uint32_t index, double* out);

/* Deterministic per-coordinate standard normals, keyed by (seed, stage). */
HF_API hf_status hf_sample_noise(uint64_t seed, uint32_t stage, uint32_t channels,
                                 uint32_t height, uint32_t width, hf_grid** out);
HF_API hf_status hf_mix_noise(const hf_grid* x0, const hf_grid* noise, double t, hf_grid** out);

/* ---- velocity fields ---- */

HF_API hf_status hf_field_create_gaussian(double mu0, double sigma0, uint32_t channels,
                                          uint32_t height, uint32_t width, hf_field** out);
HF_API hf_status hf_field_create_anchored(const hf_grid* target, hf_field** out);
HF_API hf_status hf_field_create_coarse2fine(const hf_grid* target, double blur0,
                                             hf_field** out);
HF_API hf_status hf_field_create_mlp(const char* weights_path, uint32_t channels,
                                     uint32_t height, uint32_t width, hf_field** out);
HF_API void hf_field_free(hf_field* field);
HF_API hf_status hf_field_evaluate(const hf_field* field, const hf_grid* x, double t,
                                   hf_grid** out);

/* ---- sampling ---- */

HF_API hf_status hf_predict_clean(const hf_grid* x, const hf_grid* v, double t, hf_grid** out);
HF_API hf_status hf_euler_step(const hf_grid* x, const hf_grid* v, double t_from, double t_to,
                               hf_grid** out);
HF_API hf_status hf_sample(const hf_field* field, const hf_schedule* schedule,
                           const hf_grid* init, double start_t, int record,
                           hf_trajectory** out);

HF_API void hf_trajectory_free(hf_trajectory* trajectory);
HF_API hf_status hf_trajectory_step_count(const hf_trajectory* trajectory, uint32_t* out);
HF_API hf_status hf_trajectory_step_time(const hf_trajectory* trajectory, uint32_t index,
                                         double* out);

typedef enum hf_step_grid {
    HF_STEP_X = 0,   /* state at t */
    HF_STEP_V = 1,   /* velocity used for the Euler update */
    HF_STEP_X0 = 2,  /* predicted clean sample, x - t*v */
    HF_STEP_X1 = 3   /* predicted noise endpoint, x0 + v */
} hf_step_grid;

HF_API hf_status hf_trajectory_step_grid(const hf_trajectory* trajectory, uint32_t index,
                                         hf_step_grid which, hf_grid** out);
HF_API hf_status hf_trajectory_terminal(const hf_trajectory* trajectory, hf_grid** out);
HF_API hf_status hf_trajectory_save(const hf_trajectory* trajectory, const char* path);
HF_API hf_status hf_trajectory_load(const char* path, hf_trajectory** out);

/* Per-step summary for inspection. residual_bound widens with the f32
 * storage error when the trajectory came from a dump. */
typedef struct hf_step_stats {
    double t;
    double eq4_residual;
    double residual_bound;
    double velocity_rms;
    double accel_rms;
} hf_step_stats;

HF_API hf_status hf_trajectory_step_stats(const hf_trajectory* trajectory, uint32_t index,
                                          hf_step_stats* out);

/* ---- reference flow ---- */

HF_API hf_status hf_reference_build(const hf_trajectory* low, uint32_t target_height,
                                    uint32_t target_width, hf_interp method,
                                    hf_reference** out);
HF_API void hf_reference_free(hf_reference* reference);
HF_API hf_status hf_reference_count(const hf_reference* reference, uint32_t* out);
HF_API hf_status hf_reference_time(const hf_reference* reference, uint32_t index, double* out);
HF_API hf_status hf_reference_clean(const hf_reference* reference, uint32_t index,
                                    hf_grid** out);
HF_API hf_status hf_reference_anchor(const hf_reference* reference, hf_grid** out);
/* v_ref(t_i) - v_ref(t_{i-1}) across the transition into entry i (i >= 1). */
HF_API hf_status hf_reference_velocity_delta(const hf_reference* reference, uint32_t index,
                                             hf_grid** out);
HF_API hf_status hf_reference_save(const hf_reference* reference, const char* path);
HF_API hf_status hf_reference_load(const char* path, hf_reference** out);

/* ---- guidance ---- */

typedef enum hf_weight_kind {
    HF_WEIGHT_PAPER_LINEAR = 0, /* t / tau */
    HF_WEIGHT_CONSTANT = 1,
    HF_WEIGHT_OFF = 2
} hf_weight_kind;

typedef enum hf_guidance_mode {
    HF_GUIDANCE_TIME_MATCHED = 0,
    HF_GUIDANCE_CONSTANT_ANCHOR = 1
} hf_guidance_mode;

typedef struct hf_guidance_params {
    double tau;               /* noise-addition ratio, on the schedule grid */
    double cutoff;            /* Butterworth normalized cutoff D */
    uint32_t order;           /* Butterworth order n */
    hf_weight_kind alpha_kind;
    double alpha_value;       /* used when alpha_kind is CONSTANT */
    hf_weight_kind beta_kind;
    double beta_value;
    int enable_init;
    int enable_direction;
    int enable_accel;
} hf_guidance_params;

/* Paper defaults: tau 0.6, D 0.4, order 4, alpha = beta = t/tau, all on. */
HF_API void hf_guidance_params_defaults(hf_guidance_params* params);

HF_API hf_status hf_guidance_weight(double t, double tau, double* out);
HF_API hf_status hf_init_align(const hf_reference* reference, double tau, const hf_grid* noise,
                               hf_grid** out);
HF_API hf_status hf_direction_align(const hf_grid* x0_high, const hf_grid* x0_ref,
                                    const hf_mask* mask, double alpha, hf_grid** out);
HF_API hf_status hf_accel_align(const hf_grid* v_cur, const hf_grid* v_prev,
                                const hf_grid* ref_delta, double beta, hf_grid** out);
HF_API hf_status hf_guided_sample(const hf_field* field, const hf_schedule* schedule,
                                  const hf_reference* reference,
                                  const hf_guidance_params* params, uint64_t noise_seed,
                                  uint32_t noise_stage, hf_guidance_mode mode, int record,
                                  hf_trajectory** out);

/* ---- metrics ---- */

HF_API hf_status hf_mse(const hf_grid* a, const hf_grid* b, double* out);
HF_API hf_status hf_lowband_mse(const hf_grid* a, const hf_grid* b, double cutoff,
                                uint32_t order, double* out);
HF_API hf_status hf_psnr(const hf_grid* a, const hf_grid* b, double peak, double* out);
HF_API hf_status hf_highband_energy_ratio(const hf_grid* grid, double cutoff, uint32_t order,
                                          double* out);
HF_API hf_status hf_radial_spectrum(const hf_grid* grid, uint32_t bins, double* out_bins);
HF_API hf_status hf_accel_spectrum_distance(const hf_trajectory* trajectory,
                                            const hf_reference* reference, uint32_t bins,
                                            double* out);

/* ---- configuration and drivers ---- */

HF_API hf_status hf_config_load(const char* path, hf_config** out);
HF_API hf_status hf_config_parse(const char* text, hf_config** out);
HF_API void hf_config_free(hf_config* config);
/* Dotted keys: "base.steps", "mode", "stage.1.guidance.tau", ... */
HF_API hf_status hf_config_set(hf_config* config, const char* dotted_key, const char* value);
/* Copies the value into buffer (NUL terminated, truncating); absent keys fail. */
HF_API hf_status hf_config_get(const hf_config* config, const char* dotted_key, char* buffer,
                               size_t buffer_size);
/* Validates the document; errors name the offending key. */
HF_API hf_status hf_config_validate(const hf_config* config);

typedef struct hf_stage_info {
    uint32_t channels;
    uint32_t height;
    uint32_t width;
    uint32_t steps;
    uint64_t seed;
    uint32_t scale_from_base;
} hf_stage_info;

HF_API hf_status hf_config_stage_count(const hf_config* config, uint32_t* out);
HF_API hf_status hf_config_stage_info(const hf_config* config, uint32_t stage,
                                      hf_stage_info* out);
/* Velocity field / schedule exactly as the drivers would build them. */
HF_API hf_status hf_config_stage_field(const hf_config* config, uint32_t stage, hf_field** out);
HF_API hf_status hf_config_schedule(const hf_config* config, uint32_t stage,
                                    hf_schedule** out);

typedef struct hf_run_options {
    const char* out_dir;      /* NULL keeps the config's out_dir */
    int dump_trajectories;
    int quiet;
    int has_seed_override;
    uint64_t seed_override;
} hf_run_options;

/* generate: single unguided stage, writes image.ppm (+ image.hft).
 * cascade: full multi-stage run, writes stageN.ppm/.hft/.hfr + metrics.csv.
 * compare: alignment ablation grid, writes compare.csv.
 * HIFLOW_THREADS caps compare's seed parallelism. */
HF_API hf_status hf_run_generate(const hf_config* config, const hf_run_options* options);
HF_API hf_status hf_run_cascade(const hf_config* config, const hf_run_options* options);
HF_API hf_status hf_run_compare(const hf_config* config, const hf_run_options* options);

/* ---- dump inspection ---- */

typedef enum hf_dump_kind {
    HF_DUMP_TRAJECTORY = 1, /* HFT1 */
    HF_DUMP_REFERENCE = 2   /* HFR1 */
} hf_dump_kind;

HF_API hf_status hf_dump_probe(const char* path, hf_dump_kind* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* HIFLOW_H */
