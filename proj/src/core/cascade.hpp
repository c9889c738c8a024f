#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core/field.hpp"
#include "core/guidance.hpp"
#include "core/metrics.hpp"
#include "core/reference.hpp"
#include "core/sampler.hpp"
#include "core/schedule.hpp"

namespace hiflow {

// Line-oriented `key = value` document with [stage.N] sections. `#` lines are
// comments. Floats round-trip bit-exactly (shortest decimal in, from_chars
// out). Keys are validated when the document is resolved, so overrides can
// land in any order; unknown keys are rejected by name.
class Config {
public:
    static Config load(const std::string& path);
    static Config from_string(const std::string& text);

    // Dotted path: global keys verbatim ("base.steps", "mode", "field.kind"),
    // stage keys prefixed ("stage.1.guidance.tau"). Last writer wins.
    void set(const std::string& dotted_key, const std::string& value);
    std::optional<std::string> get(const std::string& dotted_key) const;

    std::string to_string() const;

    struct Section {
        std::string name;  // "" for the global section
        std::vector<std::pair<std::string, std::string>> entries;
    };
    const std::vector<Section>& sections() const { return sections_; }

private:
    Section* find_section(const std::string& name);
    const Section* find_section(const std::string& name) const;
    std::vector<Section> sections_{Section{"", {}}};
};

enum class FieldKind {
    Gaussian = 0,
    Anchored = 1,
    CoarseToFine = 2,
    Mlp = 3,
};

struct FieldSpec {
    FieldKind kind = FieldKind::Gaussian;
    double mu0 = 0.0;
    double sigma0 = 1.0;
    double blur0 = 6.0;
    bool blur0_explicit = false;  // otherwise scaled with the stage factor
    std::uint64_t texture_seed = 0;
    double texture_amp = 0.0;
    TargetKind target_kind = TargetKind::Rings;
    std::string target_image;  // used instead of target_kind when non-empty
    std::string weights_path;  // mlp
};

std::unique_ptr<VelocityField> make_field(const FieldSpec& spec, int channels,
                                          int height, int width);

enum class CascadeMode {
    HiFlow = 0,
    ConstantAnchor = 1,
    None = 2,
};

struct StageSpec {
    int scale = 2;
    int steps = 0;  // 0 inherits the base step count
    std::uint64_t seed = 0;
    bool seed_explicit = false;
    GuidanceConfig guidance;
    FieldSpec field;
};

struct CascadeSpec {
    int channels = 1;
    int base_height = 64;
    int base_width = 64;
    int base_steps = 30;
    std::uint64_t base_seed = 1;
    ScheduleShape schedule_shape = ScheduleShape::Uniform;
    double schedule_shift = 1.0;
    CascadeMode mode = CascadeMode::HiFlow;
    std::string out_dir = "out";
    FieldSpec field;
    std::vector<StageSpec> stages;
    int compare_seeds = 2;
    int bins = 16;

    int stage_count() const { return 1 + static_cast<int>(stages.size()); }
    int stage_scale_from_base(int stage) const;   // cumulative factor
    int stage_height(int stage) const;
    int stage_width(int stage) const;
    int stage_steps(int stage) const;
    std::uint64_t stage_seed(int stage) const;
    FieldSpec stage_field_spec(int stage) const;  // blur0 pre-scaled
};

// Validates and resolves the raw document; throws InvalidArgument naming the
// offending key on anything unknown or malformed.
CascadeSpec resolve_config(const Config& config);

struct RunOptions {
    std::string out_dir;  // empty keeps the config's choice
    bool dump_trajectories = false;
    bool write_files = true;
    bool quiet = false;
    std::optional<std::uint64_t> seed_override;
};

struct StageResult {
    std::string mode_label;
    std::uint64_t seed = 0;
    ImageGrid terminal;
    Trajectory trajectory;
    MetricReport report;
};

struct CascadeResult {
    std::vector<StageResult> stages;
    std::vector<std::string> files_written;
};

// Stage 0 is an unguided run; each later stage builds a reference flow from
// the previous stage's (f32-quantized) trajectory and samples with the
// configured guidance mode. Bit-deterministic for a fixed spec.
CascadeResult run_cascade(const CascadeSpec& spec, const RunOptions& options);

// Single-stage unguided sampling; writes image.ppm (+ image.hft on request).
CascadeResult run_generate(const CascadeSpec& spec, const RunOptions& options);

struct CompareRow {
    std::string config;
    std::uint64_t seed = 0;
    std::uint64_t hash = 0;
    double lowband_mse = 0.0;
    double highband_energy_ratio = 0.0;
    double psnr_vs_reference = 0.0;
    double accel_spectrum_dist = 0.0;
};

struct CompareResult {
    std::vector<CompareRow> rows;
    std::string csv_path;
};

// The alignment ablation grid (none, g_i, g_i+g_d, g_i+g_d+g_a) across
// compare_seeds consecutive seeds on the first guided stage. Seeds may run
// in parallel (HIFLOW_THREADS caps the worker count); rows come out sorted
// by (configuration, seed) either way.
CompareResult run_compare(const CascadeSpec& spec, const RunOptions& options);

// Worker cap from HIFLOW_THREADS, hardware concurrency otherwise.
int thread_budget();

}  // namespace hiflow
