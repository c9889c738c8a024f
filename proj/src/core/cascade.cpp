#include "core/cascade.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "core/errors.hpp"
#include "core/image_io.hpp"

namespace fs = std::filesystem;

namespace hiflow {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& value, const std::string& key) {
    double out = 0.0;
    const char* first = value.data();
    const char* last = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last)
        throw_invalid("config: key '" + key + "' expects a number, got '" + value + "'");
    return out;
}

long long parse_int(const std::string& value, const std::string& key) {
    long long out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw_invalid("config: key '" + key + "' expects an integer, got '" + value + "'");
    return out;
}

std::uint64_t parse_u64(const std::string& value, const std::string& key) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw_invalid("config: key '" + key + "' expects an unsigned integer, got '" + value + "'");
    return out;
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw_invalid("config: key '" + key + "' expects true/false, got '" + value + "'");
}

WeightSchedule parse_weight(const std::string& value, const std::string& key) {
    if (value == "paper_linear") return {WeightKind::PaperLinear, 1.0};
    if (value == "off") return {WeightKind::Off, 0.0};
    if (value.rfind("constant:", 0) == 0)
        return {WeightKind::Constant, parse_double(value.substr(9), key)};
    throw_invalid("config: key '" + key + "' expects paper_linear, constant:<w> or off, got '" +
                  value + "'");
}

// Applies a "field.*" key; returns false when the key is not a field key.
bool apply_field_key(FieldSpec& field, const std::string& key, const std::string& value,
                     const std::string& full_key) {
    if (key == "field.kind") {
        if (value == "gaussian") field.kind = FieldKind::Gaussian;
        else if (value == "anchored") field.kind = FieldKind::Anchored;
        else if (value == "coarse2fine") field.kind = FieldKind::CoarseToFine;
        else if (value == "mlp") field.kind = FieldKind::Mlp;
        else throw_invalid("config: key '" + full_key + "' has unknown field kind '" + value + "'");
    } else if (key == "field.mu0") {
        field.mu0 = parse_double(value, full_key);
    } else if (key == "field.sigma0") {
        field.sigma0 = parse_double(value, full_key);
    } else if (key == "field.blur0") {
        field.blur0 = parse_double(value, full_key);
        field.blur0_explicit = true;
    } else if (key == "field.texture_seed") {
        field.texture_seed = parse_u64(value, full_key);
    } else if (key == "field.texture_amp") {
        field.texture_amp = parse_double(value, full_key);
    } else if (key == "field.target") {
        if (value.rfind("image:", 0) == 0) {
            field.target_image = value.substr(6);
        } else if (value == "gradient") field.target_kind = TargetKind::Gradient;
        else if (value == "rings") field.target_kind = TargetKind::Rings;
        else if (value == "blobs") field.target_kind = TargetKind::Blobs;
        else if (value == "checker") field.target_kind = TargetKind::Checker;
        else throw_invalid("config: key '" + full_key + "' has unknown target '" + value + "'");
    } else if (key == "field.weights") {
        field.weights_path = value;
    } else {
        return false;
    }
    return true;
}

const char* mode_label(CascadeMode mode) {
    switch (mode) {
        case CascadeMode::HiFlow: return "hiflow";
        case CascadeMode::ConstantAnchor: return "constant_anchor";
        case CascadeMode::None: return "none";
    }
    return "?";
}

}  // namespace

Config Config::load(const std::string& path) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) throw_io("config: not a readable file: " + path);
    std::ifstream in(path);
    if (!in) throw_io("config: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

Config Config::from_string(const std::string& text) {
    Config config;
    std::string current;  // section name
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw_format("config line " + std::to_string(lineno) + ": unterminated section header");
            current = trim(t.substr(1, t.size() - 2));
            if (current.rfind("stage.", 0) != 0)
                throw_format("config line " + std::to_string(lineno) + ": unknown section '[" +
                             current + "]'");
            config.sections_.push_back({current, {}});
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw_format("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw_format("config line " + std::to_string(lineno) + ": empty key");
        config.find_section(current)->entries.emplace_back(key, value);
    }
    return config;
}

Config::Section* Config::find_section(const std::string& name) {
    for (Section& s : sections_)
        if (s.name == name) return &s;
    sections_.push_back({name, {}});
    return &sections_.back();
}

const Config::Section* Config::find_section(const std::string& name) const {
    for (const Section& s : sections_)
        if (s.name == name) return &s;
    return nullptr;
}

void Config::set(const std::string& dotted_key, const std::string& value) {
    std::string section, key;
    if (dotted_key.rfind("stage.", 0) == 0) {
        const std::size_t second = dotted_key.find('.', 6);
        if (second == std::string::npos)
            throw_invalid("config override '" + dotted_key + "': expected stage.N.<key>");
        section = dotted_key.substr(0, second);
        key = dotted_key.substr(second + 1);
    } else {
        key = dotted_key;
    }
    if (key.empty()) throw_invalid("config override '" + dotted_key + "': empty key");
    Section* s = find_section(section);
    for (auto& [k, v] : s->entries)
        if (k == key) {
            v = value;
            return;
        }
    s->entries.emplace_back(key, value);
}

std::optional<std::string> Config::get(const std::string& dotted_key) const {
    std::string section, key;
    if (dotted_key.rfind("stage.", 0) == 0) {
        const std::size_t second = dotted_key.find('.', 6);
        if (second == std::string::npos) return std::nullopt;
        section = dotted_key.substr(0, second);
        key = dotted_key.substr(second + 1);
    } else {
        key = dotted_key;
    }
    const Section* s = find_section(section);
    if (!s) return std::nullopt;
    for (const auto& [k, v] : s->entries)
        if (k == key) return v;
    return std::nullopt;
}

std::string Config::to_string() const {
    std::string out;
    for (const Section& s : sections_) {
        if (!s.name.empty()) out += "[" + s.name + "]\n";
        for (const auto& [k, v] : s.entries) out += k + " = " + v + "\n";
    }
    return out;
}

int CascadeSpec::stage_scale_from_base(int stage) const {
    int f = 1;
    for (int k = 0; k < stage; ++k) f *= stages[static_cast<std::size_t>(k)].scale;
    return f;
}

int CascadeSpec::stage_height(int stage) const { return base_height * stage_scale_from_base(stage); }
int CascadeSpec::stage_width(int stage) const { return base_width * stage_scale_from_base(stage); }

int CascadeSpec::stage_steps(int stage) const {
    if (stage == 0) return base_steps;
    const int s = stages[static_cast<std::size_t>(stage - 1)].steps;
    return s > 0 ? s : base_steps;
}

std::uint64_t CascadeSpec::stage_seed(int stage) const {
    if (stage == 0) return base_seed;
    const StageSpec& st = stages[static_cast<std::size_t>(stage - 1)];
    return st.seed_explicit ? st.seed : base_seed;
}

FieldSpec CascadeSpec::stage_field_spec(int stage) const {
    if (stage == 0) return field;
    FieldSpec f = stages[static_cast<std::size_t>(stage - 1)].field;
    if (!f.blur0_explicit) f.blur0 = field.blur0 * stage_scale_from_base(stage);
    return f;
}

CascadeSpec resolve_config(const Config& config) {
    CascadeSpec spec;

    // Global section first regardless of document order.
    for (const Config::Section& section : config.sections()) {
        if (!section.name.empty()) continue;
        for (const auto& [key, value] : section.entries) {
            if (key == "base.height") spec.base_height = static_cast<int>(parse_int(value, key));
            else if (key == "base.width") spec.base_width = static_cast<int>(parse_int(value, key));
            else if (key == "base.channels") spec.channels = static_cast<int>(parse_int(value, key));
            else if (key == "base.steps") spec.base_steps = static_cast<int>(parse_int(value, key));
            else if (key == "base.seed") spec.base_seed = parse_u64(value, key);
            else if (key == "base.schedule") {
                if (value == "uniform") {
                    spec.schedule_shape = ScheduleShape::Uniform;
                } else if (value.rfind("shift:", 0) == 0) {
                    spec.schedule_shape = ScheduleShape::Shift;
                    spec.schedule_shift = parse_double(value.substr(6), key);
                } else {
                    throw_invalid("config: key 'base.schedule' expects uniform or shift:<s>, got '" +
                                  value + "'");
                }
            } else if (key == "mode") {
                if (value == "hiflow") spec.mode = CascadeMode::HiFlow;
                else if (value == "constant_anchor") spec.mode = CascadeMode::ConstantAnchor;
                else if (value == "none") spec.mode = CascadeMode::None;
                else throw_invalid("config: key 'mode' has unknown value '" + value + "'");
            } else if (key == "out_dir") {
                spec.out_dir = value;
            } else if (key == "compare.seeds") {
                spec.compare_seeds = static_cast<int>(parse_int(value, key));
            } else if (key == "compare.bins") {
                spec.bins = static_cast<int>(parse_int(value, key));
            } else if (!apply_field_key(spec.field, key, value, key)) {
                throw_invalid("config: unknown key '" + key + "'");
            }
        }
    }

    // Stage sections must be stage.1..stage.K in order.
    int expected = 1;
    for (const Config::Section& section : config.sections()) {
        if (section.name.empty()) continue;
        const std::string num = section.name.substr(6);
        long long n = 0;
        auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), n);
        if (ec != std::errc() || ptr != num.data() + num.size() || n != expected)
            throw_invalid("config: stage sections must be [stage.1]..[stage.K] in order, got [" +
                          section.name + "]");
        const int stage_index = expected - 1;  // 0-based guided stage
        ++expected;

        StageSpec stage;
        stage.field = spec.field;
        stage.field.blur0_explicit = false;
        stage.guidance.tau = (stage_index == 0) ? 0.6 : 0.3;  // default ladder 0.6, 0.3, 0.3, ...

        for (const auto& [key, value] : section.entries) {
            const std::string full_key = section.name + "." + key;
            if (key == "scale") stage.scale = static_cast<int>(parse_int(value, full_key));
            else if (key == "steps") stage.steps = static_cast<int>(parse_int(value, full_key));
            else if (key == "seed") {
                stage.seed = parse_u64(value, full_key);
                stage.seed_explicit = true;
            } else if (key == "guidance.tau") stage.guidance.tau = parse_double(value, full_key);
            else if (key == "guidance.cutoff") stage.guidance.cutoff = parse_double(value, full_key);
            else if (key == "guidance.order")
                stage.guidance.order = static_cast<int>(parse_int(value, full_key));
            else if (key == "guidance.alpha") stage.guidance.alpha = parse_weight(value, full_key);
            else if (key == "guidance.beta") stage.guidance.beta = parse_weight(value, full_key);
            else if (key == "guidance.g_i") stage.guidance.enable_init = parse_bool(value, full_key);
            else if (key == "guidance.g_d") stage.guidance.enable_direction = parse_bool(value, full_key);
            else if (key == "guidance.g_a") stage.guidance.enable_accel = parse_bool(value, full_key);
            else if (!apply_field_key(stage.field, key, value, full_key))
                throw_invalid("config: unknown key '" + full_key + "'");
        }
        spec.stages.push_back(std::move(stage));
    }

    // Contract checks.
    if (spec.base_height < 1 || spec.base_width < 1) throw_invalid("config: base dims must be positive");
    if (spec.channels != 1 && spec.channels != 3)
        throw_invalid("config: base.channels must be 1 or 3 (PPM output)");
    if (spec.base_steps < 1) throw_invalid("config: base.steps must be >= 1");
    if (spec.compare_seeds < 1) throw_invalid("config: compare.seeds must be >= 1");
    if (spec.bins < 1) throw_invalid("config: compare.bins must be >= 1");
    for (std::size_t k = 0; k < spec.stages.size(); ++k) {
        const StageSpec& st = spec.stages[k];
        const std::string where = "stage." + std::to_string(k + 1);
        if (st.scale < 2) throw_invalid("config: " + where + ".scale must be an integer >= 2");
        if (st.steps < 0) throw_invalid("config: " + where + ".steps must be >= 1");
        st.guidance.validate();
        if (spec.mode == CascadeMode::HiFlow && st.steps > 0 && st.steps != spec.base_steps)
            throw_invalid("config: " + where +
                          ".steps must match base.steps in hiflow mode (shared time grid)");
    }
    return spec;
}

std::unique_ptr<VelocityField> make_field(const FieldSpec& spec, int channels,
                                          int height, int width) {
    auto build_target = [&]() -> ImageGrid {
        ImageGrid target;
        if (!spec.target_image.empty()) {
            ImageGrid img = read_image(spec.target_image);
            if (img.channels() != channels) {
                if (img.channels() == 1) {
                    ImageGrid widened(channels, img.height(), img.width());
                    for (int c = 0; c < channels; ++c)
                        for (int y = 0; y < img.height(); ++y)
                            for (int x = 0; x < img.width(); ++x)
                                widened.at(c, y, x) = img.at(0, y, x);
                    img = std::move(widened);
                } else {
                    throw_invalid("field target image has " + std::to_string(img.channels()) +
                                  " channels, config wants " + std::to_string(channels));
                }
            }
            if (img.height() == height && img.width() == width) {
                target = std::move(img);
            } else if (height % img.height() == 0 && width % img.width() == 0 &&
                       height / img.height() == width / img.width()) {
                target = upsample(img, height / img.height(), Interp::Bicubic);
            } else {
                throw_invalid("field target image dims do not match the stage resolution");
            }
        } else {
            target = render_target(spec.target_kind, channels, height, width);
        }
        if (spec.texture_amp != 0.0)
            target += make_texture(spec.texture_seed, spec.texture_amp, channels, height, width);
        return target;
    };

    switch (spec.kind) {
        case FieldKind::Gaussian:
            return std::make_unique<GaussianField>(spec.mu0, spec.sigma0, channels, height, width);
        case FieldKind::Anchored:
            return std::make_unique<AnchoredField>(build_target());
        case FieldKind::CoarseToFine:
            return std::make_unique<CoarseToFineField>(build_target(), spec.blur0);
        case FieldKind::Mlp: {
            if (spec.weights_path.empty())
                throw_invalid("field.kind = mlp requires field.weights = <path>");
            return std::make_unique<MlpField>(load_mlp_weights(spec.weights_path), channels,
                                              height, width);
        }
    }
    throw_invalid("unknown field kind");
}

int thread_budget() {
    if (const char* env = std::getenv("HIFLOW_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

namespace {

void parallel_for(int jobs, int max_threads, const std::function<void(int)>& fn) {
    const int workers = std::min(jobs, std::max(1, max_threads));
    if (workers <= 1) {
        for (int i = 0; i < jobs; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < jobs; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

void write_metrics_csv(const std::string& path, const std::vector<StageResult>& stages, int bins,
                       std::vector<std::string>& files_written) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_io("cannot open " + path);
    out << "stage,mode,seed,lowband_mse,highband_energy_ratio,psnr_vs_reference,accel_spectrum_dist";
    for (int k = 0; k < bins; ++k) out << ",rs_" << k;
    out << "\n";
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const StageResult& s = stages[i];
        out << i << "," << s.mode_label << "," << s.seed;
        out << "," << format_csv_value(s.report.scalars.at("lowband_mse"));
        out << "," << format_csv_value(s.report.scalars.at("highband_energy_ratio"));
        out << "," << format_csv_value(s.report.scalars.at("psnr_vs_reference"));
        out << "," << format_csv_value(s.report.scalars.at("accel_spectrum_dist"));
        for (int k = 0; k < bins; ++k)
            out << "," << format_csv_value(k < static_cast<int>(s.report.radial.size())
                                               ? s.report.radial[static_cast<std::size_t>(k)]
                                               : 0.0);
        out << "\n";
    }
    if (!out) throw_io("write failed for " + path);
    files_written.push_back(path);
}

}  // namespace

CascadeResult run_cascade(const CascadeSpec& spec_in, const RunOptions& options) {
    CascadeSpec spec = spec_in;
    if (options.seed_override) spec.base_seed = *options.seed_override;
    const std::string out_dir = options.out_dir.empty() ? spec.out_dir : options.out_dir;
    if (options.write_files) fs::create_directories(out_dir);

    CascadeResult result;
    const TimeSchedule base_schedule =
        make_schedule(spec.base_steps, spec.schedule_shape, spec.schedule_shift);

    // Stage 0: unguided base generation.
    auto field0 = make_field(spec.stage_field_spec(0), spec.channels, spec.base_height,
                             spec.base_width);
    const NoiseSpec noise0{spec.stage_seed(0), 0};
    ImageGrid init = sample_noise(noise0, spec.channels, spec.base_height, spec.base_width);
    Trajectory trajectory = sample(*field0, base_schedule, init, 1.0, true);
    Trajectory handoff = quantize_trajectory(trajectory);

    {
        StageResult sr;
        sr.mode_label = "none";
        sr.seed = spec.stage_seed(0);
        sr.terminal = trajectory.terminal;
        sr.report = compute_report(trajectory.terminal, trajectory.terminal, nullptr, nullptr,
                                   0.4, 4, spec.bins);
        sr.trajectory = std::move(trajectory);
        result.stages.push_back(std::move(sr));
    }
    if (options.write_files) {
        const std::string ppm = (fs::path(out_dir) / "stage0.ppm").string();
        write_ppm(result.stages[0].terminal, ppm);
        result.files_written.push_back(ppm);
        if (options.dump_trajectories) {
            const std::string hft = (fs::path(out_dir) / "stage0.hft").string();
            save_trajectory(result.stages[0].trajectory, hft);
            result.files_written.push_back(hft);
        }
    }

    for (int stage = 1; stage < spec.stage_count(); ++stage) {
        const StageSpec& st = spec.stages[static_cast<std::size_t>(stage - 1)];
        const int h = spec.stage_height(stage);
        const int w = spec.stage_width(stage);
        const TimeSchedule schedule =
            spec.stage_steps(stage) == spec.base_steps
                ? base_schedule
                : make_schedule(spec.stage_steps(stage), spec.schedule_shape, spec.schedule_shift);

        const ReferenceFlow reference = build_reference(handoff, h, w, Interp::Bicubic);
        auto field = make_field(spec.stage_field_spec(stage), spec.channels, h, w);

        GuidanceConfig guidance = st.guidance;
        GuidanceMode gmode = GuidanceMode::TimeMatched;
        if (spec.mode == CascadeMode::None) {
            guidance.enable_init = guidance.enable_direction = guidance.enable_accel = false;
            guidance.tau = 1.0;
        } else if (spec.mode == CascadeMode::ConstantAnchor) {
            gmode = GuidanceMode::ConstantAnchor;
        }

        const NoiseSpec noise{spec.stage_seed(stage), static_cast<std::uint32_t>(stage)};
        Trajectory traj = guided_sample(*field, schedule, reference, guidance, noise, true, gmode);
        handoff = quantize_trajectory(traj);

        StageResult sr;
        sr.mode_label = mode_label(spec.mode);
        sr.seed = spec.stage_seed(stage);
        sr.terminal = traj.terminal;
        sr.report = compute_report(traj.terminal, reference.anchor(), &traj, &reference,
                                   guidance.cutoff, guidance.order, spec.bins);
        sr.trajectory = std::move(traj);

        if (options.write_files) {
            const std::string tag = "stage" + std::to_string(stage);
            const std::string ppm = (fs::path(out_dir) / (tag + ".ppm")).string();
            write_ppm(sr.terminal, ppm);
            result.files_written.push_back(ppm);
            if (options.dump_trajectories) {
                const std::string hft = (fs::path(out_dir) / (tag + ".hft")).string();
                save_trajectory(sr.trajectory, hft);
                result.files_written.push_back(hft);
                const std::string hfr = (fs::path(out_dir) / (tag + ".hfr")).string();
                save_reference(reference, hfr);
                result.files_written.push_back(hfr);
            }
        }
        result.stages.push_back(std::move(sr));
    }

    if (options.write_files)
        write_metrics_csv((fs::path(out_dir) / "metrics.csv").string(), result.stages, spec.bins,
                          result.files_written);
    return result;
}

CascadeResult run_generate(const CascadeSpec& spec_in, const RunOptions& options) {
    CascadeSpec spec = spec_in;
    if (options.seed_override) spec.base_seed = *options.seed_override;
    const std::string out_dir = options.out_dir.empty() ? spec.out_dir : options.out_dir;
    if (options.write_files) fs::create_directories(out_dir);

    const TimeSchedule schedule =
        make_schedule(spec.base_steps, spec.schedule_shape, spec.schedule_shift);
    auto field = make_field(spec.stage_field_spec(0), spec.channels, spec.base_height,
                            spec.base_width);
    const NoiseSpec noise{spec.stage_seed(0), 0};
    ImageGrid init = sample_noise(noise, spec.channels, spec.base_height, spec.base_width);
    Trajectory trajectory = sample(*field, schedule, init, 1.0, true);

    CascadeResult result;
    StageResult sr;
    sr.mode_label = "none";
    sr.seed = spec.stage_seed(0);
    sr.terminal = trajectory.terminal;
    sr.report = compute_report(trajectory.terminal, trajectory.terminal, nullptr, nullptr, 0.4, 4,
                               spec.bins);
    sr.trajectory = std::move(trajectory);
    result.stages.push_back(std::move(sr));

    if (options.write_files) {
        const std::string ppm = (fs::path(out_dir) / "image.ppm").string();
        write_ppm(result.stages[0].terminal, ppm);
        result.files_written.push_back(ppm);
        if (options.dump_trajectories) {
            const std::string hft = (fs::path(out_dir) / "image.hft").string();
            save_trajectory(result.stages[0].trajectory, hft);
            result.files_written.push_back(hft);
        }
    }
    return result;
}

CompareResult run_compare(const CascadeSpec& spec_in, const RunOptions& options) {
    CascadeSpec spec = spec_in;
    if (options.seed_override) spec.base_seed = *options.seed_override;
    if (spec.stages.empty())
        throw_invalid("compare needs at least one guided stage ([stage.1])");
    const std::string out_dir = options.out_dir.empty() ? spec.out_dir : options.out_dir;
    if (options.write_files) fs::create_directories(out_dir);

    struct Ablation {
        const char* label;
        bool gi, gd, ga;
        bool force_full_grid;  // tau = 1: no alignment at all
    };
    static constexpr Ablation kAblations[4] = {
        {"none", false, false, false, true},
        {"gi", true, false, false, false},
        {"gi+gd", true, true, false, false},
        {"gi+gd+ga", true, true, true, false},
    };

    const int seeds = spec.compare_seeds;
    const StageSpec& st = spec.stages[0];
    const int h = spec.stage_height(1);
    const int w = spec.stage_width(1);
    const TimeSchedule schedule =
        make_schedule(spec.base_steps, spec.schedule_shape, spec.schedule_shift);

    std::vector<CompareRow> rows(static_cast<std::size_t>(seeds) * 4);
    parallel_for(seeds, thread_budget(), [&](int j) {
        const std::uint64_t run_seed = spec.base_seed + static_cast<std::uint64_t>(j);

        auto field0 = make_field(spec.stage_field_spec(0), spec.channels, spec.base_height,
                                 spec.base_width);
        ImageGrid init = sample_noise(NoiseSpec{run_seed, 0}, spec.channels, spec.base_height,
                                      spec.base_width);
        const Trajectory low =
            quantize_trajectory(sample(*field0, schedule, init, 1.0, true));
        const ReferenceFlow reference = build_reference(low, h, w, Interp::Bicubic);
        auto field1 = make_field(spec.stage_field_spec(1), spec.channels, h, w);

        for (int a = 0; a < 4; ++a) {
            GuidanceConfig guidance = st.guidance;
            guidance.enable_init = kAblations[a].gi;
            guidance.enable_direction = kAblations[a].gd;
            guidance.enable_accel = kAblations[a].ga;
            if (kAblations[a].force_full_grid) guidance.tau = 1.0;

            const Trajectory traj = guided_sample(*field1, schedule, reference, guidance,
                                                  NoiseSpec{run_seed, 1}, true);
            CompareRow row;
            row.config = kAblations[a].label;
            row.seed = run_seed;
            row.hash = grid_hash(traj.terminal);
            row.lowband_mse =
                lowband_mse(traj.terminal, reference.anchor(), guidance.cutoff, guidance.order);
            row.highband_energy_ratio =
                highband_energy_ratio(traj.terminal, guidance.cutoff, guidance.order);
            row.psnr_vs_reference = psnr(traj.terminal, reference.anchor());
            row.accel_spectrum_dist = accel_spectrum_distance(traj, reference, spec.bins);
            rows[static_cast<std::size_t>(a) * seeds + j] = std::move(row);
        }
    });

    CompareResult result;
    result.rows = std::move(rows);
    if (options.write_files) {
        result.csv_path = (fs::path(out_dir) / "compare.csv").string();
        std::ofstream out(result.csv_path, std::ios::binary);
        if (!out) throw_io("cannot open " + result.csv_path);
        out << "config,seed,hash,lowband_mse,highband_energy_ratio,psnr_vs_reference,accel_spectrum_dist\n";
        char hex[17];
        for (const CompareRow& row : result.rows) {
            std::snprintf(hex, sizeof(hex), "%016llx",
                          static_cast<unsigned long long>(row.hash));
            out << row.config << "," << row.seed << "," << hex << ","
                << format_csv_value(row.lowband_mse) << ","
                << format_csv_value(row.highband_energy_ratio) << ","
                << format_csv_value(row.psnr_vs_reference) << ","
                << format_csv_value(row.accel_spectrum_dist) << "\n";
        }
        if (!out) throw_io("write failed for " + result.csv_path);
    }
    return result;
}

}  // namespace hiflow
