#include "core/sampler.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "core/errors.hpp"

namespace hiflow {

int Trajectory::index_at_time(double t, double tol) const {
    for (std::size_t i = 0; i < steps.size(); ++i)
        if (std::abs(steps[i].t - t) <= tol) return static_cast<int>(i);
    return -1;
}

ImageGrid predict_clean(const ImageGrid& x, const ImageGrid& v, double t) {
    require_same_dims(x, v, "predict_clean");
    if (!(t > 0.0)) throw_invalid("predict_clean: t must be > 0");
    ImageGrid out = x;
    double* dst = out.data().data();
    const double* vel = v.data().data();
    for (std::size_t i = 0; i < out.size(); ++i) dst[i] -= t * vel[i];
    return out;
}

ImageGrid euler_step(const ImageGrid& x, const ImageGrid& v, double t_from, double t_to) {
    require_same_dims(x, v, "euler_step");
    if (!(t_to < t_from))
        throw_invalid("euler_step: destination time must be below current time");
    const double dt = t_to - t_from;
    ImageGrid out = x;
    double* dst = out.data().data();
    const double* vel = v.data().data();
    for (std::size_t i = 0; i < out.size(); ++i) dst[i] += vel[i] * dt;
    return out;
}

Trajectory sample(const VelocityField& field, const TimeSchedule& schedule,
                  const ImageGrid& init, double start_t, bool record) {
    if (init.channels() != field.channels() || init.height() != field.height() ||
        init.width() != field.width())
        throw_invalid("sample: init dims do not match field context");
    const int start = schedule.index_of(start_t);
    if (start < 0) throw_invalid("sample: start time is not on the schedule grid");

    Trajectory trajectory;
    if (record) trajectory.steps.reserve(static_cast<std::size_t>(schedule.steps() - start));
    ImageGrid x = init;
    for (int i = start; i < schedule.steps(); ++i) {
        const double t = schedule.time(i);
        const double t_next = schedule.time(i + 1);
        ImageGrid v = field.evaluate(x, t);
        if (record) {
            ImageGrid x0 = predict_clean(x, v, t);
            ImageGrid x1 = x0 + v;
            trajectory.steps.push_back({t, x, std::move(v), std::move(x0), std::move(x1)});
            x = euler_step(x, trajectory.steps.back().v, t, t_next);
        } else {
            x = euler_step(x, v, t, t_next);
        }
    }
    trajectory.terminal = std::move(x);
    return trajectory;
}

namespace {

constexpr char kTrajMagic[4] = {'H', 'F', 'T', '1'};

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_f64(std::ostream& out, double v) {
    static_assert(sizeof(double) == 8);
    out.write(reinterpret_cast<const char*>(&v), 8);
}

void write_grid_f32(std::ostream& out, const ImageGrid& g) {
    std::vector<float> buf(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) buf[i] = static_cast<float>(g.data()[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (in.gcount() != 4) throw_format(path + ": truncated file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

double read_f64(std::istream& in, const std::string& path) {
    double v;
    in.read(reinterpret_cast<char*>(&v), 8);
    if (in.gcount() != 8) throw_format(path + ": truncated file");
    return v;
}

ImageGrid read_grid_f32(std::istream& in, int c, int h, int w, const std::string& path) {
    ImageGrid g(c, h, w);
    std::vector<float> buf(g.size());
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) != buf.size() * sizeof(float))
        throw_format(path + ": truncated file");
    for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] = static_cast<double>(buf[i]);
    return g;
}

void check_magic(std::istream& in, const char expect[4], const std::string& path) {
    char m[4];
    in.read(m, 4);
    if (in.gcount() != 4 || std::memcmp(m, expect, 4) != 0)
        throw_format(path + ": bad magic, expected " + std::string(expect, 4));
}

}  // namespace

void save_trajectory(const Trajectory& trajectory, const std::string& path) {
    if (trajectory.terminal.empty()) throw_invalid("save_trajectory: empty trajectory");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_io("save_trajectory: cannot open " + path);
    out.write(kTrajMagic, 4);
    write_u32(out, static_cast<std::uint32_t>(trajectory.steps.size()));
    write_u32(out, static_cast<std::uint32_t>(trajectory.terminal.channels()));
    write_u32(out, static_cast<std::uint32_t>(trajectory.terminal.height()));
    write_u32(out, static_cast<std::uint32_t>(trajectory.terminal.width()));
    for (const StepRecord& s : trajectory.steps) {
        write_f64(out, s.t);
        write_grid_f32(out, s.x);
        write_grid_f32(out, s.v);
        write_grid_f32(out, s.x0);
        write_grid_f32(out, s.x1);
    }
    write_grid_f32(out, trajectory.terminal);
    if (!out) throw_io("save_trajectory: write failed for " + path);
}

Trajectory load_trajectory(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io("load_trajectory: cannot open " + path);
    check_magic(in, kTrajMagic, path);
    const std::uint32_t count = read_u32(in, path);
    const int c = static_cast<int>(read_u32(in, path));
    const int h = static_cast<int>(read_u32(in, path));
    const int w = static_cast<int>(read_u32(in, path));
    if (c <= 0 || h <= 0 || w <= 0 || count > (1u << 20)) throw_format(path + ": implausible header");
    Trajectory trajectory;
    trajectory.steps.resize(count);
    double prev_t = 2.0;
    for (StepRecord& s : trajectory.steps) {
        s.t = read_f64(in, path);
        if (!(s.t < prev_t)) throw_format(path + ": step times not strictly decreasing");
        prev_t = s.t;
        s.x = read_grid_f32(in, c, h, w, path);
        s.v = read_grid_f32(in, c, h, w, path);
        s.x0 = read_grid_f32(in, c, h, w, path);
        s.x1 = read_grid_f32(in, c, h, w, path);
    }
    trajectory.terminal = read_grid_f32(in, c, h, w, path);
    if (in.peek() != EOF) throw_format(path + ": trailing bytes");
    return trajectory;
}

Trajectory quantize_trajectory(const Trajectory& trajectory) {
    Trajectory out;
    out.steps.reserve(trajectory.steps.size());
    for (const StepRecord& s : trajectory.steps)
        out.steps.push_back({s.t, quantize_f32(s.x), quantize_f32(s.v), quantize_f32(s.x0),
                             quantize_f32(s.x1)});
    out.terminal = quantize_f32(trajectory.terminal);
    return out;
}

StepStats step_stats(const Trajectory& trajectory, int i, bool from_dump) {
    if (i < 0 || i >= static_cast<int>(trajectory.steps.size()))
        throw_invalid("step_stats: index out of range");
    const StepRecord& s = trajectory.steps[static_cast<std::size_t>(i)];
    StepStats stats;
    stats.t = s.t;
    double max_res = 0.0, sum_v2 = 0.0;
    for (std::size_t k = 0; k < s.v.size(); ++k) {
        const double implied = (s.x.data()[k] - s.x0.data()[k]) / s.t;
        max_res = std::max(max_res, std::abs(s.v.data()[k] - implied));
        sum_v2 += s.v.data()[k] * s.v.data()[k];
    }
    stats.eq4_residual = max_res;
    stats.velocity_rms = std::sqrt(sum_v2 / static_cast<double>(s.v.size()));
    // f32 storage injects ~eps32*(|x| + |x0|)/t + eps32*|v| of residual.
    const double eps32 = 0x1.0p-24;
    stats.residual_bound =
        1e-9 + (from_dump
                    ? 4.0 * eps32 * ((s.x.max_abs() + s.x0.max_abs()) / s.t + s.v.max_abs())
                    : 0.0);
    if (i > 0) {
        const StepRecord& prev = trajectory.steps[static_cast<std::size_t>(i - 1)];
        const double dt = prev.t - s.t;
        double sum_a2 = 0.0;
        for (std::size_t k = 0; k < s.v.size(); ++k) {
            const double a = (s.v.data()[k] - prev.v.data()[k]) / dt;
            sum_a2 += a * a;
        }
        stats.accel_rms = std::sqrt(sum_a2 / static_cast<double>(s.v.size()));
    }
    return stats;
}

}  // namespace hiflow
