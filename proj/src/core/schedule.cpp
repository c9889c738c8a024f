#include "core/schedule.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "core/errors.hpp"

namespace hiflow {

TimeSchedule::TimeSchedule(std::vector<double> times) : times_(std::move(times)) {
    if (times_.size() < 2) throw_invalid("schedule needs at least two nodes");
    if (times_.front() != 1.0 || times_.back() != 0.0)
        throw_invalid("schedule endpoints must be exactly 1 and 0");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i] < times_[i - 1]))
            throw_invalid("schedule times must be strictly decreasing");
}

int TimeSchedule::index_of(double t, double tol) const {
    for (std::size_t i = 0; i < times_.size(); ++i)
        if (std::abs(times_[i] - t) <= tol) return static_cast<int>(i);
    return -1;
}

TimeSchedule make_schedule(int steps, ScheduleShape shape, double shift) {
    if (steps < 1) throw_invalid("make_schedule: steps must be >= 1, got " + std::to_string(steps));
    if (shape == ScheduleShape::Shift && !(shift > 0.0))
        throw_invalid("make_schedule: shift must be > 0, got " + std::to_string(shift));
    std::vector<double> times(static_cast<std::size_t>(steps) + 1);
    for (int i = 0; i <= steps; ++i) {
        double t = static_cast<double>(steps - i) / steps;
        if (shape == ScheduleShape::Shift) t = shift * t / (1.0 + (shift - 1.0) * t);
        times[static_cast<std::size_t>(i)] = t;
    }
    times.front() = 1.0;
    times.back() = 0.0;
    return TimeSchedule(std::move(times));
}

namespace {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline double unit_open(std::uint64_t x) {
    // 53-bit mantissa in (0, 1]; never 0 so log() stays finite.
    return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
}

}  // namespace

double normal_at(const NoiseSpec& spec, int channel, int y, int x) {
    std::uint64_t h = splitmix64(spec.seed);
    h = splitmix64(h ^ spec.stage);
    h = splitmix64(h ^ static_cast<std::uint64_t>(channel));
    h = splitmix64(h ^ static_cast<std::uint64_t>(y));
    h = splitmix64(h ^ static_cast<std::uint64_t>(x));
    const std::uint64_t a = splitmix64(h);
    const std::uint64_t b = splitmix64(a);
    const double u1 = unit_open(a);
    const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

ImageGrid sample_noise(const NoiseSpec& spec, int channels, int height, int width) {
    ImageGrid out(channels, height, width);
    for (int c = 0; c < channels; ++c)
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                out.at(c, y, x) = normal_at(spec, c, y, x);
    return out;
}

ImageGrid mix_noise(const ImageGrid& x0, const ImageGrid& noise, double t) {
    require_same_dims(x0, noise, "mix_noise");
    if (!(t >= 0.0 && t <= 1.0))
        throw_invalid("mix_noise: t must be in [0, 1], got " + std::to_string(t));
    if (t == 0.0) return x0;
    if (t == 1.0) return noise;
    ImageGrid out = x0;
    double* dst = out.data().data();
    const double* n = noise.data().data();
    for (std::size_t i = 0; i < out.size(); ++i) dst[i] += t * (n[i] - dst[i]);
    return out;
}

}  // namespace hiflow
