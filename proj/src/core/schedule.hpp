#pragma once

#include <cstdint>
#include <vector>

#include "core/grid.hpp"

namespace hiflow {

enum class ScheduleShape {
    Uniform = 0,
    Shift = 1,
};

// Strictly decreasing time grid from exactly 1 down to exactly 0.
class TimeSchedule {
public:
    TimeSchedule() = default;
    explicit TimeSchedule(std::vector<double> times);

    int steps() const { return static_cast<int>(times_.size()) - 1; }
    double time(int i) const { return times_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& times() const { return times_; }

    // Index of the grid node matching t within tol, or -1.
    int index_of(double t, double tol = 1e-12) const;

private:
    std::vector<double> times_;
};

// Uniform grid t_i = (steps - i)/steps, optionally reshaped by the timestep
// shift map t -> s*t / (1 + (s-1)*t); endpoints stay exactly 1 and 0.
TimeSchedule make_schedule(int steps, ScheduleShape shape = ScheduleShape::Uniform,
                           double shift = 1.0);

// Counter-based noise stream: a value per (seed, stage, channel, y, x), so a
// stage's noise never depends on how much any other stage consumed.
struct NoiseSpec {
    std::uint64_t seed = 0;
    std::uint32_t stage = 0;
};

// Standard normal at one coordinate (SplitMix64 chain + Box-Muller).
double normal_at(const NoiseSpec& spec, int channel, int y, int x);

ImageGrid sample_noise(const NoiseSpec& spec, int channels, int height, int width);

// x0 + t*(noise - x0); t = 0 and t = 1 return bit-identical copies.
ImageGrid mix_noise(const ImageGrid& x0, const ImageGrid& noise, double t);

}  // namespace hiflow
