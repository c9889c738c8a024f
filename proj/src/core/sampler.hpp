#pragma once

#include <string>
#include <vector>

#include "core/field.hpp"
#include "core/grid.hpp"
#include "core/schedule.hpp"

namespace hiflow {

// One evaluation of the flow: state, velocity actually used for the Euler
// update, and the endpoint estimates implied by it.
struct StepRecord {
    double t = 0.0;
    ImageGrid x;
    ImageGrid v;
    ImageGrid x0;  // x - t*v
    ImageGrid x1;  // x0 + v
};

struct Trajectory {
    std::vector<StepRecord> steps;  // strictly decreasing t
    ImageGrid terminal;             // state at the schedule's final node (t = 0)

    int index_at_time(double t, double tol = 1e-12) const;
};

// x - t*v (the predicted clean endpoint).
ImageGrid predict_clean(const ImageGrid& x, const ImageGrid& v, double t);

// x + v*(t_to - t_from); requires t_to < t_from.
ImageGrid euler_step(const ImageGrid& x, const ImageGrid& v, double t_from, double t_to);

// Explicit Euler sampling from start_t (which must be a grid node) down to 0.
// record=false keeps only the terminal state; the terminal is bit-identical
// either way.
Trajectory sample(const VelocityField& field, const TimeSchedule& schedule,
                  const ImageGrid& init, double start_t, bool record = true);

// "HFT1" dump: u32 step count and dims, then per step f64 t followed by the
// four grids as f32, then the terminal grid as f32.
void save_trajectory(const Trajectory& trajectory, const std::string& path);
Trajectory load_trajectory(const std::string& path);

// The f32 lattice a dump round-trip imposes, applied in memory.
Trajectory quantize_trajectory(const Trajectory& trajectory);

// Per-step summary used by `inspect`. residual is max |v - (x - x0)/t|;
// residual_bound accounts for f32 storage when the step came from a dump.
struct StepStats {
    double t = 0.0;
    double eq4_residual = 0.0;
    double residual_bound = 0.0;
    double velocity_rms = 0.0;
    double accel_rms = 0.0;  // rms((v_i - v_prev)/(t_prev - t_i)), 0 on the first step
};

StepStats step_stats(const Trajectory& trajectory, int i, bool from_dump);

}  // namespace hiflow
