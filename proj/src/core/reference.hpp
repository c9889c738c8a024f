#pragma once

#include <string>
#include <vector>

#include "core/grid.hpp"
#include "core/sampler.hpp"

namespace hiflow {

// Reference flow in the target-resolution space: per low-res evaluation time,
// the upsampled predicted clean sample, plus the upsampled low-res terminal
// (the constant anchor used when the time-matched entries are not wanted).
// The noisy states of this flow are never needed: every guided quantity is a
// function of clean-sample deltas only, so they are never materialized.
class ReferenceFlow {
public:
    ReferenceFlow() = default;
    ReferenceFlow(std::vector<double> times, std::vector<ImageGrid> clean,
                  ImageGrid anchor, Interp method);

    int count() const { return static_cast<int>(times_.size()); }
    double time(int i) const { return times_[static_cast<std::size_t>(i)]; }
    const ImageGrid& clean(int i) const { return clean_[static_cast<std::size_t>(i)]; }
    const ImageGrid& anchor() const { return anchor_; }
    Interp method() const { return method_; }

    int channels() const { return anchor_.channels(); }
    int height() const { return anchor_.height(); }
    int width() const { return anchor_.width(); }

    int index_at_time(double t, double tol = 1e-12) const;

    // v_ref(t_i) - v_ref(t_prev) across the transition into entry i, equal to
    // -(clean_i - clean_{i-1}) / t_i by the cancellation of the virtual
    // states; requires i >= 1 and t_i > 0.
    ImageGrid velocity_delta(int i) const;

private:
    std::vector<double> times_;
    std::vector<ImageGrid> clean_;
    ImageGrid anchor_;
    Interp method_ = Interp::Bicubic;
};

// Upsamples every predicted clean sample of the low-res trajectory to the
// target dims; the factor must be a single integer shared by both axes.
ReferenceFlow build_reference(const Trajectory& low, int target_height,
                              int target_width, Interp method);

// "HFR1" dump: u32 entry count, dims, interpolation method, then per entry
// f64 t plus one f32 grid, then the anchor grid.
void save_reference(const ReferenceFlow& reference, const std::string& path);
ReferenceFlow load_reference(const std::string& path);

}  // namespace hiflow
