#pragma once

#include <map>
#include <string>
#include <vector>

#include "core/grid.hpp"
#include "core/reference.hpp"
#include "core/sampler.hpp"

namespace hiflow {

double mse(const ImageGrid& a, const ImageGrid& b);

// Mean squared difference after Butterworth low-pass filtering both inputs;
// never exceeds mse(a, b).
double lowband_mse(const ImageGrid& a, const ImageGrid& b, double cutoff, int order);

// Mean spectral energy per radial normalized-frequency bin over [0, 1].
std::vector<double> radial_spectrum(const ImageGrid& grid, int bins);

// 10*log10(peak^2 / mse), capped at 99.0 so identical inputs stay numeric.
double psnr(const ImageGrid& a, const ImageGrid& b, double peak = 1.0);

// Share of spectral energy the complement of the Butterworth filter keeps;
// the DC bin never counts, so this reads as texture/detail density.
double highband_energy_ratio(const ImageGrid& grid, double cutoff, int order);

// How far the run's per-step velocity changes sit from the reference's, as
// mean L2 distance between radial spectra over the shared transitions. This
// is the detail-schedule metric the acceleration alignment targets.
double accel_spectrum_distance(const Trajectory& trajectory, const ReferenceFlow& reference,
                               int bins);

struct MetricReport {
    std::map<std::string, double> scalars;
    std::vector<double> radial;  // radial spectrum of the graded terminal
};

MetricReport compute_report(const ImageGrid& terminal, const ImageGrid& reference_image,
                            const Trajectory* trajectory, const ReferenceFlow* reference,
                            double cutoff, int order, int bins);

// Floats rendered with 9 significant digits.
std::string format_csv_value(double value);

}  // namespace hiflow
