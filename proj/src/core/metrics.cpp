#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "core/errors.hpp"
#include "core/spectral.hpp"

namespace hiflow {

double mse(const ImageGrid& a, const ImageGrid& b) {
    require_same_dims(a, b, "mse");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

double lowband_mse(const ImageGrid& a, const ImageGrid& b, double cutoff, int order) {
    require_same_dims(a, b, "lowband_mse");
    const FilterMask mask = butterworth_mask(a.height(), a.width(), cutoff, order);
    ImageGrid diff = a;
    diff -= b;
    SpectralGrid s = forward_fft(diff);
    for (int c = 0; c < s.channels(); ++c)
        for (int u = 0; u < s.height(); ++u)
            for (int v = 0; v < s.width(); ++v) s.at(c, u, v) *= mask.at(u, v);
    ImageGrid low = inverse_fft(s);
    double acc = 0.0;
    for (double v : low.data()) acc += v * v;
    return acc / static_cast<double>(low.size());
}

std::vector<double> radial_spectrum(const ImageGrid& grid, int bins) {
    if (bins < 1) throw_invalid("radial_spectrum: bins must be >= 1");
    SpectralGrid s = forward_fft(grid);
    std::vector<double> energy(static_cast<std::size_t>(bins), 0.0);
    std::vector<std::size_t> count(static_cast<std::size_t>(bins), 0);
    for (int c = 0; c < s.channels(); ++c)
        for (int u = 0; u < s.height(); ++u)
            for (int v = 0; v < s.width(); ++v) {
                const double f = normalized_radial_frequency(u, v, s.height(), s.width());
                const int bin = std::min(static_cast<int>(f * bins), bins - 1);
                energy[static_cast<std::size_t>(bin)] += std::norm(s.at(c, u, v));
                count[static_cast<std::size_t>(bin)] += 1;
            }
    for (int k = 0; k < bins; ++k)
        if (count[static_cast<std::size_t>(k)] > 0)
            energy[static_cast<std::size_t>(k)] /= static_cast<double>(count[static_cast<std::size_t>(k)]);
    return energy;
}

double psnr(const ImageGrid& a, const ImageGrid& b, double peak) {
    if (!(peak > 0.0)) throw_invalid("psnr: peak must be > 0");
    const double m = mse(a, b);
    if (m == 0.0) return 99.0;
    return std::min(99.0, 10.0 * std::log10(peak * peak / m));
}

double highband_energy_ratio(const ImageGrid& grid, double cutoff, int order) {
    const FilterMask mask = butterworth_mask(grid.height(), grid.width(), cutoff, order);
    SpectralGrid s = forward_fft(grid);
    double total = 0.0, high = 0.0;
    for (int c = 0; c < s.channels(); ++c)
        for (int u = 0; u < s.height(); ++u)
            for (int v = 0; v < s.width(); ++v) {
                const double e = std::norm(s.at(c, u, v));
                const double hm = 1.0 - mask.at(u, v);
                total += e;
                high += hm * hm * e;
            }
    return total > 0.0 ? high / total : 0.0;
}

double accel_spectrum_distance(const Trajectory& trajectory, const ReferenceFlow& reference,
                               int bins) {
    if (bins < 1) throw_invalid("accel_spectrum_distance: bins must be >= 1");
    double acc = 0.0;
    int used = 0;
    for (std::size_t i = 1; i < trajectory.steps.size(); ++i) {
        const StepRecord& cur = trajectory.steps[i];
        const int idx = reference.index_at_time(cur.t);
        if (idx < 1) continue;
        ImageGrid dv_run = cur.v;
        dv_run -= trajectory.steps[i - 1].v;
        const ImageGrid dv_ref = reference.velocity_delta(idx);
        const std::vector<double> rs_run = radial_spectrum(dv_run, bins);
        const std::vector<double> rs_ref = radial_spectrum(dv_ref, bins);
        double d2 = 0.0;
        for (int k = 0; k < bins; ++k) {
            const double d = rs_run[static_cast<std::size_t>(k)] - rs_ref[static_cast<std::size_t>(k)];
            d2 += d * d;
        }
        acc += std::sqrt(d2);
        ++used;
    }
    return used > 0 ? acc / used : 0.0;
}

MetricReport compute_report(const ImageGrid& terminal, const ImageGrid& reference_image,
                            const Trajectory* trajectory, const ReferenceFlow* reference,
                            double cutoff, int order, int bins) {
    MetricReport report;
    report.scalars["lowband_mse"] = lowband_mse(terminal, reference_image, cutoff, order);
    report.scalars["highband_energy_ratio"] = highband_energy_ratio(terminal, cutoff, order);
    report.scalars["psnr_vs_reference"] = psnr(terminal, reference_image);
    report.scalars["accel_spectrum_dist"] =
        (trajectory && reference) ? accel_spectrum_distance(*trajectory, *reference, bins) : 0.0;
    report.radial = radial_spectrum(terminal, bins);
    return report;
}

std::string format_csv_value(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

}  // namespace hiflow
