#include "core/reference.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "core/errors.hpp"

namespace hiflow {

ReferenceFlow::ReferenceFlow(std::vector<double> times, std::vector<ImageGrid> clean,
                             ImageGrid anchor, Interp method)
    : times_(std::move(times)), clean_(std::move(clean)), anchor_(std::move(anchor)),
      method_(method) {
    if (times_.empty() || times_.size() != clean_.size())
        throw_invalid("reference flow: entry count mismatch");
    for (std::size_t i = 0; i < clean_.size(); ++i) {
        if (!clean_[i].same_dims(anchor_))
            throw_invalid("reference flow: entries must share the target dims");
        if (i > 0 && !(times_[i] < times_[i - 1]))
            throw_invalid("reference flow: times must be strictly decreasing");
    }
}

int ReferenceFlow::index_at_time(double t, double tol) const {
    for (std::size_t i = 0; i < times_.size(); ++i)
        if (std::abs(times_[i] - t) <= tol) return static_cast<int>(i);
    return -1;
}

ImageGrid ReferenceFlow::velocity_delta(int i) const {
    if (i < 1 || i >= count())
        throw_invalid("velocity_delta: need an earlier entry, index " + std::to_string(i));
    const double t = time(i);
    if (!(t > 0.0)) throw_invalid("velocity_delta: undefined at t = 0");
    ImageGrid delta = clean(i);
    delta -= clean(i - 1);
    delta *= -1.0 / t;
    return delta;
}

ReferenceFlow build_reference(const Trajectory& low, int target_height,
                              int target_width, Interp method) {
    if (low.steps.empty()) throw_invalid("build_reference: empty low-res trajectory");
    const int sh = low.terminal.height();
    const int sw = low.terminal.width();
    if (target_height % sh != 0 || target_width % sw != 0 ||
        target_height / sh != target_width / sw)
        throw_invalid("build_reference: target dims must be an integer multiple of source dims");
    const int factor = target_height / sh;

    std::vector<double> times;
    std::vector<ImageGrid> clean;
    times.reserve(low.steps.size());
    clean.reserve(low.steps.size());
    for (const StepRecord& s : low.steps) {
        times.push_back(s.t);
        clean.push_back(upsample(s.x0, factor, method));
    }
    return ReferenceFlow(std::move(times), std::move(clean),
                         upsample(low.terminal, factor, method), method);
}

namespace {

constexpr char kRefMagic[4] = {'H', 'F', 'R', '1'};

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (in.gcount() != 4) throw_format(path + ": truncated file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

void write_grid_f32(std::ostream& out, const ImageGrid& g) {
    std::vector<float> buf(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) buf[i] = static_cast<float>(g.data()[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
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

}  // namespace

void save_reference(const ReferenceFlow& reference, const std::string& path) {
    if (reference.count() == 0) throw_invalid("save_reference: empty reference");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_io("save_reference: cannot open " + path);
    out.write(kRefMagic, 4);
    write_u32(out, static_cast<std::uint32_t>(reference.count()));
    write_u32(out, static_cast<std::uint32_t>(reference.channels()));
    write_u32(out, static_cast<std::uint32_t>(reference.height()));
    write_u32(out, static_cast<std::uint32_t>(reference.width()));
    write_u32(out, static_cast<std::uint32_t>(reference.method()));
    for (int i = 0; i < reference.count(); ++i) {
        const double t = reference.time(i);
        out.write(reinterpret_cast<const char*>(&t), 8);
        write_grid_f32(out, reference.clean(i));
    }
    write_grid_f32(out, reference.anchor());
    if (!out) throw_io("save_reference: write failed for " + path);
}

ReferenceFlow load_reference(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io("load_reference: cannot open " + path);
    char m[4];
    in.read(m, 4);
    if (in.gcount() != 4 || std::memcmp(m, kRefMagic, 4) != 0)
        throw_format(path + ": bad magic, expected HFR1");
    const std::uint32_t count = read_u32(in, path);
    const int c = static_cast<int>(read_u32(in, path));
    const int h = static_cast<int>(read_u32(in, path));
    const int w = static_cast<int>(read_u32(in, path));
    const std::uint32_t method = read_u32(in, path);
    if (count == 0 || count > (1u << 20) || c <= 0 || h <= 0 || w <= 0 || method > 2)
        throw_format(path + ": implausible header");
    std::vector<double> times(count);
    std::vector<ImageGrid> clean;
    clean.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        in.read(reinterpret_cast<char*>(&times[i]), 8);
        if (in.gcount() != 8) throw_format(path + ": truncated file");
        clean.push_back(read_grid_f32(in, c, h, w, path));
    }
    ImageGrid anchor = read_grid_f32(in, c, h, w, path);
    if (in.peek() != EOF) throw_format(path + ": trailing bytes");
    return ReferenceFlow(std::move(times), std::move(clean), std::move(anchor),
                         static_cast<Interp>(method));
}

}  // namespace hiflow
