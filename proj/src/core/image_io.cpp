#include "core/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

#include "core/errors.hpp"

namespace hiflow {

namespace {

unsigned char quantize_byte(double v) {
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<unsigned char>(std::floor(c * 255.0 + 0.5));
}

// Skips whitespace and '#' comment lines between header tokens.
int next_header_int(std::istream& in, const std::string& path) {
    int ch = in.get();
    while (ch != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = in.get();
        } else if (!std::isspace(ch)) {
            break;
        }
        ch = in.get();
    }
    if (ch == EOF || !std::isdigit(ch)) throw_format(path + ": malformed header");
    long value = 0;
    while (ch != EOF && std::isdigit(ch)) {
        value = value * 10 + (ch - '0');
        if (value > 1 << 30) throw_format(path + ": header value out of range");
        ch = in.get();
    }
    if (ch != EOF) in.unget();
    return static_cast<int>(value);
}

}  // namespace

void write_ppm(const ImageGrid& grid, const std::string& path) {
    if (grid.empty()) throw_invalid("write_ppm: empty grid");
    if (grid.channels() != 1 && grid.channels() != 3)
        throw_invalid("write_ppm: grid must have 1 or 3 channels, got " +
                      std::to_string(grid.channels()));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_io("write_ppm: cannot open " + path);
    out << "P6\n" << grid.width() << " " << grid.height() << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(grid.width()) * 3);
    for (int y = 0; y < grid.height(); ++y) {
        for (int x = 0; x < grid.width(); ++x) {
            for (int c = 0; c < 3; ++c) {
                const int src = grid.channels() == 1 ? 0 : c;
                row[static_cast<std::size_t>(x) * 3 + c] = quantize_byte(grid.at(src, y, x));
            }
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw_io("write_ppm: write failed for " + path);
}

ImageGrid read_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io("read_image: cannot open " + path);
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || (m1 != '5' && m1 != '6')) throw_format(path + ": not a binary PGM/PPM file");
    const int channels = (m1 == '6') ? 3 : 1;
    const int width = next_header_int(in, path);
    const int height = next_header_int(in, path);
    const int maxval = next_header_int(in, path);
    if (width <= 0 || height <= 0) throw_format(path + ": bad dimensions");
    if (maxval <= 0 || maxval > 255) throw_format(path + ": unsupported maxval " + std::to_string(maxval));
    in.get();  // single whitespace after maxval

    const std::size_t count = static_cast<std::size_t>(width) * height * channels;
    std::vector<unsigned char> raw(count);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count) throw_format(path + ": truncated pixel data");

    ImageGrid grid(channels, height, width);
    const double scale = 1.0 / maxval;
    std::size_t i = 0;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            for (int c = 0; c < channels; ++c) grid.at(c, y, x) = raw[i++] * scale;
    return grid;
}

}  // namespace hiflow
