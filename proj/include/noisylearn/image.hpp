// RGB float image, binary PPM (P6) serialization, and PSNR.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace noisylearn {

/**
 * Dense RGB image with channels in [0, 1], row-major from the top-left
 * corner. All pixel math is done in doubles; quantization to 8 bits happens
 * only at the PPM boundary.
 */
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> data;  // 3 * width * height, interleaved rgb

    Image() = default;
    Image(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<std::size_t>(3) * w * h, fill) {
        if (w <= 0 || h <= 0) throw std::invalid_argument("Image: dimensions must be positive");
    }

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

    double& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
    double at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }

    std::array<double, 3> pixel(int x, int y) const {
        return {at(x, y, 0), at(x, y, 1), at(x, y, 2)};
    }
    void set_pixel(int x, int y, const std::array<double, 3>& rgb) {
        for (int c = 0; c < 3; ++c) at(x, y, c) = rgb[c];
    }

    bool same_size(const Image& other) const {
        return width == other.width && height == other.height;
    }

    friend bool operator==(const Image& a, const Image& b) {
        return a.width == b.width && a.height == b.height && a.data == b.data;
    }
};

inline std::uint8_t quantize_channel(double v) {
    double c = std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

/// Writes a binary PPM (P6, maxval 255).
inline void write_ppm(const Image& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_ppm: cannot open " + path.string());
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    std::vector<std::uint8_t> bytes;
    bytes.reserve(img.data.size());
    for (double v : img.data) bytes.push_back(quantize_channel(v));
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write_ppm: short write to " + path.string());
}

namespace detail {
inline int read_ppm_token(std::istream& in) {
    // Skips whitespace and '#' comments, then reads one unsigned integer.
    int ch = in.get();
    while (ch != EOF && (std::isspace(ch) || ch == '#')) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = in.get();
        }
        ch = in.get();
    }
    if (ch == EOF) throw std::runtime_error("read_ppm: truncated header");
    int value = 0;
    bool any = false;
    while (ch != EOF && std::isdigit(ch)) {
        value = value * 10 + (ch - '0');
        any = true;
        ch = in.get();
    }
    if (!any) throw std::runtime_error("read_ppm: malformed header");
    return value;
}
}  // namespace detail

inline Image read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_ppm: cannot open " + path.string());
    char magic[2];
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '6')
        throw std::runtime_error("read_ppm: not a binary PPM: " + path.string());
    int w = detail::read_ppm_token(in);
    int h = detail::read_ppm_token(in);
    int maxval = detail::read_ppm_token(in);
    if (maxval != 255) throw std::runtime_error("read_ppm: only maxval 255 is supported");
    Image img(w, h);
    std::vector<std::uint8_t> bytes(img.data.size());
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw std::runtime_error("read_ppm: truncated pixel data in " + path.string());
    for (std::size_t i = 0; i < bytes.size(); ++i) img.data[i] = bytes[i] / 255.0;
    return img;
}

/// Mean squared error over all channels of two same-sized images.
inline double mse(const Image& a, const Image& b) {
    if (!a.same_size(b)) throw std::invalid_argument("mse: image sizes differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        double d = a.data[i] - b.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.data.size());
}

/// PSNR in dB for unit-range images: 10*log10(1/mse).
inline double psnr(const Image& a, const Image& b) {
    double m = mse(a, b);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / m);
}

/// Writes a scalar field in [0, 1] as a gray PPM (r = g = b).
inline void write_gray_ppm(const std::vector<double>& values, int width, int height,
                           const std::filesystem::path& path) {
    if (static_cast<std::size_t>(width) * height != values.size())
        throw std::invalid_argument("write_gray_ppm: size mismatch");
    Image img(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double v = values[static_cast<std::size_t>(y) * width + x];
            img.set_pixel(x, y, {v, v, v});
        }
    write_ppm(img, path);
}

}  // namespace noisylearn
