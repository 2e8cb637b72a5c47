#include "iris/image_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>
#include <vector>

#include "iris/error.hpp"

namespace iris {

namespace {

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw Error(ErrorCode::FileNotFound, path.string());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class PgmHeaderReader {
public:
    explicit PgmHeaderReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    // Next whitespace-delimited unsigned integer, skipping '#' comments.
    long next_int() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
            throw Error(ErrorCode::CorruptFormat, "expected integer in PGM data");
        }
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1'000'000) throw Error(ErrorCode::CorruptFormat, "PGM value out of range");
            ++pos_;
        }
        return value;
    }

    // P5 payload begins after exactly one whitespace byte following maxval.
    std::size_t payload_offset() const { return pos_ + 1; }
    void seek(std::size_t pos) { pos_ = pos; }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 2;
};

GrayImage decode_pgm(const std::vector<std::uint8_t>& bytes) {
    const bool binary = bytes[1] == '5';
    PgmHeaderReader reader(bytes);
    const long width = reader.next_int();
    const long height = reader.next_int();
    const long maxval = reader.next_int();
    if (width < 1 || height < 1) throw Error(ErrorCode::CorruptFormat, "PGM dimensions must be positive");
    if (maxval < 1 || maxval > 255) throw Error(ErrorCode::UnsupportedFormat, "only 8-bit PGM is supported");

    GrayImage img(static_cast<int>(width), static_cast<int>(height));
    const std::size_t n = std::size_t(width) * std::size_t(height);
    const double scale = 255.0 / static_cast<double>(maxval);
    if (binary) {
        const std::size_t offset = reader.payload_offset();
        if (offset > bytes.size() || bytes.size() - offset < n) {
            throw Error(ErrorCode::CorruptFormat, "P5 payload shorter than width*height");
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (bytes[offset + i] > maxval) throw Error(ErrorCode::CorruptFormat, "sample exceeds maxval");
            img.data()[i] = bytes[offset + i] * scale;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const long v = reader.next_int();
            if (v > maxval) throw Error(ErrorCode::CorruptFormat, "sample exceeds maxval");
            img.data()[i] = static_cast<double>(v) * scale;
        }
    }
    return img;
}

std::uint32_t le32(const std::vector<std::uint8_t>& b, std::size_t at) {
    return std::uint32_t(b[at]) | (std::uint32_t(b[at + 1]) << 8) | (std::uint32_t(b[at + 2]) << 16) |
           (std::uint32_t(b[at + 3]) << 24);
}

std::uint16_t le16(const std::vector<std::uint8_t>& b, std::size_t at) {
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

GrayImage decode_bmp(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 54) throw Error(ErrorCode::CorruptFormat, "BMP header truncated");
    const std::uint32_t data_offset = le32(bytes, 10);
    const std::uint32_t header_size = le32(bytes, 14);
    if (header_size < 40) throw Error(ErrorCode::UnsupportedFormat, "BMP core headers are not supported");
    const auto width = static_cast<std::int32_t>(le32(bytes, 18));
    const auto raw_height = static_cast<std::int32_t>(le32(bytes, 22));
    const std::uint16_t bit_count = le16(bytes, 28);
    const std::uint32_t compression = le32(bytes, 30);
    std::uint32_t palette_size = le32(bytes, 46);

    if (bit_count != 8) throw Error(ErrorCode::UnsupportedFormat, "only 8-bit BMP is supported");
    if (compression != 0) throw Error(ErrorCode::UnsupportedFormat, "compressed BMP is not supported");
    if (width < 1 || raw_height == 0) throw Error(ErrorCode::CorruptFormat, "BMP dimensions invalid");
    if (palette_size == 0) palette_size = 256;
    if (palette_size > 256) throw Error(ErrorCode::CorruptFormat, "BMP palette too large");

    const std::size_t palette_at = 14 + header_size;
    if (palette_at + 4 * std::size_t(palette_size) > bytes.size()) {
        throw Error(ErrorCode::CorruptFormat, "BMP palette truncated");
    }
    std::array<double, 256> lut{};
    for (std::uint32_t i = 0; i < palette_size; ++i) {
        const std::size_t p = palette_at + 4 * i;
        // palette entries are B, G, R, reserved
        lut[i] = std::round(0.114 * bytes[p] + 0.587 * bytes[p + 1] + 0.299 * bytes[p + 2]);
    }

    const bool top_down = raw_height < 0;
    const int height = top_down ? -raw_height : raw_height;
    const std::size_t stride = (std::size_t(width) + 3) & ~std::size_t(3);
    if (data_offset > bytes.size() || bytes.size() - data_offset < stride * std::size_t(height)) {
        throw Error(ErrorCode::CorruptFormat, "BMP pixel array truncated");
    }
    GrayImage img(width, height);
    for (int r = 0; r < height; ++r) {
        const int src_row = top_down ? r : height - 1 - r;
        const std::size_t base = data_offset + stride * std::size_t(src_row);
        for (int c = 0; c < width; ++c) {
            const std::uint8_t idx = bytes[base + std::size_t(c)];
            if (idx >= palette_size) throw Error(ErrorCode::CorruptFormat, "BMP palette index out of range");
            img(r, c) = lut[idx];
        }
    }
    return img;
}

}  // namespace

GrayImage load_gray(const std::filesystem::path& path) {
    const auto bytes = read_all(path);
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5')) {
        return decode_pgm(bytes);
    }
    if (bytes.size() >= 2 && bytes[0] == 'B' && bytes[1] == 'M') {
        return decode_bmp(bytes);
    }
    throw Error(ErrorCode::UnsupportedFormat, "not a PGM or BMP file: " + path.string());
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    std::vector<char> payload(img.data().size());
    std::transform(img.data().begin(), img.data().end(), payload.begin(), [](double v) {
        return static_cast<char>(static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)));
    });
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

void write_pgm(const std::filesystem::path& path, const EdgeMap& edges) {
    GrayImage img(edges.width(), edges.height());
    for (int r = 0; r < edges.height(); ++r)
        for (int c = 0; c < edges.width(); ++c) img(r, c) = edges(r, c) ? 255.0 : 0.0;
    write_pgm(path, img);
}

void draw_circle(GrayImage& img, double cx, double cy, double r, double value) {
    const int steps = std::max(16, static_cast<int>(std::ceil(2.0 * std::numbers::pi * r * 2.0)));
    for (int k = 0; k < steps; ++k) {
        const double t = 2.0 * std::numbers::pi * k / steps;
        const long x = std::lround(cx + r * std::cos(t));
        const long y = std::lround(cy + r * std::sin(t));
        if (x >= 0 && y >= 0 && x < img.width() && y < img.height()) img(int(y), int(x)) = value;
    }
}

}  // namespace iris
