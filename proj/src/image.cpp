#include "iris/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "iris/error.hpp"

namespace iris {

GrayImage::GrayImage(int width, int height, double fill) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::InvalidArgument, "image dimensions must be positive");
    }
    data_.assign(std::size_t(width) * std::size_t(height), fill);
}

double GrayImage::clamped(int row, int col) const {
    row = std::clamp(row, 0, height_ - 1);
    col = std::clamp(col, 0, width_ - 1);
    return data_[index(row, col)];
}

double GrayImage::bilinear(double x, double y) const {
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const int x0 = static_cast<int>(fx);
    const int y0 = static_cast<int>(fy);
    const double tx = x - fx;
    const double ty = y - fy;
    const double top = (1.0 - tx) * clamped(y0, x0) + tx * clamped(y0, x0 + 1);
    const double bottom = (1.0 - tx) * clamped(y0 + 1, x0) + tx * clamped(y0 + 1, x0 + 1);
    return (1.0 - ty) * top + ty * bottom;
}

double GrayImage::mean() const {
    if (data_.empty()) return 0.0;
    return std::accumulate(data_.begin(), data_.end(), 0.0) / static_cast<double>(data_.size());
}

double GrayImage::min() const { return data_.empty() ? 0.0 : *std::min_element(data_.begin(), data_.end()); }
double GrayImage::max() const { return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end()); }

std::size_t EdgeMap::count() const {
    return static_cast<std::size_t>(std::count(edges_.begin(), edges_.end(), std::uint8_t{1}));
}

GrayImage rotate180(const GrayImage& img) {
    GrayImage out(img.width(), img.height());
    for (int r = 0; r < img.height(); ++r)
        for (int c = 0; c < img.width(); ++c) out(img.height() - 1 - r, img.width() - 1 - c) = img(r, c);
    return out;
}

EdgeMap rotate180(const EdgeMap& edges) {
    EdgeMap out(edges.width(), edges.height());
    for (int r = 0; r < edges.height(); ++r)
        for (int c = 0; c < edges.width(); ++c)
            out.set(edges.height() - 1 - r, edges.width() - 1 - c, edges(r, c));
    return out;
}

}  // namespace iris
