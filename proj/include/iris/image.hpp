#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace iris {

// Real-valued 2-D raster indexed (row, col) == (y, x). Intensities loaded
// from disk are in [0,255]; intermediate stages may leave that range.
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, double fill = 0.0);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return width_ == 0 || height_ == 0; }

    double& operator()(int row, int col) { return data_[index(row, col)]; }
    double operator()(int row, int col) const { return data_[index(row, col)]; }

    // Edge-replicated read: coordinates outside the raster clamp to the border.
    double clamped(int row, int col) const;

    // Bilinear sample at sub-pixel (x, y) with edge replication.
    double bilinear(double x, double y) const;

    std::span<double> row(int r) { return {data_.data() + index(r, 0), static_cast<std::size_t>(width_)}; }
    std::span<const double> row(int r) const {
        return {data_.data() + index(r, 0), static_cast<std::size_t>(width_)};
    }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    bool contains(double x, double y) const noexcept {
        return x >= 0.0 && y >= 0.0 && x <= width_ - 1 && y <= height_ - 1;
    }

    double mean() const;
    double min() const;
    double max() const;

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    std::size_t index(int row, int col) const noexcept {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

class EdgeMap {
public:
    EdgeMap() = default;
    EdgeMap(int width, int height) : width_(width), height_(height), edges_(std::size_t(width) * height, 0) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    bool operator()(int row, int col) const { return edges_[std::size_t(row) * width_ + col] != 0; }
    void set(int row, int col, bool on) { edges_[std::size_t(row) * width_ + col] = on ? 1 : 0; }

    std::size_t count() const;

    friend bool operator==(const EdgeMap&, const EdgeMap&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> edges_;
};

// Rotate by 180 degrees about the raster center.
GrayImage rotate180(const GrayImage& img);
EdgeMap rotate180(const EdgeMap& edges);

}  // namespace iris
