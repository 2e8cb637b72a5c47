#include "iris/normalization.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "iris/error.hpp"
#include "iris/filters.hpp"

namespace iris {

void NormalizationConfig::validate() const {
    if (radial_rows < 2 || angular_cols < 2) throw Error(ErrorCode::InvalidConfig, "strip must be at least 2x2");
    if (roi_rows < 2 || roi_cols < 1 || roi_first_row < 0 || roi_first_row + roi_rows > radial_rows ||
        roi_cols > angular_cols) {
        throw Error(ErrorCode::InvalidConfig, "ROI window does not fit the strip");
    }
    if (compress && roi_rows % 2 != 0) throw Error(ErrorCode::InvalidConfig, "compression needs an even ROI row count");
    if (window < 1) throw Error(ErrorCode::InvalidConfig, "window must be >= 1");
    if (!(beta >= 0.0 && beta <= 1.0)) throw Error(ErrorCode::InvalidConfig, "beta must be in [0,1]");
}

PolarStrip unwrap(const GrayImage& img, const IrisGeometry& g, int rows, int cols) {
    const PupilCircle& p = g.pupil;
    if (!(p.r > 0.0) || !(g.limbic_r > p.r)) throw Error(ErrorCode::InvalidArgument, "invalid iris geometry");
    const double step = (g.limbic_r - p.r) / rows;
    const double outer = p.r + (rows - 0.5) * step;
    if (p.cx - outer < 0.0 || p.cy - outer < 0.0 || p.cx + outer > img.width() - 1 ||
        p.cy + outer > img.height() - 1) {
        throw Error(ErrorCode::AnnulusOutOfBounds, "iris annulus extends past the image");
    }
    PolarStrip strip(cols, rows);
    for (int k = 0; k < cols; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / cols;
        const double ct = std::cos(theta);
        const double st = std::sin(theta);
        for (int r = 0; r < rows; ++r) {
            const double rho = p.r + (r + 0.5) * step;
            strip(r, k) = img.bilinear(p.cx + rho * ct, p.cy + rho * st);
        }
    }
    return strip;
}

Roi extract_roi(const PolarStrip& strip, const NormalizationConfig& cfg) {
    if (cfg.roi_first_row < 0 || cfg.roi_first_row + cfg.roi_rows > strip.height() || cfg.roi_cols > strip.width()) {
        throw Error(ErrorCode::DimensionMismatch, "ROI window does not fit the strip");
    }
    Roi roi(cfg.roi_cols, cfg.roi_rows);
    const int n = strip.width();
    for (int r = 0; r < cfg.roi_rows; ++r)
        for (int c = 0; c < cfg.roi_cols; ++c)
            roi(r, c) = strip(cfg.roi_first_row + r, ((cfg.roi_first_col + c) % n + n) % n);
    return roi;
}

Roi enhance_roi(const Roi& roi, int w, double beta) {
    if (w < 1) throw Error(ErrorCode::InvalidArgument, "window must be >= 1");
    if (!(beta >= 0.0 && beta <= 1.0)) throw Error(ErrorCode::InvalidArgument, "beta must be in [0,1]");
    const GrayImage background = box_mean(roi, w, w);
    Roi out(roi.width(), roi.height());
    for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] = roi.data()[i] - beta * background.data()[i];
    return out;
}

CompressedRoi compress_roi(const Roi& roi) {
    if (roi.height() % 2 != 0) throw Error(ErrorCode::DimensionMismatch, "compression needs an even row count");
    CompressedRoi out(roi.width(), roi.height() / 2);
    for (int a = 0; a < out.height(); ++a)
        for (int j = 0; j < out.width(); ++j) out(a, j) = 0.5 * (roi(2 * a, j) + roi(2 * a + 1, j));
    return out;
}

GrayImage histogram_equalize(const GrayImage& img) {
    const std::size_t n = img.data().size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return img.data()[a] < img.data()[b]; });
    GrayImage out(img.width(), img.height());
    if (n == 1) return out;
    // equal values share the rank of their last occurrence (cumulative count)
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && img.data()[order[j + 1]] == img.data()[order[i]]) ++j;
        const double level = 255.0 * double(j) / double(n - 1);
        for (std::size_t k = i; k <= j; ++k) out.data()[order[k]] = level;
        i = j + 1;
    }
    return out;
}

GrayImage resample(const GrayImage& img, int width, int height) {
    GrayImage out(width, height);
    const double sx = width > 1 ? double(img.width() - 1) / (width - 1) : 0.0;
    const double sy = height > 1 ? double(img.height() - 1) / (height - 1) : 0.0;
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) out(r, c) = img.bilinear(c * sx, r * sy);
    return out;
}

GrayImage prepare_roi(const PolarStrip& strip, const NormalizationConfig& cfg) {
    GrayImage roi = cfg.full_iris ? resample(strip, cfg.roi_cols, cfg.roi_rows) : extract_roi(strip, cfg);
    if (cfg.hist_equalize) roi = histogram_equalize(roi);
    if (cfg.enhance) roi = enhance_roi(roi, cfg.window, cfg.beta);
    if (cfg.compress) roi = compress_roi(roi);
    return roi;
}

}  // namespace iris
