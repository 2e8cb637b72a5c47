#include "iris/filters.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "iris/error.hpp"

namespace iris {

namespace {

// One separable mean pass along rows (horizontal == true) or columns. Each
// output is the center value plus the mean deviation of its window, so a
// constant input is reproduced exactly.
GrayImage mean_pass(const GrayImage& img, int half, bool horizontal) {
    GrayImage out(img.width(), img.height());
    const double n = 2.0 * half + 1.0;
    const double lo = img.min();
    const double hi = img.max();
    for (int r = 0; r < img.height(); ++r) {
        for (int c = 0; c < img.width(); ++c) {
            const double center = img(r, c);
            double dev = 0.0;
            for (int k = -half; k <= half; ++k) {
                dev += (horizontal ? img.clamped(r, c + k) : img.clamped(r + k, c)) - center;
            }
            // rounding can overshoot the input range by an ulp
            out(r, c) = std::clamp(center + dev / n, lo, hi);
        }
    }
    return out;
}

}  // namespace

GrayImage box_mean(const GrayImage& img, int half_h, int half_w) {
    if (half_h < 0 || half_w < 0) throw Error(ErrorCode::InvalidArgument, "box_mean window must be non-negative");
    GrayImage out = half_w > 0 ? mean_pass(img, half_w, true) : img;
    return half_h > 0 ? mean_pass(out, half_h, false) : out;
}

std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> taps(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        taps[k + radius] = std::exp(-(k * k) / (2.0 * sigma * sigma));
        sum += taps[k + radius];
    }
    for (double& t : taps) t /= sum;
    return taps;
}

GrayImage convolve_separable(const GrayImage& img, const std::vector<double>& taps) {
    const int radius = static_cast<int>(taps.size() / 2);
    GrayImage tmp(img.width(), img.height());
    // Mirrored taps are summed pairwise so that a 180-degree rotated input
    // produces bit-identical (rotated) output.
    for (int r = 0; r < img.height(); ++r) {
        for (int c = 0; c < img.width(); ++c) {
            double acc = taps[radius] * img(r, c);
            for (int k = 1; k <= radius; ++k) acc += taps[radius + k] * (img.clamped(r, c - k) + img.clamped(r, c + k));
            tmp(r, c) = acc;
        }
    }
    GrayImage out(img.width(), img.height());
    for (int r = 0; r < img.height(); ++r) {
        for (int c = 0; c < img.width(); ++c) {
            double acc = taps[radius] * tmp(r, c);
            for (int k = 1; k <= radius; ++k) acc += taps[radius + k] * (tmp.clamped(r - k, c) + tmp.clamped(r + k, c));
            out(r, c) = acc;
        }
    }
    return out;
}

Gradient sobel(const GrayImage& img) {
    Gradient g{GrayImage(img.width(), img.height()), GrayImage(img.width(), img.height()),
               GrayImage(img.width(), img.height())};
    for (int r = 0; r < img.height(); ++r) {
        for (int c = 0; c < img.width(); ++c) {
            auto p = [&](int dr, int dc) { return img.clamped(r + dr, c + dc); };
            const double gx = ((p(-1, 1) - p(-1, -1)) + (p(1, 1) - p(1, -1))) + 2.0 * (p(0, 1) - p(0, -1));
            const double gy = ((p(1, -1) - p(-1, -1)) + (p(1, 1) - p(-1, 1))) + 2.0 * (p(1, 0) - p(-1, 0));
            g.gx(r, c) = gx;
            g.gy(r, c) = gy;
            g.magnitude(r, c) = std::sqrt(gx * gx + gy * gy);
        }
    }
    return g;
}

GrayImage non_max_suppression(const Gradient& grad) {
    const GrayImage& mag = grad.magnitude;
    GrayImage out(mag.width(), mag.height());
    constexpr double tan22 = 0.41421356237309503;  // tan(22.5 deg)
    constexpr double tan67 = 2.4142135623730949;   // tan(67.5 deg)
    for (int r = 0; r < mag.height(); ++r) {
        for (int c = 0; c < mag.width(); ++c) {
            const double m = mag(r, c);
            if (m <= 0.0) continue;
            const double gx = grad.gx(r, c);
            const double gy = grad.gy(r, c);
            const double ax = std::abs(gx);
            const double ay = std::abs(gy);
            int dx = 0;
            int dy = 0;
            if (ay <= tan22 * ax) {
                dx = gx > 0 ? 1 : -1;
            } else if (ay >= tan67 * ax) {
                dy = gy > 0 ? 1 : -1;
            } else {
                dx = gx > 0 ? 1 : -1;
                dy = gy > 0 ? 1 : -1;
            }
            // Strict against the neighbor up-gradient, non-strict against the one
            // behind: plateaus of two equal maxima keep exactly one pixel, and the
            // rule is symmetric under 180-degree rotation.
            const double ahead = mag.clamped(r + dy, c + dx);
            const double behind = mag.clamped(r - dy, c - dx);
            if (m > ahead && m >= behind) out(r, c) = m;
        }
    }
    return out;
}

EdgeMap hysteresis(const GrayImage& thinned, double low, double high) {
    const int w = thinned.width();
    const int h = thinned.height();
    EdgeMap edges(w, h);
    std::vector<std::pair<int, int>> stack;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (thinned(r, c) >= high && thinned(r, c) > 0.0 && !edges(r, c)) {
                edges.set(r, c, true);
                stack.emplace_back(r, c);
                while (!stack.empty()) {
                    const auto [pr, pc] = stack.back();
                    stack.pop_back();
                    for (int dr = -1; dr <= 1; ++dr) {
                        for (int dc = -1; dc <= 1; ++dc) {
                            const int nr = pr + dr;
                            const int nc = pc + dc;
                            if (nr < 0 || nc < 0 || nr >= h || nc >= w || edges(nr, nc)) continue;
                            if (thinned(nr, nc) >= low && thinned(nr, nc) > 0.0) {
                                edges.set(nr, nc, true);
                                stack.emplace_back(nr, nc);
                            }
                        }
                    }
                }
            }
        }
    }
    return edges;
}

EdgeMap canny(const GrayImage& img, const CannyParams& params) {
    if (!(params.sigma > 0.0) || !(params.low_ratio > 0.0) || !(params.low_ratio < params.high_ratio) ||
        !(params.high_ratio <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "canny requires sigma > 0 and 0 < low < high <= 1");
    }
    const auto taps = gaussian_kernel(params.sigma);
    const int support = static_cast<int>(taps.size());
    if (img.width() < support || img.height() < support) {
        throw Error(ErrorCode::DegenerateInput, "image smaller than Gaussian support");
    }
    const Gradient grad = sobel(convolve_separable(img, taps));
    const GrayImage thinned = non_max_suppression(grad);
    const double peak = grad.magnitude.max();
    if (peak <= 0.0) return EdgeMap(img.width(), img.height());
    return hysteresis(thinned, params.low_ratio * peak, params.high_ratio * peak);
}

}  // namespace iris
