#pragma once

#include <vector>

#include "iris/image.hpp"

namespace iris {

// Mean over the (2*half_h+1) x (2*half_w+1) window centered on each pixel,
// borders by edge replication.
GrayImage box_mean(const GrayImage& img, int half_h, int half_w);

struct CannyParams {
    double sigma = 1.0;
    double low_ratio = 0.1;
    double high_ratio = 0.2;

    friend bool operator==(const CannyParams&, const CannyParams&) = default;
};

// Sampled Gaussian truncated at +-ceil(3 sigma), normalized to unit sum.
std::vector<double> gaussian_kernel(double sigma);

// Separable symmetric convolution, edge-replicated. Taps must have odd length.
GrayImage convolve_separable(const GrayImage& img, const std::vector<double>& taps);

struct Gradient {
    GrayImage gx;
    GrayImage gy;
    GrayImage magnitude;
};

// Sobel gradient of an already smoothed image.
Gradient sobel(const GrayImage& img);

// Thinned magnitude: zero wherever the pixel is not a local maximum along
// its quantized gradient direction.
GrayImage non_max_suppression(const Gradient& grad);

// Double-threshold hysteresis over a thinned magnitude image. Pixels with
// magnitude >= high seed edges; pixels >= low join when 8-connected to a seed.
EdgeMap hysteresis(const GrayImage& thinned, double low, double high);

EdgeMap canny(const GrayImage& img, const CannyParams& params = {});

}  // namespace iris
