#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "iris/image.hpp"

namespace iris {

// Analysis filter bank of one wavelet family.
struct FilterPair {
    std::string name;
    std::vector<double> lo;
    std::vector<double> hi;
    bool orthogonal = true;
};

// Supported: symlet4, daubechies2, coiflet1, biorthogonal5.5,
// reverse-biorthogonal2.2 (short aliases sym4, db2, coif1, bior5.5, rbio2.2).
FilterPair make_filters(std::string_view family);

const std::vector<std::string>& wavelet_families();

enum class Extension { Periodic, Symmetric };

// Index into [0, n) for an arbitrary (possibly far out-of-range) position.
int extend_index(int i, int n, Extension mode);

// y[i] = sum_k taps[k] * x[i - dilation * (k - anchor)], anchor = (len-1)/2.
// A unit impulse at i0 therefore reproduces the taps starting at
// i0 - dilation * anchor.
std::vector<double> dilated_convolve(const std::vector<double>& x, const std::vector<double>& taps, int dilation,
                                     Extension mode);

struct SwtLevel {
    GrayImage ca;
    GrayImage ch;
    GrayImage cv;
    GrayImage cd;
};

// Undecimated 2-D transform. Each level filters along rows (angular axis,
// periodic extension) then along columns (radial axis, symmetric extension)
// with taps dilated by 2^(level-1). ca feeds the next level.
// ch = rows lo / columns hi, cv = rows hi / columns lo, cd = hi / hi.
std::vector<SwtLevel> swt2(const GrayImage& m, const FilterPair& f, int levels = 2);

}  // namespace iris
