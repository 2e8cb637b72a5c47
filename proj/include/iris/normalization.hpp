#pragma once

#include "iris/image.hpp"
#include "iris/segmentation.hpp"

namespace iris {

// Polar strip: rows are radial (row 0 at the pupil boundary), columns angular.
using PolarStrip = GrayImage;
using Roi = GrayImage;
using CompressedRoi = GrayImage;

struct NormalizationConfig {
    int radial_rows = 50;
    int angular_cols = 300;
    int roi_rows = 32;
    int roi_cols = 160;
    int roi_first_row = 0;
    int roi_first_col = 15;
    int window = 7;       // background window half-width
    double beta = 0.9;    // background fraction removed
    bool enhance = true;
    bool hist_equalize = false;
    bool compress = true;
    bool full_iris = false;  // resample the whole strip into the ROI shape

    void validate() const;
    friend bool operator==(const NormalizationConfig&, const NormalizationConfig&) = default;
};

// Bilinear rubber-sheet sampling. Column k covers angle k * 360/cols degrees,
// clockwise from +x in image coordinates (right, down, left, up).
PolarStrip unwrap(const GrayImage& img, const IrisGeometry& g, int rows = 50, int cols = 300);

// Rectangular window of the strip; columns wrap around the angular axis.
Roi extract_roi(const PolarStrip& strip, const NormalizationConfig& cfg = {});

// roi - beta * (box mean over the (2w+1)^2 window)
Roi enhance_roi(const Roi& roi, int w = 7, double beta = 0.9);

// Average of each pair of rows.
CompressedRoi compress_roi(const Roi& roi);

// Rank-based equalization onto [0,255].
GrayImage histogram_equalize(const GrayImage& img);

// Bilinear resize to the requested shape (used for the full-iris ablation).
GrayImage resample(const GrayImage& img, int width, int height);

// strip -> ROI -> optional equalize -> enhance -> compress, as configured.
GrayImage prepare_roi(const PolarStrip& strip, const NormalizationConfig& cfg);

}  // namespace iris
