#pragma once

#include <array>
#include <optional>
#include <string>

#include "iris/filters.hpp"
#include "iris/image.hpp"

namespace iris {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

// Image coordinates: x rightward, y downward.
struct PupilCircle {
    double cx = 0.0;
    double cy = 0.0;
    double r = 0.0;

    bool inside(const GrayImage& img) const {
        return r > 0.0 && cx - r >= 0.0 && cy - r >= 0.0 && cx + r <= img.width() - 1 && cy + r <= img.height() - 1;
    }
};

// Pupil circle plus the concentric limbic radius.
struct IrisGeometry {
    PupilCircle pupil;
    double limbic_r = 0.0;
};

struct SegmentationConfig {
    double a_fraction = 0.02;     // mask weight as a fraction of mean intensity
    double threshold_T = 256.0;   // saturation level for the highlighted image
    bool fill_enabled = true;
    double fill_multiplier = 1.0;  // extra factor applied to the fill mean
    CannyParams canny;
    int max_refine_iters = 10;
    bool refine_radius = true;
    double refine_margin = 10.0;  // rim is "brighter than the pupil" above mean + margin

    void validate() const;
    friend bool operator==(const SegmentationConfig&, const SegmentationConfig&) = default;
};

struct SegmentationFlags {
    bool refine_converged = true;
    bool limbic_fallback = false;
};

struct Segmentation {
    IrisGeometry geometry;
    SegmentationFlags flags;
};

// Intermediate rasters kept for debug dumps.
struct SegmentationTrace {
    GrayImage mask;
    GrayImage highlighted;
    EdgeMap pupil_edges;
    PupilCircle initial;
    GrayImage filled;
    EdgeMap limbic_edges;  // after collarette cleaning
};

GrayImage weighted_mask(const GrayImage& img, double a_fraction);
GrayImage highlight_pupil(const GrayImage& img, const GrayImage& mask, double threshold_T);

// Intersection of the perpendicular bisectors of chords p1p2 and p3p4.
Point chord_center(Point p1, Point p2, Point p3, Point p4);

PupilCircle estimate_pupil(const EdgeMap& edges);

struct RefineResult {
    PupilCircle circle;
    bool converged = true;
    int iterations = 0;
};

RefineResult refine_pupil(const GrayImage& img, const PupilCircle& c, double pupil_mean,
                          const SegmentationConfig& cfg = {});

// Mean intensity over the axis-aligned square inscribed in the circle.
double pupil_square_mean(const GrayImage& img, const PupilCircle& c);

GrayImage fill_pupil(const GrayImage& img, const PupilCircle& c, double multiplier = 1.0);

double clean_radius(double r_p);

// Upper-bound ladder for the limbic radius; first matching rule wins.
double clamp_limbic(double r_p, double r_l);

struct LimbicResult {
    double radius = 0.0;
    double raw_mean = 0.0;
    int hits = 0;
    int survivors = 0;
};

LimbicResult limbic_radius(const GrayImage& img, const PupilCircle& pupil, const SegmentationConfig& cfg = {},
                           EdgeMap* cleaned_edges = nullptr);

Segmentation segment(const GrayImage& img, const SegmentationConfig& cfg = {}, SegmentationTrace* trace = nullptr);

}  // namespace iris
