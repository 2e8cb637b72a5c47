#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "iris/features.hpp"
#include "iris/image.hpp"

namespace iris {

struct MatchScore {
    double d_min = 0.0;
    int best_shift = 0;
    std::size_t gallery_ref = 0;
};

struct MatchConfig {
    int max_shift = 4;
    int K = 5;
    int A = 3;
    double verify_threshold = 0.60;

    void validate() const;
    friend bool operator==(const MatchConfig&, const MatchConfig&) = default;
};

double abs_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);
double abs_distance(std::span<const double> a, std::span<const double> b);

// Minimum over circular shifts s in [-max_shift, max_shift] of the mean
// absolute level difference between a(j) and b(j + s), every segment shifted
// by the same s. Ties prefer the smaller |s|, then the negative shift.
MatchScore semi_correlation(const IrisTemplate& a, const IrisTemplate& b, int max_shift = 4);

// Full 2-D cross-correlation: C(i,j) = sum A(m,n) B(m + i - (Ma-1), n + j - (Na-1)),
// zero outside B; output (Ma+Mb-1) x (Na+Nb-1).
GrayImage cross_correlation(const GrayImage& a, const GrayImage& b);

struct LabeledScore {
    std::string label;
    double d_min = 0.0;
};

// Ascending by distance (stable); if a label holds >= A of the first K slots,
// the most frequent such label wins (ties: nearest). Otherwise the nearest.
std::string aknn_decide(std::vector<LabeledScore> scores, int K, int A);

struct Identification {
    std::string label;
    MatchScore best;                 // best score belonging to the decided label
    std::vector<MatchScore> ranked;  // first K by distance
};

Identification identify(const IrisTemplate& probe, std::span<const IrisTemplate> gallery, const MatchConfig& cfg = {});

struct Verification {
    bool accept = false;
    double d_min = 0.0;
};

Verification verify(const IrisTemplate& probe, std::span<const IrisTemplate> claimed, double tau, int max_shift = 4);

}  // namespace iris
