#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "iris/dataset.hpp"
#include "iris/features.hpp"
#include "iris/matching.hpp"

namespace iris {

// ---- class separability ----

struct DisResult {
    double dis = 0.0;
    std::size_t used = 0;        // features entering the average
    std::size_t degenerate = 0;  // excluded for near-zero variance product
};

// Mean over features of (meanA - meanB)^2 / (varA * varB), with means and
// variances normalized by class size.
DisResult dis_criterion(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b);

// Regions of the polar strip: A = the matching ROI, B = upper half of the
// inner band, C = outer band below the ROI columns.
enum class Region { A = 0, B = 1, C = 2 };
NormalizationConfig region_config(Region r, const NormalizationConfig& base = {});

struct RegionReport {
    std::array<double, 3> sum_dis{};            // summed over class pairs
    std::array<double, 3> distinct_pct{};       // relative to region A
    std::array<double, 3> non_distinct_pct{};   // 100 - distinct_pct
    std::array<std::size_t, 3> degenerate{};
    std::size_t class_pairs = 0;
};

// Features per class (subject), each class a list of feature vectors per region.
struct RegionSample {
    std::string subject;
    std::array<std::vector<double>, 3> features;
};

RegionSample region_features(const GrayImage& img, const PipelineConfig& cfg = {});
RegionReport region_information_report(const std::vector<RegionSample>& samples);
RegionReport region_information_report(const DatasetIndex& dataset, const PipelineConfig& cfg = {});

// ---- identification ----

struct EvalSample {
    std::string subject;
    Eye eye = Eye::Left;
    int index = 0;
    std::optional<IrisTemplate> code;  // empty when extraction failed
    std::string failure;               // stage/code of the failure
};

enum class EyeProtocol { Left, Right, Both };
const char* to_string(EyeProtocol p);

struct Rank1Report {
    EyeProtocol protocol = EyeProtocol::Left;
    int enroll_n = 0;
    int probes = 0;
    int correct = 0;
    double accuracy = 0.0;  // percent
    std::vector<std::string> errors;  // "subject#index -> decided"
    double mean_compare_us = 0.0;     // per template comparison
};

// Enrolls the first enroll_n samples per subject and eye, probes with the
// rest. Both-eyes: per gallery subject, fused score = min over eyes of the
// per-eye best distance; the smallest fused score decides.
Rank1Report rank1_eval(const std::vector<EvalSample>& samples, int enroll_n, EyeProtocol protocol,
                       const MatchConfig& mcfg = {});

// Extracts templates for every entry, fanned out over worker threads.
std::vector<EvalSample> extract_dataset(const DatasetIndex& dataset, const PipelineConfig& cfg = {}, int threads = 0);

Rank1Report rank1_eval(const DatasetIndex& dataset, int enroll_n, EyeProtocol protocol,
                       const PipelineConfig& cfg = {}, const MatchConfig& mcfg = {});

// ---- localization ----

struct AnnulusCheck {
    bool ok = false;
    double foreign_pct = 0.0;  // predicted pixels outside the true annulus, % of true area
    double lost_pct = 0.0;     // true pixels missed by the prediction, % of true area
};

// Pixel-count comparison of two annuli over the grid covering both.
AnnulusCheck compare_annulus(const IrisGeometry& truth, const IrisGeometry& predicted, double tolerance_pct = 5.0);

struct LocalizationReport {
    int images = 0;
    int correct = 0;
    double accuracy = 0.0;  // percent
    double mean_seconds = 0.0;
    std::vector<std::string> errors;
};

LocalizationReport localization_eval(const DatasetIndex& dataset, const SegmentationConfig& cfg = {});

// ---- distance distributions ----

inline constexpr int kHistogramBins = 64;

struct Histogram {
    double max = 0.0;  // bins split [0, max] evenly
    std::vector<std::size_t> intra;
    std::vector<std::size_t> inter;
};

struct Distribution {
    std::vector<double> intra;
    std::vector<double> inter;
    Histogram histogram;
};

// Classes are (subject, eye); every unordered pair of valid templates is scored.
Distribution distance_distribution(const std::vector<EvalSample>& samples, int max_shift = 4);
Histogram make_histogram(const std::vector<double>& intra, const std::vector<double>& inter, int bins = kHistogramBins);

std::string histogram_csv(const Histogram& h);
Histogram parse_histogram_csv(const std::string& text);
std::string distances_csv(const Distribution& d);

// Writes distances.csv and histogram.csv into dir.
void distribution_dump(const std::vector<EvalSample>& samples, const std::filesystem::path& dir, int max_shift = 4);

}  // namespace iris
