#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iris/image.hpp"
#include "iris/normalization.hpp"
#include "iris/segmentation.hpp"
#include "iris/wavelet.hpp"

namespace iris {

enum class Eye : std::uint8_t { Left = 0, Right = 1 };

inline constexpr std::size_t kTemplateLevels = 320;
inline constexpr std::size_t kTemplateBytes = kTemplateLevels * 2 / 8;

using PackedCode = std::array<std::uint8_t, kTemplateBytes>;

// Quantized feature code. The standard pipeline yields 320 levels in two
// 160-entry segments (ca2 row 0, cv2 row 0); ablations may produce other
// lengths. Each segment lies along the shared angular axis.
struct IrisTemplate {
    std::vector<std::uint8_t> levels;  // each in {0,1,2,3}
    int segments = 2;
    std::string subject_id;
    Eye eye = Eye::Left;

    std::size_t segment_length() const { return segments > 0 ? levels.size() / std::size_t(segments) : 0; }
    bool is_standard() const { return levels.size() == kTemplateLevels && segments == 2; }
};

// Feature k occupies bits [2k, 2k+1] of a little-endian bit stream.
PackedCode pack_template(const IrisTemplate& t);
IrisTemplate unpack_template(const PackedCode& code);

// Names coefficient matrices such as "ca2cv2" or "ca1ch1cd1".
std::vector<GrayImage> select_features(const std::vector<SwtLevel>& dec, std::string_view selection = "ca2cv2");

// The sixteen coefficient combinations screened for family selection.
const std::vector<std::string>& named_selections();

std::vector<double> first_row_reduce(const std::vector<GrayImage>& mats);

// Per segment: m = median |x|; level = 2*[x >= 0] + [|x| >= m].
std::vector<std::uint8_t> quantize_levels(std::span<const double> v, int segments = 2);
IrisTemplate quantize_2bit(std::span<const double> v);

struct PipelineConfig {
    SegmentationConfig segmentation;
    NormalizationConfig normalization;
    std::string family = "symlet4";
    int levels = 2;
    std::string selection = "ca2cv2";

    void validate() const;
    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

// Real-valued features before quantization; segments receives the number of
// selected matrices.
std::vector<double> roi_features(const GrayImage& roi, const PipelineConfig& cfg = {}, int* segments = nullptr);

// Wavelet stage only: prepared ROI -> swt2 -> selection -> first row -> levels.
IrisTemplate template_from_roi(const GrayImage& roi, const PipelineConfig& cfg = {});

struct Extraction {
    Segmentation segmentation;
    IrisTemplate code;
};

Extraction extract(const GrayImage& img, const PipelineConfig& cfg = {});
IrisTemplate extract_template(const GrayImage& img, const PipelineConfig& cfg = {});

}  // namespace iris
