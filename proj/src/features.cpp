#include "iris/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "iris/error.hpp"

namespace iris {

PackedCode pack_template(const IrisTemplate& t) {
    if (!t.is_standard()) throw Error(ErrorCode::LengthMismatch, "only 320-level templates pack to 80 bytes");
    PackedCode out{};
    for (std::size_t k = 0; k < kTemplateLevels; ++k) {
        if (t.levels[k] > 3) throw Error(ErrorCode::InvalidArgument, "template level out of range");
        const std::size_t bit = 2 * k;
        out[bit / 8] |= static_cast<std::uint8_t>(t.levels[k] << (bit % 8));
    }
    return out;
}

IrisTemplate unpack_template(const PackedCode& code) {
    IrisTemplate t;
    t.levels.resize(kTemplateLevels);
    for (std::size_t k = 0; k < kTemplateLevels; ++k) {
        const std::size_t bit = 2 * k;
        t.levels[k] = static_cast<std::uint8_t>((code[bit / 8] >> (bit % 8)) & 0x3);
    }
    return t;
}

std::vector<GrayImage> select_features(const std::vector<SwtLevel>& dec, std::string_view selection) {
    std::string name(selection);
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    if (name.empty() || name.size() % 3 != 0) throw Error(ErrorCode::UnknownSelection, std::string(selection));
    std::vector<GrayImage> out;
    for (std::size_t i = 0; i < name.size(); i += 3) {
        const std::string kind = name.substr(i, 2);
        const char digit = name[i + 2];
        if (digit < '1' || digit > '9') throw Error(ErrorCode::UnknownSelection, std::string(selection));
        const std::size_t level = static_cast<std::size_t>(digit - '0');
        const SwtLevel* lv = nullptr;
        if (kind == "ca" || kind == "ch" || kind == "cv" || kind == "cd") {
            if (level > dec.size()) {
                throw Error(ErrorCode::LevelUnavailable, name.substr(i, 3) + " needs level " + std::to_string(level));
            }
            lv = &dec[level - 1];
        } else {
            throw Error(ErrorCode::UnknownSelection, std::string(selection));
        }
        if (kind == "ca") out.push_back(lv->ca);
        else if (kind == "ch") out.push_back(lv->ch);
        else if (kind == "cv") out.push_back(lv->cv);
        else out.push_back(lv->cd);
    }
    return out;
}

const std::vector<std::string>& named_selections() {
    static const std::vector<std::string> names{
        "ca2cv2ch2cd2", "ca2cv2ch2", "ca2cv2cd2", "ca2cv2", "ca2ch2", "ca2cd2", "ca2", "ca1cv1ch1cd1",
        "ca1cv1ch1", "ca1cv1cd1", "ca1cv1", "ca1ch1cd1", "ca1ch1", "ca1cd1", "ca1", "ca2cd2ch2",
    };
    return names;
}

std::vector<double> first_row_reduce(const std::vector<GrayImage>& mats) {
    std::vector<double> out;
    for (const GrayImage& m : mats) {
        if (m.empty()) throw Error(ErrorCode::EmptyInput, "matrix without rows");
        const auto row = m.row(0);
        out.insert(out.end(), row.begin(), row.end());
    }
    return out;
}

namespace {

double median_abs(std::span<const double> v) {
    std::vector<double> mags(v.size());
    std::transform(v.begin(), v.end(), mags.begin(), [](double x) { return std::abs(x); });
    std::sort(mags.begin(), mags.end());
    const std::size_t n = mags.size();
    return n % 2 ? mags[n / 2] : 0.5 * (mags[n / 2 - 1] + mags[n / 2]);
}

}  // namespace

std::vector<std::uint8_t> quantize_levels(std::span<const double> v, int segments) {
    if (v.empty()) throw Error(ErrorCode::EmptyInput, "cannot quantize an empty vector");
    if (segments < 1 || v.size() % std::size_t(segments) != 0) {
        throw Error(ErrorCode::LengthMismatch, "vector length is not divisible into segments");
    }
    const std::size_t len = v.size() / std::size_t(segments);
    std::vector<std::uint8_t> out(v.size());
    for (int s = 0; s < segments; ++s) {
        const auto part = v.subspan(std::size_t(s) * len, len);
        const double m = median_abs(part);
        for (std::size_t i = 0; i < len; ++i) {
            const double x = part[i];
            out[std::size_t(s) * len + i] = static_cast<std::uint8_t>(2 * (x >= 0.0) + (std::abs(x) >= m));
        }
    }
    return out;
}

IrisTemplate quantize_2bit(std::span<const double> v) {
    if (v.size() != kTemplateLevels) throw Error(ErrorCode::LengthMismatch, "expected 320 features");
    IrisTemplate t;
    t.levels = quantize_levels(v, 2);
    t.segments = 2;
    return t;
}

void PipelineConfig::validate() const {
    segmentation.validate();
    normalization.validate();
    (void)make_filters(family);
    if (levels < 1 || levels > 9) throw Error(ErrorCode::InvalidConfig, "wavelet levels must be in [1,9]");
    if (selection.empty()) throw Error(ErrorCode::InvalidConfig, "empty coefficient selection");
}

std::vector<double> roi_features(const GrayImage& roi, const PipelineConfig& cfg, int* segments) {
    const auto dec = swt2(roi, make_filters(cfg.family), cfg.levels);
    const auto mats = select_features(dec, cfg.selection);
    if (segments) *segments = static_cast<int>(mats.size());
    return first_row_reduce(mats);
}

IrisTemplate template_from_roi(const GrayImage& roi, const PipelineConfig& cfg) {
    IrisTemplate t;
    const auto features = roi_features(roi, cfg, &t.segments);
    t.levels = quantize_levels(features, t.segments);
    return t;
}

Extraction extract(const GrayImage& img, const PipelineConfig& cfg) {
    Extraction out;
    out.segmentation = segment(img, cfg.segmentation);
    try {
        const auto& n = cfg.normalization;
        const PolarStrip strip = unwrap(img, out.segmentation.geometry, n.radial_rows, n.angular_cols);
        const GrayImage roi = prepare_roi(strip, n);
        out.code = template_from_roi(roi, cfg);
    } catch (const Error& e) {
        throw e.with_stage("features");
    }
    return out;
}

IrisTemplate extract_template(const GrayImage& img, const PipelineConfig& cfg) { return extract(img, cfg).code; }

}  // namespace iris
