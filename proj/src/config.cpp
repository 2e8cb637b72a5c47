#include "iris/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "iris/error.hpp"

namespace iris {

void AppConfig::validate() const {
    pipeline.validate();
    matching.validate();
}

namespace {

std::string fmt(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);  // shortest form that round-trips
    return std::string(buf, res.ptr);
}
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }
std::string fmt(const std::string& v) { return v; }

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
    throw Error(ErrorCode::InvalidConfig, "bad value '" + std::string(value) + "' for " + std::string(key));
}

void parse(std::string_view key, std::string_view s, double& out) {
    // from_chars for doubles is incomplete on older toolchains
    std::string buf(s);
    char* end = nullptr;
    const double v = std::strtod(buf.c_str(), &end);
    if (buf.empty() || end != buf.c_str() + buf.size()) bad_value(key, s);
    out = v;
}
void parse(std::string_view key, std::string_view s, int& out) {
    int v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) bad_value(key, s);
    out = v;
}
void parse(std::string_view key, std::string_view s, bool& out) {
    if (s == "true" || s == "1" || s == "on")
        out = true;
    else if (s == "false" || s == "0" || s == "off")
        out = false;
    else
        bad_value(key, s);
}
void parse(std::string_view key, std::string_view s, std::string& out) {
    if (s.empty()) bad_value(key, s);
    out = std::string(s);
}

struct Field {
    std::string key;
    std::function<std::string(const AppConfig&)> get;
    std::function<void(AppConfig&, std::string_view)> set;
};

template <class T>
Field field(std::string key, T AppConfig::*outer, auto member) {
    return {key,
            [=](const AppConfig& c) { return fmt((c.*outer).*member); },
            [=](AppConfig& c, std::string_view v) { parse(key, v, (c.*outer).*member); }};
}

template <class Member>
Field seg(std::string key, Member m) {
    return {key,
            [=](const AppConfig& c) { return fmt(c.pipeline.segmentation.*m); },
            [=](AppConfig& c, std::string_view v) { parse(key, v, c.pipeline.segmentation.*m); }};
}
template <class Member>
Field canny(std::string key, Member m) {
    return {key,
            [=](const AppConfig& c) { return fmt(c.pipeline.segmentation.canny.*m); },
            [=](AppConfig& c, std::string_view v) { parse(key, v, c.pipeline.segmentation.canny.*m); }};
}
template <class Member>
Field norm(std::string key, Member m) {
    return {key,
            [=](const AppConfig& c) { return fmt(c.pipeline.normalization.*m); },
            [=](AppConfig& c, std::string_view v) { parse(key, v, c.pipeline.normalization.*m); }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> f = {
        seg("segmentation.a_fraction", &SegmentationConfig::a_fraction),
        seg("segmentation.threshold_T", &SegmentationConfig::threshold_T),
        seg("segmentation.fill_enabled", &SegmentationConfig::fill_enabled),
        seg("segmentation.fill_multiplier", &SegmentationConfig::fill_multiplier),
        canny("segmentation.canny_sigma", &CannyParams::sigma),
        canny("segmentation.canny_low", &CannyParams::low_ratio),
        canny("segmentation.canny_high", &CannyParams::high_ratio),
        seg("segmentation.max_refine_iters", &SegmentationConfig::max_refine_iters),
        seg("segmentation.refine_radius", &SegmentationConfig::refine_radius),
        seg("segmentation.refine_margin", &SegmentationConfig::refine_margin),
        norm("normalization.radial_rows", &NormalizationConfig::radial_rows),
        norm("normalization.angular_cols", &NormalizationConfig::angular_cols),
        norm("normalization.roi_rows", &NormalizationConfig::roi_rows),
        norm("normalization.roi_cols", &NormalizationConfig::roi_cols),
        norm("normalization.roi_first_row", &NormalizationConfig::roi_first_row),
        norm("normalization.roi_first_col", &NormalizationConfig::roi_first_col),
        norm("normalization.window", &NormalizationConfig::window),
        norm("normalization.beta", &NormalizationConfig::beta),
        norm("normalization.enhance", &NormalizationConfig::enhance),
        norm("normalization.hist_equalize", &NormalizationConfig::hist_equalize),
        norm("normalization.compress", &NormalizationConfig::compress),
        norm("normalization.full_iris", &NormalizationConfig::full_iris),
        field("features.family", &AppConfig::pipeline, &PipelineConfig::family),
        field("features.levels", &AppConfig::pipeline, &PipelineConfig::levels),
        field("features.selection", &AppConfig::pipeline, &PipelineConfig::selection),
        field("matching.max_shift", &AppConfig::matching, &MatchConfig::max_shift),
        field("matching.K", &AppConfig::matching, &MatchConfig::K),
        field("matching.A", &AppConfig::matching, &MatchConfig::A),
        field("matching.tau", &AppConfig::matching, &MatchConfig::verify_threshold),
    };
    return f;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& f : fields()) k.push_back(f.key);
        return k;
    }();
    return keys;
}

void set_config_value(AppConfig& cfg, std::string_view key, std::string_view value) {
    for (const auto& f : fields())
        if (f.key == key) return f.set(cfg, trim(value));
    throw Error(ErrorCode::InvalidConfig, "unknown config key " + std::string(key));
}

std::string serialize_config(const AppConfig& cfg) {
    std::string out;
    for (const auto& f : fields()) out += f.key + "=" + f.get(cfg) + "\n";
    return out;
}

AppConfig parse_config(std::string_view text, AppConfig base) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": expected key=value");
        set_config_value(base, trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    base.validate();
    return base;
}

AppConfig load_config(const std::filesystem::path& path, AppConfig base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileNotFound, "cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

const std::vector<std::string>& ablation_names() {
    static const std::vector<std::string> names = {"baseline", "histeq",  "no-compress", "enhance-histeq",
                                                   "beta60",   "beta85",  "beta95",      "window4",
                                                   "full-iris"};
    return names;
}

void apply_ablation(AppConfig& cfg, std::string_view name) {
    auto& n = cfg.pipeline.normalization;
    if (name == "baseline") {
    } else if (name == "histeq") {
        n.hist_equalize = true;
        n.enhance = false;
    } else if (name == "enhance-histeq") {
        n.hist_equalize = true;
        n.enhance = true;
    } else if (name == "no-compress") {
        n.compress = false;
    } else if (name == "beta60") {
        n.beta = 0.6;
    } else if (name == "beta85") {
        n.beta = 0.85;
    } else if (name == "beta95") {
        n.beta = 0.95;
    } else if (name == "window4") {
        n.window = 4;
    } else if (name == "full-iris") {
        n.full_iris = true;
    } else {
        throw Error(ErrorCode::InvalidConfig, "unknown ablation " + std::string(name));
    }
    cfg.validate();
}

}  // namespace iris
