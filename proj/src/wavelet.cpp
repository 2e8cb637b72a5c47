#include "iris/wavelet.hpp"

#include <algorithm>
#include <cctype>

#include "iris/error.hpp"

namespace iris {

namespace {

// Decomposition taps as tabulated by PyWavelets (dec_lo / dec_hi).
const FilterPair kSymlet4{
    "symlet4",
    {-0.07576571478927333, -0.02963552764599851, 0.49761866763201545, 0.8037387518059161, 0.29785779560527736,
     -0.09921954357684722, -0.012603967262037833, 0.0322231006040427},
    {-0.0322231006040427, -0.012603967262037833, 0.09921954357684722, 0.29785779560527736, -0.8037387518059161,
     0.49761866763201545, 0.02963552764599851, -0.07576571478927333},
    true};

const FilterPair kDaubechies2{
    "daubechies2",
    {-0.12940952255126037, 0.2241438680420134, 0.8365163037378079, 0.48296291314453416},
    {-0.48296291314453416, 0.8365163037378079, -0.2241438680420134, -0.12940952255126037},
    true};

const FilterPair kCoiflet1{
    "coiflet1",
    {-0.015655728135791993, -0.07273261951252645, 0.3848648468648578, 0.8525720202116004, 0.3378976624574818,
     -0.07273261951252645},
    {0.07273261951252645, 0.3378976624574818, -0.8525720202116004, 0.3848648468648578, 0.07273261951252645,
     -0.015655728135791993},
    true};

const FilterPair kBiorthogonal55{
    "biorthogonal5.5",
    {0.0, 0.0, 0.03968708834740544, 0.007948108637240322, -0.05446378846823691, 0.34560528195603346,
     0.7366601814282105, 0.34560528195603346, -0.05446378846823691, 0.007948108637240322, 0.03968708834740544, 0.0},
    {-0.013456709459118716, -0.002694966880111507, 0.13670658466432914, -0.09350469740093886, -0.47680326579848425,
     0.8995061097486484, -0.47680326579848425, -0.09350469740093886, 0.13670658466432914, -0.002694966880111507,
     -0.013456709459118716, 0.0},
    false};

const FilterPair kReverseBiorthogonal22{
    "reverse-biorthogonal2.2",
    {0.0, 0.0, 0.3535533905932738, 0.7071067811865476, 0.3535533905932738, 0.0},
    {0.1767766952966369, 0.3535533905932738, -1.0606601717798212, 0.3535533905932738, 0.1767766952966369, 0.0},
    false};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    return out;
}

// Filters `src` along rows (horizontal) or columns into `dst`.
void filter_axis(const GrayImage& src, GrayImage& dst, const std::vector<double>& taps, int dilation, bool along_rows,
                 Extension mode) {
    const int anchor = static_cast<int>(taps.size() - 1) / 2;
    const int n = along_rows ? src.width() : src.height();
    const int lines = along_rows ? src.height() : src.width();
    for (int line = 0; line < lines; ++line) {
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < taps.size(); ++k) {
                if (taps[k] == 0.0) continue;
                const int j = extend_index(i - dilation * (static_cast<int>(k) - anchor), n, mode);
                acc += taps[k] * (along_rows ? src(line, j) : src(j, line));
            }
            (along_rows ? dst(line, i) : dst(i, line)) = acc;
        }
    }
}

}  // namespace

const std::vector<std::string>& wavelet_families() {
    static const std::vector<std::string> names{"symlet4", "daubechies2", "coiflet1", "biorthogonal5.5",
                                                "reverse-biorthogonal2.2"};
    return names;
}

FilterPair make_filters(std::string_view family) {
    const std::string name = lower(family);
    if (name == "symlet4" || name == "sym4") return kSymlet4;
    if (name == "daubechies2" || name == "db2") return kDaubechies2;
    if (name == "coiflet1" || name == "coif1") return kCoiflet1;
    if (name == "biorthogonal5.5" || name == "bior5.5") return kBiorthogonal55;
    if (name == "reverse-biorthogonal2.2" || name == "rbio2.2") return kReverseBiorthogonal22;
    throw Error(ErrorCode::UnknownFamily, std::string(family));
}

int extend_index(int i, int n, Extension mode) {
    if (mode == Extension::Periodic) return ((i % n) + n) % n;
    // half-sample symmetric: ... x1 x0 | x0 x1 ... x(n-1) | x(n-1) x(n-2) ...
    const int period = 2 * n;
    int m = ((i % period) + period) % period;
    return m < n ? m : period - 1 - m;
}

std::vector<double> dilated_convolve(const std::vector<double>& x, const std::vector<double>& taps, int dilation,
                                     Extension mode) {
    GrayImage src(static_cast<int>(x.size()), 1);
    std::copy(x.begin(), x.end(), src.data().begin());
    GrayImage dst(src.width(), 1);
    filter_axis(src, dst, taps, dilation, true, mode);
    return dst.data();
}

std::vector<SwtLevel> swt2(const GrayImage& m, const FilterPair& f, int levels) {
    if (levels < 1) throw Error(ErrorCode::InvalidArgument, "levels must be >= 1");
    if (m.empty()) throw Error(ErrorCode::MatrixTooSmall, "empty input matrix");
    std::vector<SwtLevel> out;
    out.reserve(levels);
    GrayImage approx = m;
    const int w = m.width();
    const int h = m.height();
    for (int level = 1; level <= levels; ++level) {
        const int dilation = 1 << (level - 1);
        GrayImage row_lo(w, h), row_hi(w, h);
        filter_axis(approx, row_lo, f.lo, dilation, true, Extension::Periodic);
        filter_axis(approx, row_hi, f.hi, dilation, true, Extension::Periodic);
        SwtLevel lv{GrayImage(w, h), GrayImage(w, h), GrayImage(w, h), GrayImage(w, h)};
        filter_axis(row_lo, lv.ca, f.lo, dilation, false, Extension::Symmetric);
        filter_axis(row_lo, lv.ch, f.hi, dilation, false, Extension::Symmetric);
        filter_axis(row_hi, lv.cv, f.lo, dilation, false, Extension::Symmetric);
        filter_axis(row_hi, lv.cd, f.hi, dilation, false, Extension::Symmetric);
        approx = lv.ca;
        out.push_back(std::move(lv));
    }
    return out;
}

}  // namespace iris
