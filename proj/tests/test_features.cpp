#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "iris/error.hpp"
#include "iris/features.hpp"
#include "iris/matching.hpp"
#include "iris/synth.hpp"
#include "iris/wavelet.hpp"
#include "oracles.hpp"

using namespace iris;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an iris::Error");
    return ErrorCode::InvalidArgument;
}

std::vector<double> reversed(std::vector<double> v) {
    std::reverse(v.begin(), v.end());
    return v;
}

// Synthesis taps for the biorthogonal families, copied from PyWavelets'
// rec_lo / rec_hi tables (the library never reconstructs, so it has none).
const std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> kSynthesis{
    {"biorthogonal5.5",
     {{0.013456709459118716, -0.002694966880111507, -0.13670658466432914, -0.09350469740093886, 0.47680326579848425,
       0.8995061097486484, 0.47680326579848425, -0.09350469740093886, -0.13670658466432914, -0.002694966880111507,
       0.013456709459118716, 0.0},
      {0.0, 0.0, 0.03968708834740544, -0.007948108637240322, -0.05446378846823691, -0.34560528195603346,
       0.7366601814282105, -0.34560528195603346, -0.05446378846823691, -0.007948108637240322, 0.03968708834740544,
       0.0}}},
    {"reverse-biorthogonal2.2",
     {{-0.1767766952966369, 0.3535533905932738, 1.0606601717798212, 0.3535533905932738, -0.1767766952966369, 0.0},
      {0.0, 0.0, 0.3535533905932738, -0.7071067811865476, 0.3535533905932738, 0.0}}},
};

std::vector<double> polymul(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

std::vector<double> alternate(std::vector<double> v) {
    for (std::size_t i = 1; i < v.size(); i += 2) v[i] = -v[i];
    return v;
}

GrayImage shift_cols(const GrayImage& m, int s) {
    GrayImage out(m.width(), m.height());
    for (int r = 0; r < m.height(); ++r)
        for (int c = 0; c < m.width(); ++c) out(r, oracle::periodic(c + s, m.width())) = m(r, c);
    return out;
}

double max_diff(const GrayImage& a, const GrayImage& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
    return d;
}

}  // namespace

TEST_CASE("filter banks: invariants and perfect reconstruction") {
    for (const auto& name : wavelet_families()) {
        CAPTURE(name);
        const FilterPair f = make_filters(name);
        CHECK(f.lo.size() == f.hi.size());
        CHECK(std::abs(std::accumulate(f.lo.begin(), f.lo.end(), 0.0) - std::sqrt(2.0)) < 1e-10);
        CHECK(std::abs(std::accumulate(f.hi.begin(), f.hi.end(), 0.0)) < 1e-10);
        if (f.orthogonal) {
            CHECK(std::abs(std::inner_product(f.lo.begin(), f.lo.end(), f.lo.begin(), 0.0) - 1.0) < 1e-10);
            for (std::size_t k = 2; k < f.lo.size(); k += 2) {
                double dot = 0.0;
                for (std::size_t i = 0; i + k < f.lo.size(); ++i) dot += f.lo[i] * f.lo[i + k];
                CHECK(std::abs(dot) < 1e-10);
            }
        }
        std::vector<double> rlo, rhi;
        if (f.orthogonal) {
            rlo = reversed(f.lo);
            rhi = reversed(f.hi);
        } else {
            std::tie(rlo, rhi) = kSynthesis.at(name);
        }
        // no distortion: a single 2 at the overall delay; no aliasing
        const auto pass = polymul(f.lo, rlo), pass_hi = polymul(f.hi, rhi);
        const auto alias = polymul(alternate(f.lo), rlo), alias_hi = polymul(alternate(f.hi), rhi);
        int peaks = 0;
        for (std::size_t i = 0; i < pass.size(); ++i) {
            const double v = pass[i] + pass_hi[i];
            if (std::abs(v - 2.0) < 1e-10) ++peaks;
            else CHECK(std::abs(v) < 1e-10);
            CHECK(std::abs(alias[i] + alias_hi[i]) < 1e-10);
        }
        CHECK(peaks == 1);
    }
    CHECK(make_filters("symlet4").lo.size() == 8);
    CHECK(make_filters("db2").lo.size() == 4);
    CHECK(make_filters("SYM4").name == "symlet4");
    CHECK(code_of([] { make_filters("haar9"); }) == ErrorCode::UnknownFamily);
}

TEST_CASE("extend_index") {
    for (int i = -40; i < 40; ++i) {
        CHECK(extend_index(i, 5, Extension::Periodic) == oracle::periodic(i, 5));
        CHECK(extend_index(i, 5, Extension::Symmetric) == oracle::symmetric(i, 5));
    }
    CHECK(extend_index(-1, 4, Extension::Symmetric) == 0);
    CHECK(extend_index(4, 4, Extension::Symmetric) == 3);
}

TEST_CASE("swt2 matches the naive dilated-convolution oracle") {
    for (const auto& name : wavelet_families()) {
        const FilterPair f = make_filters(name);
        for (auto [w, h] : {std::pair{16, 8}, std::pair{160, 16}}) {
            CAPTURE(name);
            CAPTURE(w);
            const GrayImage m = oracle::random_image(w, h, std::uint64_t(w + h), -100.0, 100.0);
            const auto dec = swt2(m, f, 2);
            REQUIRE(dec.size() == 2);
            GrayImage in = m;
            for (int level = 1; level <= 2; ++level) {
                const int d = 1 << (level - 1);
                const SwtLevel& lv = dec[level - 1];
                CHECK(max_diff(lv.ca, oracle::filter2(in, f.lo, f.lo, d)) < 1e-9);
                CHECK(max_diff(lv.ch, oracle::filter2(in, f.lo, f.hi, d)) < 1e-9);
                CHECK(max_diff(lv.cv, oracle::filter2(in, f.hi, f.lo, d)) < 1e-9);
                CHECK(max_diff(lv.cd, oracle::filter2(in, f.hi, f.hi, d)) < 1e-9);
                CHECK(lv.ca.width() == w);
                CHECK(lv.cd.height() == h);
                in = lv.ca;
            }
        }
    }
}

TEST_CASE("swt2: constants, impulses and shift covariance") {
    for (const auto& name : wavelet_families()) {
        CAPTURE(name);
        const FilterPair f = make_filters(name);
        const auto dec = swt2(GrayImage(160, 16, 7.0), f, 2);
        for (double v : dec[1].ca.data()) CHECK(std::abs(v - 28.0) < 1e-9);
        for (const auto& lv : dec)
            for (const GrayImage* m : {&lv.ch, &lv.cv, &lv.cd})
                for (double v : m->data()) CHECK(std::abs(v) < 1e-9);

        GrayImage imp(40, 24, 0.0);
        const int r0 = 12, c0 = 20;
        imp(r0, c0) = 1.0;
        const GrayImage ca = swt2(imp, f, 1)[0].ca;
        const int anchor = int(f.lo.size() - 1) / 2;
        auto tap = [&](int k) { return k >= 0 && k < int(f.lo.size()) ? f.lo[k] : 0.0; };
        for (int r = 0; r < 24; ++r)
            for (int c = 0; c < 40; ++c) CHECK(std::abs(ca(r, c) - tap(r - r0 + anchor) * tap(c - c0 + anchor)) < 1e-12);

        const GrayImage m = oracle::random_image(160, 16, 77);
        const auto base = swt2(m, f, 2);
        for (int s : {1, 3, -5}) {
            const auto moved = swt2(shift_cols(m, s), f, 2);
            for (int level = 0; level < 2; ++level) {
                CHECK(moved[level].ca == shift_cols(base[level].ca, s));
                CHECK(moved[level].cv == shift_cols(base[level].cv, s));
                CHECK(moved[level].cd == shift_cols(base[level].cd, s));
            }
        }
    }
    CHECK(code_of([] { swt2(GrayImage(), make_filters("sym4"), 2); }) == ErrorCode::MatrixTooSmall);
}

TEST_CASE("select_features and first_row_reduce") {
    const auto dec = swt2(oracle::random_image(160, 16, 5), make_filters("symlet4"), 2);
    const auto sel = select_features(dec, "ca2cv2");
    REQUIRE(sel.size() == 2);
    CHECK(sel[0] == dec[1].ca);
    CHECK(sel[1] == dec[1].cv);
    const auto one = select_features(dec, "ca1");
    REQUIRE(one.size() == 1);
    CHECK(one[0] == dec[0].ca);
    CHECK(code_of([&] { select_features(dec, "ca3"); }) == ErrorCode::LevelUnavailable);
    CHECK(code_of([&] { select_features(dec, "cx2"); }) == ErrorCode::UnknownSelection);
    CHECK(code_of([&] { select_features(dec, "ca"); }) == ErrorCode::UnknownSelection);
    CHECK(named_selections().size() == 16);
    for (const auto& s : named_selections()) CHECK_NOTHROW(select_features(dec, s));

    const auto v = first_row_reduce(sel);
    REQUIRE(v.size() == 320);
    for (int c = 0; c < 160; ++c) {
        CHECK(v[c] == sel[0](0, c));
        CHECK(v[160 + c] == sel[1](0, c));
    }
    CHECK(first_row_reduce(one).size() == 160);

    GrayImage dup = oracle::random_image(160, 16, 6);
    for (int c = 0; c < 160; ++c) dup(5, c) = dup(0, c);
    GrayImage from5(160, 1);
    for (int c = 0; c < 160; ++c) from5(0, c) = dup(5, c);
    CHECK(first_row_reduce({dup}) == first_row_reduce({from5}));
}

TEST_CASE("quantization") {
    const std::vector<double> half{-3, -1, 1, 3};
    CHECK(quantize_levels(half, 1) == std::vector<std::uint8_t>{1, 0, 2, 3});

    const std::vector<double> zeros(320, 0.0);
    // both bits set: 0 >= 0 and |0| >= median 0
    for (auto l : quantize_2bit(zeros).levels) CHECK(l == 3);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 5.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> v(320);
        for (double& x : v) x = n(rng);
        const IrisTemplate t = quantize_2bit(v);
        for (int seg = 0; seg < 2; ++seg) {
            int mag = 0;
            for (int i = 0; i < 160; ++i) {
                const auto l = t.levels[seg * 160 + i];
                CHECK(l <= 3);
                CHECK((l >= 2) == (v[seg * 160 + i] >= 0.0));
                mag += l & 1;
            }
            CHECK(mag == 80);
        }
        for (double c : {0.01, 3.0, 1e6}) {
            std::vector<double> scaled(v);
            for (double& x : scaled) x *= c;
            CHECK(quantize_2bit(scaled).levels == t.levels);
        }
    }
    CHECK(code_of([] { quantize_2bit(std::vector<double>(10, 1.0)); }) == ErrorCode::LengthMismatch);
    CHECK(code_of([] { quantize_levels(std::vector<double>{}, 1); }) == ErrorCode::EmptyInput);
}

TEST_CASE("pack/unpack round trip and bit layout") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        IrisTemplate t;
        t.levels.resize(320);
        for (auto& l : t.levels) l = std::uint8_t(rng() & 3);
        const PackedCode p = pack_template(t);
        CHECK(p.size() == 80);
        CHECK(unpack_template(p).levels == t.levels);
    }
    IrisTemplate t;
    t.levels.assign(320, 0);
    t.levels[0] = 3;
    t.levels[5] = 2;
    const PackedCode p = pack_template(t);
    CHECK(p[0] == 0x03);
    CHECK(p[1] == 0x08);  // level 5 -> bits 10,11
    IrisTemplate odd;
    odd.levels.assign(160, 0);
    odd.segments = 1;
    CHECK(code_of([&] { pack_template(odd); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("extract_template: determinism, rotation and identity separation") {
    SynthEyeSpec spec;
    spec.identity_seed = 4;
    const IrisTemplate a = extract_template(synth_eye(spec).image);
    CHECK(a.levels.size() == 320);
    CHECK(extract_template(synth_eye(spec).image).levels == a.levels);

    SynthEyeSpec turned = spec;
    turned.rotation_deg = 2.4;
    const IrisTemplate b = extract_template(synth_eye(turned).image);
    CHECK(b.levels != a.levels);
    // Row 0 of the compressed ROI hugs the pupil edge, so the sub-pixel
    // geometry change after re-rendering keeps the distance above zero.
    SynthEyeSpec other = spec;
    other.identity_seed = 5;
    const double d_other = semi_correlation(a, extract_template(synth_eye(other).image), 4).d_min;
    const MatchScore s = semi_correlation(a, b, 4);
    CHECK(s.best_shift == 2);
    CHECK(s.d_min < semi_correlation(a, b, 0).d_min);
    CHECK(s.d_min < 0.5 * d_other);

    // 50 same-identity recaptures (fresh sensor noise) vs 50 cross-identity pairs
    double intra = 0.0, inter = 0.0;
    for (int k = 0; k < 50; ++k) {
        SynthEyeSpec x;
        x.identity_seed = 100 + k;
        x.noise_sigma = 2.0;
        x.capture_seed = 1;
        SynthEyeSpec y = x;
        y.capture_seed = 2;
        SynthEyeSpec z = x;
        z.identity_seed = 200 + k;
        const IrisTemplate tx = extract_template(synth_eye(x).image);
        intra += semi_correlation(tx, extract_template(synth_eye(y).image)).d_min;
        inter += semi_correlation(tx, extract_template(synth_eye(z).image)).d_min;
    }
    CHECK(inter >= 5.0 * intra);
}
