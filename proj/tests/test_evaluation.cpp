#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "iris/dataset.hpp"
#include "iris/error.hpp"
#include "iris/evaluation.hpp"
#include "iris/image_io.hpp"
#include "iris/synth.hpp"
#include "oracles.hpp"

using namespace iris;
namespace fs = std::filesystem;

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

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "iris_unit" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::vector<double>> random_class(std::mt19937_64& rng, int n, int len, double mean, double sd) {
    std::normal_distribution<double> g(mean, sd);
    std::vector<std::vector<double>> out(n, std::vector<double>(len));
    for (auto& v : out)
        for (double& x : v) x = g(rng);
    return out;
}

IrisTemplate random_template(std::mt19937_64& rng) {
    IrisTemplate t;
    t.levels.resize(320);
    for (auto& l : t.levels) l = std::uint8_t(rng() & 3);
    return t;
}

}  // namespace

TEST_CASE("dis_criterion") {
    const std::vector<std::vector<double>> a{{-1, 5, 0}, {1, 7, 2}}, b{{1, 5, 0}, {3, 7, 2}};
    CHECK(dis_criterion(a, a).dis == 0.0);
    // all variances 1; gaps 2, 0, 0
    const DisResult r = dis_criterion(a, b);
    CHECK(r.dis == doctest::Approx(4.0 / 3.0));
    CHECK(r.used == 3);

    std::vector<std::vector<double>> ga(2, std::vector<double>(4)), gb(2, std::vector<double>(4));
    for (int i = 0; i < 4; ++i) {
        ga[0][i] = -1;
        ga[1][i] = 1;
        gb[0][i] = 1;
        gb[1][i] = 3;
    }
    CHECK(dis_criterion(ga, gb).dis == doctest::Approx(4.0));

    std::mt19937_64 rng(8);
    for (int k = 0; k < 50; ++k) {
        const auto x = random_class(rng, 3 + k % 4, 20, 0.0, 1.0 + k % 3);
        const auto y = random_class(rng, 2 + k % 5, 20, 0.5, 1.0);
        const double got = dis_criterion(x, y).dis;
        CHECK(std::abs(got - oracle::dis(x, y)) <= 1e-9 * std::max(1.0, got));
        CHECK(dis_criterion(y, x).dis == doctest::Approx(got).epsilon(1e-12));
    }

    std::vector<std::vector<double>> flat{{1, 2}, {1, 4}}, other{{3, 2}, {3, 6}};
    const DisResult d = dis_criterion(flat, other);
    CHECK(d.degenerate == 1);
    CHECK(d.used == 1);

    CHECK(code_of([&] { dis_criterion({{1, 2}}, other); }) == ErrorCode::ClassTooSmall);
    CHECK(code_of([&] { dis_criterion({{1, 2}, {1, 2, 3}}, other); }) == ErrorCode::LengthMismatch);
    CHECK(code_of([] { dis_criterion({{1}, {1}}, {{2}, {2}}); }) == ErrorCode::AllFeaturesDegenerate);
}

TEST_CASE("region_information_report") {
    CHECK(region_config(Region::B).roi_first_col == 150);
    CHECK(region_config(Region::B).roi_cols == 150);
    CHECK(region_config(Region::C).roi_first_row == 32);
    CHECK(region_config(Region::C).roi_rows == 18);

    CohortSpec cs;
    cs.subjects = 6;
    cs.samples = 4;
    cs.seed = 3;
    cs.upper_noise_only = true;
    std::vector<RegionSample> samples;
    for (const auto& s : make_cohort(cs)) {
        RegionSample r = region_features(synth_eye(s.spec).image);
        r.subject = s.subject;
        samples.push_back(std::move(r));
    }
    const RegionReport rep = region_information_report(samples);
    CHECK(rep.class_pairs == 15);
    CHECK(rep.distinct_pct[0] == doctest::Approx(100.0));
    CHECK(rep.distinct_pct[1] < 10.0);
    CHECK(rep.non_distinct_pct[1] == doctest::Approx(100.0 - rep.distinct_pct[1]));

    std::vector<RegionSample> one(samples.begin(), samples.begin() + 4);
    CHECK(code_of([&] { region_information_report(one); }) == ErrorCode::ClassTooSmall);
}

TEST_CASE("rank1_eval on constructed templates") {
    std::mt19937_64 rng(12);
    std::vector<EvalSample> samples;
    for (int s = 0; s < 6; ++s)
        for (Eye eye : {Eye::Left, Eye::Right}) {
            const IrisTemplate t = random_template(rng);
            for (int k = 0; k < 3; ++k) {
                IrisTemplate c = t;
                c.subject_id = "p" + std::to_string(s);
                c.eye = eye;
                samples.push_back({c.subject_id, eye, k, c, {}});
            }
        }
    // every probe is an exact copy of an enrolled template
    for (EyeProtocol p : {EyeProtocol::Left, EyeProtocol::Right, EyeProtocol::Both}) {
        const Rank1Report r = rank1_eval(samples, 1, p);
        CHECK(r.probes == 12);
        CHECK(r.correct == 12);
        CHECK(r.accuracy == 100.0);
        CHECK(r.errors.empty());
    }
    const Rank1Report again = rank1_eval(samples, 2, EyeProtocol::Left);
    CHECK(again.probes == 6);
    CHECK(again.accuracy == 100.0);
    CHECK(code_of([&] { rank1_eval(samples, 3, EyeProtocol::Left); }) == ErrorCode::InsufficientImages);

    // a failed extraction counts as a wrong probe
    samples[2].code.reset();
    samples[2].failure = "segment:TooFewEdgePoints";
    const Rank1Report miss = rank1_eval(samples, 1, EyeProtocol::Left);
    CHECK(miss.correct == 11);
    CHECK(miss.errors.size() == 1);

    // the left eye alone is ambiguous here; the right eye resolves it under fusion
    std::vector<EvalSample> fused;
    const IrisTemplate shared = random_template(rng);
    for (int s = 0; s < 2; ++s) {
        const IrisTemplate right = random_template(rng);
        for (int k = 0; k < 2; ++k) {
            IrisTemplate l = shared, r = right;
            if (s == 1 && k == 1) l.levels[0] ^= 1;
            fused.push_back({"f" + std::to_string(s), Eye::Left, k, l, {}});
            fused.push_back({"f" + std::to_string(s), Eye::Right, k, r, {}});
        }
    }
    CHECK(rank1_eval(fused, 1, EyeProtocol::Both).accuracy == 100.0);
}

TEST_CASE("compare_annulus") {
    const IrisGeometry truth{{60.0, 60.0, 30.0}, 40.0};
    const AnnulusCheck same = compare_annulus(truth, truth);
    CHECK(same.ok);
    CHECK(same.foreign_pct == 0.0);
    CHECK(same.lost_pct == 0.0);

    IrisGeometry big = truth;
    big.pupil.r = 36.0;  // 20% larger pupil on a thin annulus
    const AnnulusCheck c = compare_annulus(truth, big);
    CHECK_FALSE(c.ok);
    const double want = 100.0 * (36.0 * 36.0 - 30.0 * 30.0) / (40.0 * 40.0 - 30.0 * 30.0);
    CHECK(std::abs(c.lost_pct - want) < 2.0);
    CHECK(c.foreign_pct == 0.0);

    IrisGeometry wide = truth;
    wide.limbic_r = 40.25;  // adds ~2.9% of the true area
    const AnnulusCheck w = compare_annulus(truth, wide);
    CHECK(w.foreign_pct > 0.0);
    CHECK(w.foreign_pct < 5.0);
    CHECK(w.ok);
}

TEST_CASE("dataset scanning and sidecars") {
    CHECK(parse_eye("s001_R_03") == Eye::Right);
    CHECK(parse_eye("S1001R02") == Eye::Right);
    CHECK(parse_eye("S1001L02") == Eye::Left);
    CHECK(parse_eye("001_1_1") == Eye::Left);
    CHECK(parse_eye("right") == Eye::Left);  // a word, not a token
    CHECK(eye_letter(Eye::Right) == 'R');

    const fs::path root = fresh_dir("scan");
    fs::create_directories(root / "b");
    fs::create_directories(root / "a");
    const GrayImage img(8, 8, 10.0);
    write_pgm(root / "b" / "x_L_2.pgm", img);
    write_pgm(root / "b" / "x_R_1.pgm", img);
    write_pgm(root / "b" / "x_L_1.pgm", img);
    write_pgm(root / "a" / "y.pgm", img);
    std::ofstream(root / "a" / "notes.txt") << "ignored";
    const IrisGeometry g{{1.25, 2.5, 3.0}, 9.75};
    write_circles(root / "b" / "x_L_1.circles", g);

    const DatasetIndex ds = scan_dataset(root);
    REQUIRE(ds.entries.size() == 4);
    CHECK(ds.subjects() == std::vector<std::string>{"a", "b"});
    CHECK(ds.entries[1].path.filename() == "x_L_1.pgm");
    CHECK(ds.entries[1].index == 0);
    CHECK(ds.entries[2].path.filename() == "x_L_2.pgm");
    CHECK(ds.entries[2].index == 1);
    CHECK(ds.entries[3].eye == Eye::Right);
    CHECK(ds.entries[3].index == 0);
    REQUIRE(ds.entries[1].truth);
    CHECK(ds.entries[1].truth->pupil.cx == 1.25);
    CHECK(ds.entries[1].truth->limbic_r == 9.75);
    CHECK_FALSE(ds.entries[0].truth);
    CHECK(ds.has_eye(Eye::Right));

    std::ofstream(root / "b" / "x_L_2.circles") << "1 2 oops";
    CHECK(code_of([&] { scan_dataset(root); }) == ErrorCode::CorruptFormat);
    CHECK(code_of([&] { scan_dataset(root / "missing"); }) == ErrorCode::FileNotFound);
    CHECK(code_of([&] { scan_dataset(fresh_dir("empty")); }) == ErrorCode::EmptyInput);

    // CASIA-v1 style session folders
    const fs::path casia = fresh_dir("sessions");
    for (const char* p : {"001/2/001_2_1.pgm", "001/1/001_1_2.pgm", "001/1/001_1_1.pgm"}) {
        fs::create_directories((casia / p).parent_path());
        write_pgm(casia / p, img);
    }
    const DatasetIndex nested = scan_dataset(casia);
    REQUIRE(nested.entries.size() == 3);
    CHECK(nested.entries[0].subject == "001");
    CHECK(nested.entries[0].path.filename() == "001_1_1.pgm");
    CHECK(nested.entries[2].path.filename() == "001_2_1.pgm");
    CHECK(nested.entries[2].index == 2);
}

TEST_CASE("localization_eval on rendered ground truth") {
    CohortSpec cs;
    cs.subjects = 3;
    cs.samples = 2;
    cs.seed = 5;
    const DatasetIndex ds = write_synthetic(cs, fresh_dir("loc"));
    REQUIRE(ds.entries.size() == 6);
    const LocalizationReport rep = localization_eval(ds);
    CHECK(rep.images == 6);
    CHECK(rep.accuracy == 100.0);
    CHECK(rep.mean_seconds > 0.0);

    const fs::path bare = fresh_dir("bare");
    fs::create_directories(bare / "s");
    write_pgm(bare / "s" / "i.pgm", GrayImage(8, 8, 1.0));
    CHECK(code_of([&] { localization_eval(scan_dataset(bare)); }) == ErrorCode::MissingGroundTruth);
}

TEST_CASE("distance distributions and CSV round trip") {
    std::mt19937_64 rng(14);
    std::vector<EvalSample> same;
    for (int s = 0; s < 2; ++s) {
        const IrisTemplate t = random_template(rng);
        for (int k = 0; k < 3; ++k) same.push_back({"d" + std::to_string(s), Eye::Left, k, t, {}});
    }
    const Distribution d = distance_distribution(same);
    CHECK(d.intra.size() == 6);  // 2 * C(3,2)
    CHECK(d.inter.size() == 9);
    for (double v : d.intra) CHECK(v == 0.0);
    CHECK(d.histogram.intra[0] == 6);

    std::vector<EvalSample> mixed;
    const int sizes[] = {2, 4, 3};
    for (int s = 0; s < 3; ++s)
        for (int k = 0; k < sizes[s]; ++k) mixed.push_back({"m" + std::to_string(s), Eye::Left, k, random_template(rng), {}});
    mixed.push_back({"m0", Eye::Right, 0, random_template(rng), {}});  // its own class
    const Distribution m = distance_distribution(mixed);
    CHECK(m.intra.size() == 1 + 6 + 3);
    CHECK(m.inter.size() == 10 * 9 / 2 - 10);
    std::size_t mass = 0;
    for (auto c : m.histogram.intra) mass += c;
    for (auto c : m.histogram.inter) mass += c;
    CHECK(mass == 45);
    CHECK(m.histogram.intra.size() == std::size_t(kHistogramBins));

    const Histogram back = parse_histogram_csv(histogram_csv(m.histogram));
    CHECK(back.intra == m.histogram.intra);
    CHECK(back.inter == m.histogram.inter);
    CHECK(back.max == m.histogram.max);

    const fs::path dir = fresh_dir("dump");
    distribution_dump(mixed, dir);
    std::ifstream h(dir / "histogram.csv"), dist(dir / "distances.csv");
    std::stringstream hs, ds;
    hs << h.rdbuf();
    ds << dist.rdbuf();
    CHECK(parse_histogram_csv(hs.str()).inter == m.histogram.inter);
    CHECK(ds.str() == distances_csv(m));
    CHECK(code_of([] { parse_histogram_csv("nonsense"); }) == ErrorCode::CorruptFormat);
}

TEST_CASE("synthetic eyes are deterministic and separate intra from inter") {
    SynthEyeSpec s;
    s.specular_count = 2;
    s.noise_sigma = 3.0;
    CHECK(synth_eye(s).image == synth_eye(s).image);
    SynthEyeSpec bad;
    bad.limbic_r = bad.pupil_r;
    CHECK(code_of([&] { bad.validate(); }) == ErrorCode::InvalidSpec);

    CohortSpec cs;
    cs.subjects = 6;
    cs.samples = 4;
    cs.seed = 9;
    std::vector<EvalSample> samples;
    for (const auto& c : make_cohort(cs)) {
        IrisTemplate t = extract_template(synth_eye(c.spec).image);
        samples.push_back({c.subject, c.eye, c.index, t, {}});
    }
    const Distribution d = distance_distribution(samples);
    auto stats = [](const std::vector<double>& v) {
        double m = 0.0, q = 0.0;
        for (double x : v) m += x / v.size();
        for (double x : v) q += (x - m) * (x - m) / v.size();
        return std::pair{m, std::sqrt(q)};
    };
    const auto [mi, si] = stats(d.intra);
    const auto [me, se] = stats(d.inter);
    CAPTURE(mi);
    CAPTURE(si);
    CAPTURE(me);
    CHECK(me - mi >= 3.0 * si);
    // same identity and pose, different per-capture texture and sensor noise
    int below = 0;
    for (std::uint64_t id = 1; id <= 10; ++id) {
        SynthEyeSpec x;
        x.identity_seed = id;
        x.capture_texture = 0.4;
        x.noise_sigma = 2.0;
        x.capture_seed = 1;
        SynthEyeSpec y = x;
        y.capture_seed = 2;
        const double dist =
            semi_correlation(extract_template(synth_eye(x).image), extract_template(synth_eye(y).image)).d_min;
        below += dist <= MatchConfig{}.verify_threshold;
    }
    CHECK(below == 10);
}
