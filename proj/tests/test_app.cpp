#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "iris/cli.hpp"
#include "iris/config.hpp"
#include "iris/dataset.hpp"
#include "iris/error.hpp"
#include "iris/store.hpp"

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

StoreRecord record(std::mt19937_64& rng, std::string id, Eye eye, std::uint16_t k) {
    StoreRecord r{std::move(id), eye, k, {}};
    for (auto& b : r.code) b = std::uint8_t(rng());
    return r;
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "iris_cli");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_dispatch(int(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config serialization round trip and validation") {
    const AppConfig def;
    CHECK(parse_config(serialize_config(def)) == def);

    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        AppConfig c;
        c.pipeline.segmentation.a_fraction = std::uniform_real_distribution<double>(0.001, 0.1)(rng);
        c.pipeline.segmentation.canny.sigma = std::uniform_real_distribution<double>(0.5, 3.0)(rng);
        c.pipeline.normalization.beta = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        c.pipeline.normalization.window = 1 + int(rng() % 10);
        c.pipeline.normalization.hist_equalize = rng() & 1;
        c.pipeline.family = wavelet_families()[rng() % wavelet_families().size()];
        c.pipeline.selection = named_selections()[rng() % named_selections().size()];
        c.matching.max_shift = int(rng() % 9);
        c.matching.K = 3 + int(rng() % 5);
        c.matching.A = 1 + int(rng() % 3);
        c.matching.verify_threshold = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
        CHECK(parse_config(serialize_config(c)) == c);
    }

    const AppConfig p = parse_config("# comment\n\nmatching.max_shift = 6\nnormalization.enhance=false\n");
    CHECK(p.matching.max_shift == 6);
    CHECK_FALSE(p.pipeline.normalization.enhance);
    CHECK(code_of([] { parse_config("matching.nope=1\n"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_config("matching.K\n"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_config("normalization.beta=1.5\n"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_config("matching.K=five\n"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_config("features.family=haar9\n"); }) != ErrorCode::FileNotFound);
    CHECK(config_keys().size() >= 28);

    for (const auto& name : ablation_names()) {
        AppConfig c;
        apply_ablation(c, name);
        CHECK_NOTHROW(c.validate());
    }
    AppConfig h;
    apply_ablation(h, "no-compress");
    CHECK_FALSE(h.pipeline.normalization.compress);
    CHECK(code_of([&] { apply_ablation(h, "bogus"); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("template store format") {
    std::mt19937_64 rng(22);
    TemplateStore s;
    s.add(record(rng, "alice", Eye::Left, 0));
    s.add(record(rng, "alice", Eye::Right, 0));
    s.add(record(rng, "bob", Eye::Left, 3));
    const auto bytes = serialize_store(s);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "IRDB");
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == 0);
    CHECK(bytes[6] == 3);
    CHECK(bytes.size() == 10 + 3 * (2 + 1 + 2 + 80) + 5 + 5 + 3);
    CHECK(parse_store(bytes) == s);

    const fs::path dir = fresh_dir("store");
    store_save(s, dir / "db.irdb");
    CHECK(store_load(dir / "db.irdb") == s);
    CHECK_FALSE(fs::exists(dir / "db.irdb.tmp"));

    for (std::size_t cut : {std::size_t(3), std::size_t(9), bytes.size() - 1, bytes.size() - 81})
        CHECK(code_of([&] { parse_store(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + cut)); }) ==
              (cut < 4 ? ErrorCode::BadMagic : ErrorCode::TruncatedFile));
    auto magic = bytes;
    magic[0] = 'X';
    CHECK(code_of([&] { parse_store(magic); }) == ErrorCode::BadMagic);
    auto version = bytes;
    version[4] = 2;
    CHECK(code_of([&] { parse_store(version); }) == ErrorCode::VersionMismatch);
    auto eye = bytes;
    eye[10 + 2 + 5] = 7;
    CHECK(code_of([&] { parse_store(eye); }) == ErrorCode::CorruptFormat);
    CHECK(code_of([&] { store_load(dir / "absent.irdb"); }) == ErrorCode::FileNotFound);

    CHECK(code_of([&] { s.add(record(rng, "alice", Eye::Left, 0)); }) == ErrorCode::DuplicateKey);
    CHECK(code_of([&] { s.add(record(rng, "", Eye::Left, 0)); }) == ErrorCode::InvalidArgument);
    CHECK(s.next_sample_index("alice", Eye::Left) == 1);
    CHECK(s.next_sample_index("carol", Eye::Left) == 0);
    CHECK(s.templates(std::string("alice")).size() == 2);
    CHECK(s.templates(std::nullopt, Eye::Left).size() == 2);
    CHECK(s.templates()[2].subject_id == "bob");

    TemplateStore big;
    for (int i = 0; i < 1000; ++i) big.add(record(rng, "subject" + std::to_string(i / 10), Eye(i % 2), std::uint16_t(i)));
    store_save(big, dir / "big.irdb");
    const auto t0 = std::chrono::steady_clock::now();
    const TemplateStore loaded = store_load(dir / "big.irdb");
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    CHECK(ms < 100.0);
    CHECK(loaded == big);
    for (const auto& t : loaded.templates()) CHECK(t.levels.size() == 320);
}

TEST_CASE("cli end to end") {
    const fs::path dir = fresh_dir("cli");
    CohortSpec cs;
    cs.subjects = 3;
    cs.samples = 2;
    cs.seed = 4;
    const DatasetIndex ds = write_synthetic(cs, dir / "data");
    auto img = [&](int subject, int k) { return ds.entries[std::size_t(subject * 2 + k)].path.string(); };
    const std::string db = (dir / "db.irdb").string();

    SUBCASE("usage errors") {
        CHECK(cli({}).code == 2);
        CHECK(cli({"frobnicate"}).code == 2);
        CHECK(cli({"--help"}).code == 0);
        CHECK(cli({"enroll", "--db", db, img(0, 0)}).code == 2);  // no --subject
        CHECK_FALSE(fs::exists(db));
        CHECK(cli({"verify", "--db", db, "--subject", "x", "--tau", "-1", img(0, 0)}).code == 2);
        CHECK(cli({"eval", "--dataset", dir.string(), "--ablation", "nope"}).code == 2);
    }

    SUBCASE("domain errors") {
        const Run missing = cli({"segment", (dir / "nope.pgm").string()});
        CHECK(missing.code == 1);
        CHECK(missing.err.find("error:") == 0);
        CHECK(missing.err.find("file-not-found") != std::string::npos);
        CHECK(cli({"identify", "--db", db, img(0, 0)}).code == 1);  // no store yet
        CHECK(cli({"--set", "matching.bogus=1", "segment", img(0, 0)}).code == 1);
    }

    SUBCASE("segment output is stable") {
        const Run a = cli({"segment", "--json", img(1, 0)});
        const Run b = cli({"segment", "--json", img(1, 0)});
        CHECK(a.code == 0);
        CHECK(a.out == b.out);
        CHECK(a.out.find("\"pupil\"") != std::string::npos);
        const fs::path ov = dir / "overlay.pgm";
        CHECK(cli({"segment", "--overlay", ov.string(), img(1, 0)}).code == 0);
        CHECK(fs::exists(ov));
    }

    SUBCASE("enroll, identify, verify") {
        for (int s = 0; s < 3; ++s) {
            const Run r = cli({"enroll", "--db", db, "--subject", subject_name(s), img(s, 0), img(s, 1)});
            CHECK(r.code == 0);
        }
        CHECK(store_load(db).size() == 6);
        CHECK(cli({"enroll", "--db", db, "--subject", "s000", "--eye", "R", img(0, 0)}).code == 0);
        CHECK(store_load(db).size() == 7);

        const Run id = cli({"identify", "--db", db, img(1, 1)});
        CHECK(id.code == 0);
        CHECK(id.out.rfind("s001 d_min=0.000000", 0) == 0);

        const Run rej = cli({"verify", "--db", db, "--subject", "s002", "--tau", "0", img(1, 1)});
        CHECK(rej.code == 0);
        CHECK(rej.out.rfind("reject", 0) == 0);
        const Run acc = cli({"verify", "--db", db, "--subject", "s001", img(1, 1)});
        CHECK(acc.code == 0);
        CHECK(acc.out.rfind("accept", 0) == 0);
        CHECK(cli({"verify", "--db", db, "--subject", "nobody", img(1, 1)}).code == 1);
    }

    SUBCASE("eval report is byte-identical across runs") {
        const fs::path r1 = dir / "r1.csv", r2 = dir / "r2.csv";
        CHECK(cli({"eval", "--dataset", (dir / "data").string(), "--enroll", "1", "--report", r1.string(),
                   "--localization"})
                  .code == 0);
        CHECK(cli({"eval", "--dataset", (dir / "data").string(), "--enroll", "1", "--report", r2.string(),
                   "--localization", "--threads", "1"})
                  .code == 0);
        const std::string a = slurp(r1);
        CHECK(a == slurp(r2));
        CHECK(a.find("# matching.max_shift=4") != std::string::npos);
        CHECK(a.find("metric,protocol,enroll,total,correct,accuracy\nrank1,left,1,3,") != std::string::npos);
        CHECK(a.find("localization,all,0,6,6,100.0000") != std::string::npos);
        CHECK(cli({"eval", "--dataset", (dir / "data").string(), "--enroll", "2"}).code == 1);
    }

    SUBCASE("synth and dump-stages") {
        const fs::path out = dir / "gen";
        const Run r = cli({"synth", "--count", "2", "--subjects", "2", "--out", out.string(), "--seed", "9"});
        CHECK(r.code == 0);
        const DatasetIndex g = scan_dataset(out);
        CHECK(g.entries.size() == 4);
        for (const auto& e : g.entries) CHECK(e.truth.has_value());

        const fs::path stages = dir / "stages";
        CHECK(cli({"dump-stages", img(0, 0), "--out", stages.string()}).code == 0);
        int n = 0;
        for (const auto& e : fs::directory_iterator(stages)) n += e.path().extension() == ".pgm";
        CHECK(n == 12);
    }
}
