#include "iris/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "iris/config.hpp"
#include "iris/dataset.hpp"
#include "iris/error.hpp"
#include "iris/evaluation.hpp"
#include "iris/image_io.hpp"
#include "iris/store.hpp"

namespace fs = std::filesystem;

namespace iris {

namespace {

std::string fixed(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

Eye eye_from_flag(const std::string& s) {
    if (s == "L" || s == "l" || s == "left") return Eye::Left;
    if (s == "R" || s == "r" || s == "right") return Eye::Right;
    throw Error(ErrorCode::InvalidArgument, "eye must be L or R");
}

// Linear stretch onto [0,255] for viewing signed intermediate rasters.
GrayImage stretch(const GrayImage& img) {
    const double lo = img.min(), hi = img.max();
    GrayImage out(img.width(), img.height());
    for (int r = 0; r < img.height(); ++r)
        for (int c = 0; c < img.width(); ++c) out(r, c) = hi > lo ? 255.0 * (img(r, c) - lo) / (hi - lo) : 0.0;
    return out;
}

struct Options {
    std::string config_file;
    std::vector<std::string> overrides;

    std::string image;
    std::vector<std::string> images;
    bool json = false;
    std::string overlay;
    std::string db;
    std::string subject;
    std::string eye;
    double tau = -1.0;
    std::string dataset;
    int enroll = 5;
    std::string report;
    std::string ablation;
    std::string dump;
    bool localization = false;
    int threads = 0;
    int count = 10;
    int subjects = 30;
    std::string out_dir;
    std::uint64_t seed = 1;
    bool both_eyes = false;
    double occlusion = 0.0;
    int speculars = 0;
    double noise = 2.0;
};

AppConfig effective_config(const Options& o) {
    AppConfig cfg;
    if (!o.config_file.empty()) cfg = load_config(o.config_file);
    if (!o.ablation.empty()) apply_ablation(cfg, o.ablation);
    for (const auto& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::InvalidConfig, "--set expects key=value, got " + kv);
        set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

int run_segment(const Options& o, const AppConfig& cfg, std::ostream& out) {
    const GrayImage img = load_gray(o.image);
    const Segmentation seg = segment(img, cfg.pipeline.segmentation);
    const auto& g = seg.geometry;
    if (o.json) {
        nlohmann::ordered_json j;
        j["image"] = o.image;
        j["pupil"] = {{"cx", g.pupil.cx}, {"cy", g.pupil.cy}, {"r", g.pupil.r}};
        j["limbic_r"] = g.limbic_r;
        j["flags"] = {{"refine_converged", seg.flags.refine_converged}, {"limbic_fallback", seg.flags.limbic_fallback}};
        out << j.dump(2) << '\n';
    } else {
        out << "pupil " << fixed(g.pupil.cx) << ' ' << fixed(g.pupil.cy) << ' ' << fixed(g.pupil.r) << '\n'
            << "limbic " << fixed(g.limbic_r) << '\n';
        if (seg.flags.limbic_fallback) out << "note limbic radius fell back to 3x pupil radius\n";
    }
    if (!o.overlay.empty()) {
        GrayImage ov = img;
        draw_circle(ov, g.pupil.cx, g.pupil.cy, g.pupil.r);
        draw_circle(ov, g.pupil.cx, g.pupil.cy, g.limbic_r);
        write_pgm(o.overlay, ov);
    }
    return 0;
}

TemplateStore open_store(const std::string& path, bool create) {
    if (create && !fs::exists(path)) return {};
    return store_load(path);
}

int run_enroll(const Options& o, const AppConfig& cfg, std::ostream& out) {
    const Eye eye = eye_from_flag(o.eye.empty() ? "L" : o.eye);
    TemplateStore store = open_store(o.db, true);
    // extract everything first so a bad image leaves the store untouched
    std::vector<PackedCode> codes;
    for (const auto& path : o.images) {
        const IrisTemplate t = extract_template(load_gray(path), cfg.pipeline);
        if (!t.is_standard()) throw Error(ErrorCode::LengthMismatch, "store holds 320-level templates only");
        codes.push_back(pack_template(t));
    }
    for (const auto& c : codes) store.add({o.subject, eye, store.next_sample_index(o.subject, eye), c});
    store_save(store, o.db);
    out << "enrolled " << codes.size() << " template(s) for " << o.subject << " (" << eye_letter(eye) << "); store has "
        << store.size() << " record(s)\n";
    return 0;
}

int run_identify(const Options& o, const AppConfig& cfg, std::ostream& out) {
    const TemplateStore store = open_store(o.db, false);
    std::optional<Eye> eye;
    if (!o.eye.empty()) eye = eye_from_flag(o.eye);
    const auto gallery = store.templates(std::nullopt, eye);
    if (gallery.empty()) throw Error(ErrorCode::EmptyInput, "template store is empty");
    const IrisTemplate probe = extract_template(load_gray(o.image), cfg.pipeline);
    const Identification id = identify(probe, gallery, cfg.matching);
    out << id.label << " d_min=" << fixed(id.best.d_min, 6) << " shift=" << id.best.best_shift << '\n';
    return 0;
}

int run_verify(const Options& o, const AppConfig& cfg, std::ostream& out) {
    const TemplateStore store = open_store(o.db, false);
    std::optional<Eye> eye;
    if (!o.eye.empty()) eye = eye_from_flag(o.eye);
    const auto claimed = store.templates(o.subject, eye);
    if (claimed.empty()) throw Error(ErrorCode::InvalidArgument, "subject " + o.subject + " is not enrolled");
    const double tau = o.tau >= 0.0 ? o.tau : cfg.matching.verify_threshold;
    const IrisTemplate probe = extract_template(load_gray(o.image), cfg.pipeline);
    const Verification v = verify(probe, claimed, tau, cfg.matching.max_shift);
    out << (v.accept ? "accept" : "reject") << " d_min=" << fixed(v.d_min, 6) << " tau=" << fixed(tau, 6) << '\n';
    return 0;
}

int run_eval(const Options& o, const AppConfig& cfg, std::ostream& out) {
    const DatasetIndex ds = scan_dataset(o.dataset);
    const auto t0 = std::chrono::steady_clock::now();
    const auto samples = extract_dataset(ds, cfg.pipeline, o.threads);
    const double extract_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto failed = std::count_if(samples.begin(), samples.end(), [](const EvalSample& s) { return !s.code; });

    std::vector<EyeProtocol> protocols;
    if (ds.has_eye(Eye::Left)) protocols.push_back(EyeProtocol::Left);
    if (ds.has_eye(Eye::Right)) protocols.push_back(EyeProtocol::Right);
    if (protocols.size() == 2) protocols.push_back(EyeProtocol::Both);

    std::ostringstream csv;
    csv << "# effective configuration\n";
    {
        std::istringstream cfg_lines(serialize_config(cfg));
        for (std::string line; std::getline(cfg_lines, line);) csv << "# " << line << '\n';
    }
    if (!o.ablation.empty()) csv << "# ablation=" << o.ablation << '\n';
    csv << "metric,protocol,enroll,total,correct,accuracy\n";

    out << "images " << samples.size() << " extraction failures " << failed << " (" << fixed(extract_s, 2) << " s)\n";
    for (EyeProtocol p : protocols) {
        const Rank1Report r = rank1_eval(samples, o.enroll, p, cfg.matching);
        csv << "rank1," << to_string(p) << ',' << r.enroll_n << ',' << r.probes << ',' << r.correct << ','
            << fixed(r.accuracy, 4) << '\n';
        out << "rank1 " << to_string(p) << " enroll=" << r.enroll_n << " probes=" << r.probes
            << " accuracy=" << fixed(r.accuracy, 2) << "% compare=" << fixed(r.mean_compare_us, 2) << " us\n";
        for (const auto& e : r.errors) out << "  miss " << e << '\n';
    }
    if (o.localization) {
        const LocalizationReport l = localization_eval(ds, cfg.pipeline.segmentation);
        csv << "localization,all,0," << l.images << ',' << l.correct << ',' << fixed(l.accuracy, 4) << '\n';
        out << "localization images=" << l.images << " accuracy=" << fixed(l.accuracy, 2)
            << "% mean time=" << fixed(l.mean_seconds, 4) << " s\n";
    }
    if (!o.dump.empty()) {
        distribution_dump(samples, o.dump, cfg.matching.max_shift);
        out << "distributions written to " << o.dump << '\n';
    }
    if (!o.report.empty()) {
        std::ofstream f(o.report, std::ios::binary);
        f << csv.str();
        if (!f) throw Error(ErrorCode::IoFailure, "cannot write report " + o.report);
    } else {
        out << csv.str();
    }
    return 0;
}

int run_synth(const Options& o, std::ostream& out) {
    CohortSpec cs;
    cs.subjects = o.subjects;
    cs.samples = o.count;
    cs.seed = o.seed;
    cs.both_eyes = o.both_eyes;
    cs.occlusion = o.occlusion;
    cs.specular_count = o.speculars;
    cs.noise_sigma = o.noise;
    const DatasetIndex ds = write_synthetic(cs, o.out_dir);
    out << "wrote " << ds.entries.size() << " images for " << cs.subjects << " subject(s) to " << o.out_dir << '\n';
    return 0;
}

int run_dump(const Options& o, const AppConfig& cfg, std::ostream& out) {
    const GrayImage img = load_gray(o.image);
    SegmentationTrace tr;
    const Segmentation seg = segment(img, cfg.pipeline.segmentation, &tr);
    const fs::path dir = o.out_dir;
    fs::create_directories(dir);
    const auto& g = seg.geometry;
    const auto& n = cfg.pipeline.normalization;

    GrayImage initial = img, overlay = img;
    draw_circle(initial, tr.initial.cx, tr.initial.cy, tr.initial.r);
    draw_circle(overlay, g.pupil.cx, g.pupil.cy, g.pupil.r);
    draw_circle(overlay, g.pupil.cx, g.pupil.cy, g.limbic_r);
    const PolarStrip strip = unwrap(img, g, n.radial_rows, n.angular_cols);
    const Roi roi = extract_roi(strip, n);
    const Roi enhanced = enhance_roi(roi, n.window, n.beta);

    int written = 0;
    auto put = [&](const char* name, const auto& raster) {
        write_pgm(dir / name, raster);
        ++written;
    };
    put("01_input.pgm", img);
    put("02_mask.pgm", tr.mask);
    put("03_highlighted.pgm", tr.highlighted);
    put("04_pupil_edges.pgm", tr.pupil_edges);
    put("05_initial_pupil.pgm", initial);
    put("06_filled.pgm", tr.filled);
    put("07_limbic_edges.pgm", tr.limbic_edges);
    put("08_overlay.pgm", overlay);
    put("09_polar.pgm", strip);
    put("10_roi.pgm", roi);
    put("11_enhanced.pgm", stretch(enhanced));
    put("12_compressed.pgm", stretch(compress_roi(enhanced)));
    out << "wrote " << written << " stage images to " << dir.string() << '\n';
    return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Iris segmentation, enrollment and matching toolkit", "iris_cli"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--config", o.config_file, "key=value configuration file");
    app.add_option("--set", o.overrides, "override one configuration key (key=value), repeatable")->allow_extra_args(false);

    auto* seg = app.add_subcommand("segment", "locate pupil and limbic circles");
    seg->add_option("image", o.image)->required();
    seg->add_flag("--json", o.json, "print geometry as JSON");
    seg->add_option("--overlay", o.overlay, "write the image with both circles drawn");

    auto* enroll = app.add_subcommand("enroll", "add templates for a subject to a store");
    enroll->add_option("--db", o.db)->required();
    enroll->add_option("--subject", o.subject)->required();
    enroll->add_option("--eye", o.eye, "L or R (default L)");
    enroll->add_option("images", o.images)->required();

    auto* ident = app.add_subcommand("identify", "report the best-matching enrolled subject");
    ident->add_option("--db", o.db)->required();
    ident->add_option("--eye", o.eye, "restrict the gallery to one eye");
    ident->add_option("image", o.image)->required();

    auto* ver = app.add_subcommand("verify", "accept or reject a claimed identity");
    ver->add_option("--db", o.db)->required();
    ver->add_option("--subject", o.subject)->required();
    ver->add_option("--tau", o.tau, "acceptance threshold on d_min (default matching.tau)")->check(CLI::NonNegativeNumber);
    ver->add_option("--eye", o.eye, "restrict the claim to one eye");
    ver->add_option("image", o.image)->required();

    auto* ev = app.add_subcommand("eval", "rank-1 identification over a dataset directory");
    ev->add_option("--dataset", o.dataset)->required();
    ev->add_option("--enroll", o.enroll, "images enrolled per subject")->check(CLI::PositiveNumber);
    ev->add_option("--report", o.report, "CSV report path");
    ev->add_option("--ablation", o.ablation)->check(CLI::IsMember(ablation_names()));
    ev->add_option("--dump", o.dump, "directory for intra/inter distance CSVs");
    ev->add_flag("--localization", o.localization, "also score segmentation against .circles sidecars");
    ev->add_option("--threads", o.threads, "extraction workers (0 = all cores)")->check(CLI::NonNegativeNumber);

    auto* syn = app.add_subcommand("synth", "render a synthetic cohort with ground truth");
    syn->add_option("--count", o.count, "images per subject and eye")->check(CLI::PositiveNumber);
    syn->add_option("--subjects", o.subjects)->check(CLI::PositiveNumber);
    syn->add_option("--out", o.out_dir)->required();
    syn->add_option("--seed", o.seed);
    syn->add_flag("--both-eyes", o.both_eyes);
    syn->add_option("--occlusion", o.occlusion)->check(CLI::Range(0.0, 0.99));
    syn->add_option("--speculars", o.speculars)->check(CLI::NonNegativeNumber);
    syn->add_option("--noise", o.noise)->check(CLI::NonNegativeNumber);

    auto* dump = app.add_subcommand("dump-stages", "write every intermediate raster for one image");
    dump->add_option("image", o.image)->required();
    dump->add_option("--out", o.out_dir)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*syn) return run_synth(o, out);
        const AppConfig cfg = effective_config(o);
        if (*seg) return run_segment(o, cfg, out);
        if (*enroll) return run_enroll(o, cfg, out);
        if (*ident) return run_identify(o, cfg, out);
        if (*ver) return run_verify(o, cfg, out);
        if (*ev) return run_eval(o, cfg, out);
        if (*dump) return run_dump(o, cfg, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace iris
