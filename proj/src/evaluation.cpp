#include "iris/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "iris/error.hpp"
#include "iris/image_io.hpp"

namespace iris {

DisResult dis_criterion(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
    if (a.size() < 2 || b.size() < 2) throw Error(ErrorCode::ClassTooSmall, "each class needs at least 2 vectors");
    const std::size_t n = a.front().size();
    if (n == 0) throw Error(ErrorCode::EmptyInput, "empty feature vectors");
    auto check = [n](const std::vector<std::vector<double>>& cls) {
        for (const auto& v : cls)
            if (v.size() != n) throw Error(ErrorCode::LengthMismatch, "feature vectors differ in length");
    };
    check(a);
    check(b);

    auto moments = [](const std::vector<std::vector<double>>& cls, std::size_t i) {
        double mean = 0.0;
        for (const auto& v : cls) mean += v[i];
        mean /= static_cast<double>(cls.size());
        double var = 0.0;
        for (const auto& v : cls) var += (v[i] - mean) * (v[i] - mean);
        return std::pair{mean, var / static_cast<double>(cls.size())};
    };

    DisResult r;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto [ma, va] = moments(a, i);
        const auto [mb, vb] = moments(b, i);
        const double prod = va * vb;
        if (prod < 1e-12) {
            ++r.degenerate;
            continue;
        }
        sum += (ma - mb) * (ma - mb) / prod;
        ++r.used;
    }
    if (r.used == 0) throw Error(ErrorCode::AllFeaturesDegenerate, "every feature has zero within-class variance");
    r.dis = sum / static_cast<double>(r.used);
    return r;
}

NormalizationConfig region_config(Region r, const NormalizationConfig& base) {
    NormalizationConfig c = base;
    c.full_iris = false;
    switch (r) {
    case Region::A:
        break;
    case Region::B:  // upper half of the angular axis, same radial band as the ROI
        c.roi_first_col = base.angular_cols / 2;
        c.roi_cols = base.angular_cols - base.angular_cols / 2;
        break;
    case Region::C:  // remaining outer rows under the ROI columns
        c.roi_first_row = base.roi_first_row + base.roi_rows;
        c.roi_rows = base.radial_rows - c.roi_first_row;
        if (c.compress && c.roi_rows % 2) --c.roi_rows;
        break;
    }
    c.validate();
    return c;
}

RegionSample region_features(const GrayImage& img, const PipelineConfig& cfg) {
    const Segmentation seg = segment(img, cfg.segmentation);
    const auto& n = cfg.normalization;
    const PolarStrip strip = unwrap(img, seg.geometry, n.radial_rows, n.angular_cols);
    RegionSample s;
    for (int r = 0; r < 3; ++r)
        s.features[r] = roi_features(prepare_roi(strip, region_config(static_cast<Region>(r), n)), cfg);
    return s;
}

RegionReport region_information_report(const std::vector<RegionSample>& samples) {
    std::map<std::string, std::vector<const RegionSample*>> classes;
    for (const auto& s : samples) classes[s.subject].push_back(&s);
    if (classes.size() < 2) throw Error(ErrorCode::ClassTooSmall, "need at least 2 subjects");

    std::vector<std::array<std::vector<std::vector<double>>, 3>> grouped;
    for (const auto& [name, members] : classes) {
        auto& g = grouped.emplace_back();
        for (const RegionSample* m : members)
            for (int r = 0; r < 3; ++r) g[r].push_back(m->features[r]);
    }

    RegionReport rep;
    for (std::size_t i = 0; i < grouped.size(); ++i)
        for (std::size_t j = i + 1; j < grouped.size(); ++j) {
            ++rep.class_pairs;
            for (int r = 0; r < 3; ++r) {
                const DisResult d = dis_criterion(grouped[i][r], grouped[j][r]);
                rep.sum_dis[r] += d.dis;
                rep.degenerate[r] += d.degenerate;
            }
        }
    if (!(rep.sum_dis[0] > 0.0)) throw Error(ErrorCode::DegenerateInput, "region A carries no class separation");
    for (int r = 0; r < 3; ++r) {
        rep.distinct_pct[r] = 100.0 * rep.sum_dis[r] / rep.sum_dis[0];
        rep.non_distinct_pct[r] = 100.0 - rep.distinct_pct[r];
    }
    return rep;
}

RegionReport region_information_report(const DatasetIndex& dataset, const PipelineConfig& cfg) {
    std::vector<RegionSample> samples;
    for (const auto& e : dataset.entries) {
        try {
            RegionSample s = region_features(load_gray(e.path), cfg);
            s.subject = e.subject + "/" + eye_letter(e.eye);
            samples.push_back(std::move(s));
        } catch (const Error& err) {
            if (err.code() == ErrorCode::FileNotFound) throw;
        }
    }
    return region_information_report(samples);
}

// ---- identification ----

const char* to_string(EyeProtocol p) {
    switch (p) {
    case EyeProtocol::Left: return "left";
    case EyeProtocol::Right: return "right";
    case EyeProtocol::Both: return "both";
    }
    return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

// subject -> samples ordered by index, for one eye
std::map<std::string, std::vector<const EvalSample*>> by_subject(const std::vector<EvalSample>& samples, Eye eye) {
    std::map<std::string, std::vector<const EvalSample*>> out;
    for (const auto& s : samples)
        if (s.eye == eye) out[s.subject].push_back(&s);
    for (auto& [k, v] : out)
        std::stable_sort(v.begin(), v.end(), [](const EvalSample* a, const EvalSample* b) { return a->index < b->index; });
    return out;
}

void require_depth(const std::map<std::string, std::vector<const EvalSample*>>& groups, int enroll_n) {
    for (const auto& [subject, v] : groups)
        if (static_cast<int>(v.size()) <= enroll_n)
            throw Error(ErrorCode::InsufficientImages,
                        "subject " + subject + " has " + std::to_string(v.size()) + " images, needs more than " +
                            std::to_string(enroll_n));
}

std::string sample_name(const EvalSample& s) {
    return s.subject + "/" + eye_letter(s.eye) + "#" + std::to_string(s.index);
}

void finish(Rank1Report& rep, double seconds, std::size_t comparisons) {
    rep.accuracy = rep.probes > 0 ? 100.0 * rep.correct / rep.probes : 0.0;
    rep.mean_compare_us = comparisons > 0 ? 1e6 * seconds / static_cast<double>(comparisons) : 0.0;
}

}  // namespace

Rank1Report rank1_eval(const std::vector<EvalSample>& samples, int enroll_n, EyeProtocol protocol,
                       const MatchConfig& mcfg) {
    if (enroll_n < 1) throw Error(ErrorCode::InvalidArgument, "enroll_n must be >= 1");
    mcfg.validate();
    Rank1Report rep;
    rep.protocol = protocol;
    rep.enroll_n = enroll_n;
    double seconds = 0.0;
    std::size_t comparisons = 0;

    if (protocol != EyeProtocol::Both) {
        const Eye eye = protocol == EyeProtocol::Left ? Eye::Left : Eye::Right;
        const auto groups = by_subject(samples, eye);
        if (groups.empty()) throw Error(ErrorCode::InsufficientImages, std::string("no ") + to_string(protocol) + " eyes");
        require_depth(groups, enroll_n);
        std::vector<IrisTemplate> gallery;
        for (const auto& [subject, v] : groups)
            for (int i = 0; i < enroll_n; ++i)
                if (v[i]->code) {
                    gallery.push_back(*v[i]->code);
                    gallery.back().subject_id = subject;
                }
        if (gallery.empty()) throw Error(ErrorCode::InsufficientImages, "no enrollable templates");
        for (const auto& [subject, v] : groups)
            for (std::size_t i = enroll_n; i < v.size(); ++i) {
                ++rep.probes;
                if (!v[i]->code) {
                    rep.errors.push_back(sample_name(*v[i]) + " -> failed " + v[i]->failure);
                    continue;
                }
                const auto t0 = Clock::now();
                const Identification id = identify(*v[i]->code, gallery, mcfg);
                seconds += std::chrono::duration<double>(Clock::now() - t0).count();
                comparisons += gallery.size();
                if (id.label == subject)
                    ++rep.correct;
                else
                    rep.errors.push_back(sample_name(*v[i]) + " -> " + id.label);
            }
        finish(rep, seconds, comparisons);
        return rep;
    }

    auto left = by_subject(samples, Eye::Left);
    auto right = by_subject(samples, Eye::Right);
    std::vector<std::string> subjects;
    for (const auto& [s, v] : left)
        if (right.count(s)) subjects.push_back(s);
    if (subjects.empty()) throw Error(ErrorCode::InsufficientImages, "no subject has both eyes");
    for (const auto& s : subjects) {
        require_depth({{s, left[s]}}, enroll_n);
        require_depth({{s, right[s]}}, enroll_n);
    }

    const double inf = std::numeric_limits<double>::infinity();
    auto best_of = [&](const IrisTemplate* probe, const std::vector<const EvalSample*>& enrolled) {
        double best = inf;
        if (!probe) return best;
        for (int i = 0; i < enroll_n; ++i) {
            if (!enrolled[i]->code) continue;
            best = std::min(best, semi_correlation(*probe, *enrolled[i]->code, mcfg.max_shift).d_min);
            ++comparisons;
        }
        return best;
    };

    for (const auto& s : subjects) {
        std::map<int, const EvalSample*> rmap;
        for (const EvalSample* r : right[s]) rmap[r->index] = r;
        for (std::size_t i = enroll_n; i < left[s].size(); ++i) {
            const EvalSample* l = left[s][i];
            const auto it = rmap.find(l->index);
            if (it == rmap.end()) continue;  // unpaired capture
            const EvalSample* r = it->second;
            ++rep.probes;
            const IrisTemplate* pl = l->code ? &*l->code : nullptr;
            const IrisTemplate* pr = r->code ? &*r->code : nullptr;
            if (!pl && !pr) {
                rep.errors.push_back(sample_name(*l) + " -> failed " + l->failure);
                continue;
            }
            const auto t0 = Clock::now();
            std::string decided;
            double best = inf;
            for (const auto& g : subjects) {
                const double fused = std::min(best_of(pl, left[g]), best_of(pr, right[g]));
                if (fused < best) {
                    best = fused;
                    decided = g;
                }
            }
            seconds += std::chrono::duration<double>(Clock::now() - t0).count();
            if (decided == s)
                ++rep.correct;
            else
                rep.errors.push_back(sample_name(*l) + " -> " + decided);
        }
    }
    finish(rep, seconds, comparisons);
    return rep;
}

std::vector<EvalSample> extract_dataset(const DatasetIndex& dataset, const PipelineConfig& cfg, int threads) {
    cfg.validate();
    std::vector<EvalSample> out(dataset.entries.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < out.size(); i = next++) {
            const DatasetEntry& e = dataset.entries[i];
            EvalSample& s = out[i];
            s.subject = e.subject;
            s.eye = e.eye;
            s.index = e.index;
            try {
                IrisTemplate t = extract_template(load_gray(e.path), cfg);
                t.subject_id = e.subject;
                t.eye = e.eye;
                s.code = std::move(t);
            } catch (const Error& err) {
                s.failure = (err.stage().empty() ? "" : err.stage() + ":") + std::string(to_string(err.code()));
            }
        }
    };
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min<int>(threads, static_cast<int>(std::max<std::size_t>(1, out.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return out;
}

Rank1Report rank1_eval(const DatasetIndex& dataset, int enroll_n, EyeProtocol protocol, const PipelineConfig& cfg,
                       const MatchConfig& mcfg) {
    return rank1_eval(extract_dataset(dataset, cfg), enroll_n, protocol, mcfg);
}

// ---- localization ----

AnnulusCheck compare_annulus(const IrisGeometry& truth, const IrisGeometry& predicted, double tolerance_pct) {
    auto inside = [](const IrisGeometry& g, double x, double y) {
        const double d = std::hypot(x - g.pupil.cx, y - g.pupil.cy);
        return d >= g.pupil.r && d <= g.limbic_r;
    };
    const int x0 = static_cast<int>(std::floor(std::min(truth.pupil.cx - truth.limbic_r, predicted.pupil.cx - predicted.limbic_r)));
    const int x1 = static_cast<int>(std::ceil(std::max(truth.pupil.cx + truth.limbic_r, predicted.pupil.cx + predicted.limbic_r)));
    const int y0 = static_cast<int>(std::floor(std::min(truth.pupil.cy - truth.limbic_r, predicted.pupil.cy - predicted.limbic_r)));
    const int y1 = static_cast<int>(std::ceil(std::max(truth.pupil.cy + truth.limbic_r, predicted.pupil.cy + predicted.limbic_r)));
    std::size_t t_area = 0, foreign = 0, lost = 0;
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const bool t = inside(truth, x, y), p = inside(predicted, x, y);
            t_area += t;
            foreign += p && !t;
            lost += t && !p;
        }
    if (t_area == 0) throw Error(ErrorCode::DegenerateInput, "ground-truth annulus covers no pixels");
    AnnulusCheck c;
    c.foreign_pct = 100.0 * static_cast<double>(foreign) / static_cast<double>(t_area);
    c.lost_pct = 100.0 * static_cast<double>(lost) / static_cast<double>(t_area);
    c.ok = c.foreign_pct <= tolerance_pct && c.lost_pct <= tolerance_pct;
    return c;
}

LocalizationReport localization_eval(const DatasetIndex& dataset, const SegmentationConfig& cfg) {
    LocalizationReport rep;
    double seconds = 0.0;
    for (const auto& e : dataset.entries) {
        if (!e.truth) continue;
        ++rep.images;
        const GrayImage img = load_gray(e.path);
        const auto t0 = Clock::now();
        try {
            const Segmentation seg = segment(img, cfg);
            seconds += std::chrono::duration<double>(Clock::now() - t0).count();
            const AnnulusCheck c = compare_annulus(*e.truth, seg.geometry);
            if (c.ok)
                ++rep.correct;
            else
                rep.errors.push_back(e.path.filename().string());
        } catch (const Error& err) {
            seconds += std::chrono::duration<double>(Clock::now() - t0).count();
            rep.errors.push_back(e.path.filename().string() + " (" + std::string(to_string(err.code())) + ")");
        }
    }
    if (rep.images == 0) throw Error(ErrorCode::MissingGroundTruth, "no .circles annotations under " + dataset.root.string());
    rep.accuracy = 100.0 * rep.correct / rep.images;
    rep.mean_seconds = seconds / rep.images;
    return rep;
}

// ---- distance distributions ----

Histogram make_histogram(const std::vector<double>& intra, const std::vector<double>& inter, int bins) {
    if (bins < 1) throw Error(ErrorCode::InvalidArgument, "need at least one bin");
    Histogram h;
    for (double d : intra) h.max = std::max(h.max, d);
    for (double d : inter) h.max = std::max(h.max, d);
    h.intra.assign(bins, 0);
    h.inter.assign(bins, 0);
    auto bin = [&](double d) {
        if (!(h.max > 0.0)) return 0;
        return std::min(bins - 1, static_cast<int>(std::floor(d / h.max * bins)));
    };
    for (double d : intra) ++h.intra[bin(d)];
    for (double d : inter) ++h.inter[bin(d)];
    return h;
}

Distribution distance_distribution(const std::vector<EvalSample>& samples, int max_shift) {
    std::vector<const EvalSample*> valid;
    for (const auto& s : samples)
        if (s.code) valid.push_back(&s);
    std::map<std::pair<std::string, Eye>, int> classes;
    for (const EvalSample* s : valid) ++classes[{s->subject, s->eye}];
    if (classes.size() < 2) throw Error(ErrorCode::ClassTooSmall, "need at least 2 classes");

    Distribution d;
    for (std::size_t i = 0; i < valid.size(); ++i)
        for (std::size_t j = i + 1; j < valid.size(); ++j) {
            const double v = semi_correlation(*valid[i]->code, *valid[j]->code, max_shift).d_min;
            const bool same = valid[i]->subject == valid[j]->subject && valid[i]->eye == valid[j]->eye;
            (same ? d.intra : d.inter).push_back(v);
        }
    d.histogram = make_histogram(d.intra, d.inter);
    return d;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string histogram_csv(const Histogram& h) {
    std::ostringstream out;
    out << "bin,lo,hi,intra,inter\n";
    const std::size_t bins = h.intra.size();
    for (std::size_t b = 0; b < bins; ++b) {
        const double lo = h.max * static_cast<double>(b) / static_cast<double>(bins);
        const double hi = h.max * static_cast<double>(b + 1) / static_cast<double>(bins);
        out << b << ',' << fmt(lo) << ',' << fmt(hi) << ',' << h.intra[b] << ',' << h.inter[b] << '\n';
    }
    return out.str();
}

Histogram parse_histogram_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "bin,lo,hi,intra,inter")
        throw Error(ErrorCode::CorruptFormat, "missing histogram header");
    Histogram h;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t bin = 0, intra = 0, inter = 0;
        double lo = 0.0, hi = 0.0;
        if (std::sscanf(line.c_str(), "%zu,%lf,%lf,%zu,%zu", &bin, &lo, &hi, &intra, &inter) != 5 ||
            bin != h.intra.size())
            throw Error(ErrorCode::CorruptFormat, "bad histogram row: " + line);
        h.intra.push_back(intra);
        h.inter.push_back(inter);
        h.max = hi;
    }
    if (h.intra.empty()) throw Error(ErrorCode::CorruptFormat, "histogram without bins");
    return h;
}

std::string distances_csv(const Distribution& d) {
    std::ostringstream out;
    out << "kind,d_min\n";
    for (double v : d.intra) out << "intra," << fmt(v) << '\n';
    for (double v : d.inter) out << "inter," << fmt(v) << '\n';
    return out.str();
}

void distribution_dump(const std::vector<EvalSample>& samples, const std::filesystem::path& dir, int max_shift) {
    const Distribution d = distance_distribution(samples, max_shift);
    std::filesystem::create_directories(dir);
    auto write = [&](const char* name, const std::string& body) {
        std::ofstream out(dir / name, std::ios::binary);
        out << body;
        if (!out) throw Error(ErrorCode::IoFailure, std::string("cannot write ") + name);
    };
    write("distances.csv", distances_csv(d));
    write("histogram.csv", histogram_csv(d.histogram));
}

}  // namespace iris
