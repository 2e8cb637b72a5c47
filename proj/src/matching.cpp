#include "iris/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "iris/error.hpp"

namespace iris {

void MatchConfig::validate() const {
    if (max_shift < 0) throw Error(ErrorCode::InvalidConfig, "max_shift must be >= 0");
    if (A < 1 || A > K) throw Error(ErrorCode::InvalidConfig, "AKNN needs 1 <= A <= K");
    if (!(verify_threshold >= 0.0)) throw Error(ErrorCode::InvalidConfig, "verify threshold must be >= 0");
}

double abs_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "feature sequences differ in length");
    long sum = 0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(int(a[i]) - int(b[i]));
    return double(sum);
}

double abs_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "feature sequences differ in length");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
    return sum;
}

MatchScore semi_correlation(const IrisTemplate& a, const IrisTemplate& b, int max_shift) {
    if (a.levels.size() != b.levels.size() || a.segments != b.segments || a.levels.empty()) {
        throw Error(ErrorCode::LengthMismatch, "templates differ in shape");
    }
    if (max_shift < 0) throw Error(ErrorCode::InvalidArgument, "max_shift must be >= 0");
    const int len = static_cast<int>(a.segment_length());
    const int segs = a.segments;
    const std::uint8_t* pa = a.levels.data();
    const std::uint8_t* pb = b.levels.data();

    MatchScore best{std::numeric_limits<double>::infinity(), 0, 0};
    long best_sum = std::numeric_limits<long>::max();
    // visit 0, -1, +1, -2, +2, ... so strict improvement keeps the smallest |s|
    for (int step = 0; step <= 2 * max_shift; ++step) {
        const int s = (step % 2 == 0) ? step / 2 : -(step + 1) / 2;
        const int s_mod = ((s % len) + len) % len;
        long sum = 0;
        for (int seg = 0; seg < segs; ++seg) {
            const std::uint8_t* ra = pa + std::size_t(seg) * len;
            const std::uint8_t* rb = pb + std::size_t(seg) * len;
            for (int j = 0; j < len; ++j) {
                int k = j + s_mod;
                if (k >= len) k -= len;
                sum += std::abs(int(ra[j]) - int(rb[k]));
            }
        }
        if (sum < best_sum) {
            best_sum = sum;
            best.best_shift = s;
        }
    }
    best.d_min = double(best_sum) / double(a.levels.size());
    return best;
}

GrayImage cross_correlation(const GrayImage& a, const GrayImage& b) {
    if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyInput, "cross_correlation of an empty matrix");
    const int ma = a.height(), na = a.width(), mb = b.height(), nb = b.width();
    GrayImage out(na + nb - 1, ma + mb - 1);
    for (int i = 0; i < out.height(); ++i) {
        for (int j = 0; j < out.width(); ++j) {
            const int oi = i - (ma - 1);
            const int oj = j - (na - 1);
            double acc = 0.0;
            for (int m = std::max(0, -oi); m < ma && m + oi < mb; ++m)
                for (int n = std::max(0, -oj); n < na && n + oj < nb; ++n) acc += a(m, n) * b(m + oi, n + oj);
            out(i, j) = acc;
        }
    }
    return out;
}

std::string aknn_decide(std::vector<LabeledScore> scores, int K, int A) {
    if (scores.empty()) throw Error(ErrorCode::EmptyInput, "no scores to decide on");
    if (K < 1 || A < 1) throw Error(ErrorCode::InvalidArgument, "K and A must be positive");
    std::stable_sort(scores.begin(), scores.end(),
                     [](const LabeledScore& x, const LabeledScore& y) { return x.d_min < y.d_min; });
    const std::size_t top = std::min<std::size_t>(std::size_t(K), scores.size());
    // labels in order of first appearance, i.e. by their nearest distance
    std::vector<std::pair<std::string, int>> counts;
    for (std::size_t i = 0; i < top; ++i) {
        auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return c.first == scores[i].label; });
        if (it == counts.end()) counts.emplace_back(scores[i].label, 1);
        else ++it->second;
    }
    const std::pair<std::string, int>* winner = nullptr;
    for (const auto& c : counts)
        if (c.second >= A && (!winner || c.second > winner->second)) winner = &c;
    return winner ? winner->first : scores.front().label;
}

Identification identify(const IrisTemplate& probe, std::span<const IrisTemplate> gallery, const MatchConfig& cfg) {
    if (gallery.empty()) throw Error(ErrorCode::EmptyInput, "empty gallery");
    std::vector<MatchScore> scores(gallery.size());
    std::vector<LabeledScore> labeled(gallery.size());
    for (std::size_t i = 0; i < gallery.size(); ++i) {
        scores[i] = semi_correlation(probe, gallery[i], cfg.max_shift);
        scores[i].gallery_ref = i;
        labeled[i] = {gallery[i].subject_id, scores[i].d_min};
    }
    Identification out;
    out.label = aknn_decide(labeled, cfg.K, cfg.A);

    std::vector<MatchScore> ranked = scores;
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const MatchScore& x, const MatchScore& y) { return x.d_min < y.d_min; });
    for (const MatchScore& s : ranked) {
        if (gallery[s.gallery_ref].subject_id == out.label) {
            out.best = s;
            break;
        }
    }
    ranked.resize(std::min<std::size_t>(ranked.size(), std::size_t(std::max(cfg.K, 1))));
    out.ranked = std::move(ranked);
    return out;
}

Verification verify(const IrisTemplate& probe, std::span<const IrisTemplate> claimed, double tau, int max_shift) {
    if (claimed.empty()) throw Error(ErrorCode::EmptyInput, "no enrolled templates for the claimed identity");
    Verification out{false, std::numeric_limits<double>::infinity()};
    for (const IrisTemplate& t : claimed) out.d_min = std::min(out.d_min, semi_correlation(probe, t, max_shift).d_min);
    out.accept = out.d_min <= tau;
    return out;
}

}  // namespace iris
