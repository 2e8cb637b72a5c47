#include "iris/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "iris/error.hpp"

namespace iris {

void SegmentationConfig::validate() const {
    if (!(a_fraction > 0.0 && a_fraction < 1.0)) throw Error(ErrorCode::InvalidConfig, "a_fraction must be in (0,1)");
    if (!(threshold_T > 200.0 && threshold_T <= 256.0)) {
        throw Error(ErrorCode::InvalidConfig, "threshold_T must be in (200,256]");
    }
    if (!(canny.sigma > 0.0) || !(canny.low_ratio > 0.0) || !(canny.low_ratio < canny.high_ratio) ||
        !(canny.high_ratio <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "canny requires sigma > 0 and 0 < low < high <= 1");
    }
    if (max_refine_iters < 0) throw Error(ErrorCode::InvalidConfig, "max_refine_iters must be >= 0");
    if (!(fill_multiplier > 0.0)) throw Error(ErrorCode::InvalidConfig, "fill_multiplier must be positive");
    if (!(refine_margin >= 0.0)) throw Error(ErrorCode::InvalidConfig, "refine_margin must be >= 0");
}

GrayImage weighted_mask(const GrayImage& img, double a_fraction) {
    if (img.empty()) throw Error(ErrorCode::EmptyInput, "weighted_mask on empty image");
    const int h = img.height();
    const int w = img.width();
    std::vector<double> row_mean(h, 0.0);
    std::vector<double> col_mean(w, 0.0);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            row_mean[r] += img(r, c);
            col_mean[c] += img(r, c);
        }
    }
    for (double& v : row_mean) v /= w;
    for (double& v : col_mean) v /= h;
    const double a = a_fraction * img.mean();
    GrayImage mask(w, h);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) mask(r, c) = 0.5 * a * (row_mean[r] + col_mean[c]);
    return mask;
}

GrayImage highlight_pupil(const GrayImage& img, const GrayImage& mask, double threshold_T) {
    if (img.width() != mask.width() || img.height() != mask.height()) {
        throw Error(ErrorCode::DimensionMismatch, "image and mask sizes differ");
    }
    if (!(threshold_T > 200.0 && threshold_T <= 256.0)) {
        throw Error(ErrorCode::InvalidArgument, "threshold_T must be in (200,256]");
    }
    GrayImage out(img.width(), img.height());
    for (std::size_t i = 0; i < out.data().size(); ++i) {
        const double v = img.data()[i] + mask.data()[i];
        out.data()[i] = v < threshold_T ? v : threshold_T;
    }
    return out;
}

namespace {

constexpr double kParallelTol = 1e-9;

// Intersection of two non-vertical lines through m1, m2 with slopes s1, s2.
Point intersect_slopes(Point m1, double s1, Point m2, double s2) {
    if (std::abs(s1 - s2) < kParallelTol) throw Error(ErrorCode::ParallelBisectors, "chord bisectors are parallel");
    const double x = (m2.y - m1.y - s2 * m2.x + s1 * m1.x) / (s1 - s2);
    return {x, s1 * (x - m1.x) + m1.y};
}

}  // namespace

Point chord_center(Point p1, Point p2, Point p3, Point p4) {
    const double dx1 = p2.x - p1.x, dy1 = p2.y - p1.y;
    const double dx2 = p4.x - p3.x, dy2 = p4.y - p3.y;
    if ((dx1 == 0.0 && dy1 == 0.0) || (dx2 == 0.0 && dy2 == 0.0)) {
        throw Error(ErrorCode::DegenerateInput, "chord endpoints coincide");
    }
    const Point m1{0.5 * (p1.x + p2.x), 0.5 * (p1.y + p2.y)};
    const Point m2{0.5 * (p3.x + p4.x), 0.5 * (p3.y + p4.y)};

    // Bisector slope is -dx/dy in the image frame and -dy/dx in the frame with
    // x and y swapped; use whichever frame keeps both slopes finite and small.
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double cost_plain = (dy1 != 0.0 && dy2 != 0.0) ? std::max(std::abs(dx1 / dy1), std::abs(dx2 / dy2)) : inf;
    const double cost_swap = (dx1 != 0.0 && dx2 != 0.0) ? std::max(std::abs(dy1 / dx1), std::abs(dy2 / dx2)) : inf;

    if (cost_plain == inf && cost_swap == inf) {
        // One chord is axis-aligned in each frame: its bisector is axis-aligned too.
        if (dy1 == 0.0 && dx2 == 0.0) return {m1.x, m2.y};
        if (dx1 == 0.0 && dy2 == 0.0) return {m2.x, m1.y};
        throw Error(ErrorCode::ParallelBisectors, "chord bisectors are parallel");
    }
    if (cost_plain <= cost_swap) return intersect_slopes(m1, -dx1 / dy1, m2, -dx2 / dy2);
    const Point s = intersect_slopes({m1.y, m1.x}, -dy1 / dx1, {m2.y, m2.x}, -dy2 / dx2);
    return {s.y, s.x};
}

namespace {

struct Pixel {
    int row;
    int col;
};

std::vector<Pixel> largest_component(const EdgeMap& edges) {
    const int h = edges.height();
    const int w = edges.width();
    std::vector<std::uint8_t> seen(std::size_t(w) * h, 0);
    std::vector<Pixel> best;
    std::vector<Pixel> current;
    std::vector<Pixel> stack;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!edges(r, c) || seen[std::size_t(r) * w + c]) continue;
            current.clear();
            stack.push_back({r, c});
            seen[std::size_t(r) * w + c] = 1;
            while (!stack.empty()) {
                const Pixel p = stack.back();
                stack.pop_back();
                current.push_back(p);
                for (int dr = -1; dr <= 1; ++dr) {
                    for (int dc = -1; dc <= 1; ++dc) {
                        const int nr = p.row + dr;
                        const int nc = p.col + dc;
                        if (nr < 0 || nc < 0 || nr >= h || nc >= w) continue;
                        if (!edges(nr, nc) || seen[std::size_t(nr) * w + nc]) continue;
                        seen[std::size_t(nr) * w + nc] = 1;
                        stack.push_back({nr, nc});
                    }
                }
            }
            if (current.size() > best.size()) best = current;
        }
    }
    return best;
}

// Middle element (by the secondary coordinate) of the pixels extreme in key.
template <typename Key, typename Secondary>
Point extreme_point(const std::vector<Pixel>& pts, Key key, Secondary secondary) {
    int target = key(pts.front());
    for (const Pixel& p : pts) target = std::min(target, key(p));
    std::vector<Pixel> ties;
    for (const Pixel& p : pts)
        if (key(p) == target) ties.push_back(p);
    std::sort(ties.begin(), ties.end(), [&](const Pixel& a, const Pixel& b) { return secondary(a) < secondary(b); });
    const Pixel& mid = ties[ties.size() / 2];
    return {double(mid.col), double(mid.row)};
}

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

PupilCircle estimate_pupil(const EdgeMap& edges) {
    const std::vector<Pixel> comp = largest_component(edges);
    if (comp.size() < 5) throw Error(ErrorCode::TooFewEdgePoints, "need at least 5 connected edge pixels");

    Point centroid{};
    int min_x = comp.front().col, max_x = min_x, min_y = comp.front().row, max_y = min_y;
    for (const Pixel& p : comp) {
        centroid.x += p.col;
        centroid.y += p.row;
        min_x = std::min(min_x, p.col);
        max_x = std::max(max_x, p.col);
        min_y = std::min(min_y, p.row);
        max_y = std::max(max_y, p.row);
    }
    centroid.x /= double(comp.size());
    centroid.y /= double(comp.size());

    const auto row_of = [](const Pixel& p) { return p.row; };
    const auto col_of = [](const Pixel& p) { return p.col; };
    std::array<Point, 5> pts{
        extreme_point(comp, col_of, row_of),                                   // leftmost
        extreme_point(comp, [](const Pixel& p) { return -p.col; }, row_of),    // rightmost
        extreme_point(comp, row_of, col_of),                                   // topmost
        extreme_point(comp, [](const Pixel& p) { return -p.row; }, col_of),    // bottommost
        Point{},
    };
    // fifth point: closest to the 45 degree ray (down-right in image coordinates)
    double best_gap = std::numeric_limits<double>::infinity();
    for (const Pixel& p : comp) {
        const double angle = std::atan2(p.row - centroid.y, p.col - centroid.x);
        const double gap = std::abs(angle - std::numbers::pi / 4.0);
        if (gap < best_gap) {
            best_gap = gap;
            pts[4] = {double(p.col), double(p.row)};
        }
    }

    struct Chord {
        Point a;
        Point b;
    };
    std::vector<Chord> chords;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            if (distance(pts[i], pts[j]) > 0.0) chords.push_back({pts[i], pts[j]});

    // Chord pairs closer than ~15 degrees to parallel amplify pixel quantization
    // into large center errors; they are treated like the exactly parallel case.
    constexpr double kMinSine = 0.25;
    Point sum{};
    int count = 0;
    for (std::size_t i = 0; i < chords.size(); ++i) {
        for (std::size_t j = i + 1; j < chords.size(); ++j) {
            const Chord& u = chords[i];
            const Chord& v = chords[j];
            const double ux = u.b.x - u.a.x, uy = u.b.y - u.a.y;
            const double vx = v.b.x - v.a.x, vy = v.b.y - v.a.y;
            const double sine = std::abs(ux * vy - uy * vx) / (std::hypot(ux, uy) * std::hypot(vx, vy));
            if (sine < kMinSine) continue;
            Point c;
            try {
                c = chord_center(u.a, u.b, v.a, v.b);
            } catch (const Error&) {
                continue;
            }
            if (c.x < min_x || c.x > max_x || c.y < min_y || c.y > max_y) continue;
            sum.x += c.x;
            sum.y += c.y;
            ++count;
        }
    }
    if (count == 0) throw Error(ErrorCode::AllChordsDegenerate, "no usable chord pair");
    const Point center{sum.x / count, sum.y / count};
    double radius = 0.0;
    for (const Point& p : pts) radius += distance(center, p);
    radius /= double(pts.size());
    return {center.x, center.y, radius};
}

namespace {

// Median intensity along an arc of the given radius, +-30 degrees around angle.
double rim_level(const GrayImage& img, double cx, double cy, double radius, double angle_deg) {
    std::vector<double> samples;
    for (int d = -30; d <= 30; d += 2) {
        const double t = (angle_deg + d) * std::numbers::pi / 180.0;
        samples.push_back(img.bilinear(cx + radius * std::cos(t), cy + radius * std::sin(t)));
    }
    std::nth_element(samples.begin(), samples.begin() + samples.size() / 2, samples.end());
    return samples[samples.size() / 2];
}

PupilCircle keep_inside(PupilCircle c, const GrayImage& img) {
    c.r = std::clamp(c.r, 1.0, 0.5 * (std::min(img.width(), img.height()) - 1));
    c.cx = std::clamp(c.cx, c.r, img.width() - 1 - c.r);
    c.cy = std::clamp(c.cy, c.r, img.height() - 1 - c.r);
    return c;
}

}  // namespace

RefineResult refine_pupil(const GrayImage& img, const PupilCircle& c, double pupil_mean, const SegmentationConfig& cfg) {
    constexpr double kRimOffset = 1.0;
    const double level = pupil_mean + cfg.refine_margin;
    const auto bright = [&](double v) { return v > level; };
    const auto dark = [&](double v) { return v < level; };

    RefineResult res{keep_inside(c, img), false, 0};
    for (int it = 0; it < cfg.max_refine_iters; ++it) {
        const PupilCircle& k = res.circle;
        const double rin = std::max(0.5, k.r - kRimOffset);
        const double rout = k.r + kRimOffset;
        // angles: 0 right, 90 down, 180 left, 270 up
        const double up_in = rim_level(img, k.cx, k.cy, rin, 270), up_out = rim_level(img, k.cx, k.cy, rout, 270);
        const double down_in = rim_level(img, k.cx, k.cy, rin, 90), down_out = rim_level(img, k.cx, k.cy, rout, 90);
        const double left_in = rim_level(img, k.cx, k.cy, rin, 180), left_out = rim_level(img, k.cx, k.cy, rout, 180);
        const double right_in = rim_level(img, k.cx, k.cy, rin, 0), right_out = rim_level(img, k.cx, k.cy, rout, 0);

        int dy = 0, dx = 0, dr = 0;
        if (bright(up_in) && dark(down_out)) dy = 1;
        else if (bright(down_in) && dark(up_out)) dy = -1;
        if (bright(left_in) && dark(right_out)) dx = 1;
        else if (bright(right_in) && dark(left_out)) dx = -1;
        if (cfg.refine_radius && dx == 0 && dy == 0) {
            if ((bright(up_in) && bright(down_in)) || (bright(left_in) && bright(right_in))) dr = -1;
            else if ((dark(up_out) && dark(down_out)) || (dark(left_out) && dark(right_out))) dr = 1;
        }
        if (dx == 0 && dy == 0 && dr == 0) {
            res.converged = true;
            return res;
        }
        const PupilCircle next = keep_inside({k.cx + dx, k.cy + dy, k.r + dr}, img);
        ++res.iterations;
        if (next.cx == k.cx && next.cy == k.cy && next.r == k.r) {
            res.converged = true;
            return res;
        }
        res.circle = next;
    }
    return res;
}

double pupil_square_mean(const GrayImage& img, const PupilCircle& c) {
    const double half = c.r / std::numbers::sqrt2;
    const int r0 = std::max(0, static_cast<int>(std::ceil(c.cy - half)));
    const int r1 = std::min(img.height() - 1, static_cast<int>(std::floor(c.cy + half)));
    const int c0 = std::max(0, static_cast<int>(std::ceil(c.cx - half)));
    const int c1 = std::min(img.width() - 1, static_cast<int>(std::floor(c.cx + half)));
    double sum = 0.0;
    long n = 0;
    for (int r = r0; r <= r1; ++r)
        for (int col = c0; col <= c1; ++col) {
            sum += img(r, col);
            ++n;
        }
    if (n == 0) return img.clamped(static_cast<int>(std::lround(c.cy)), static_cast<int>(std::lround(c.cx)));
    return sum / double(n);
}

GrayImage fill_pupil(const GrayImage& img, const PupilCircle& c, double multiplier) {
    const double value = multiplier * pupil_square_mean(img, c);
    GrayImage out = img;
    const int r0 = std::max(0, static_cast<int>(std::floor(c.cy - c.r)));
    const int r1 = std::min(img.height() - 1, static_cast<int>(std::ceil(c.cy + c.r)));
    const int c0 = std::max(0, static_cast<int>(std::floor(c.cx - c.r)));
    const int c1 = std::min(img.width() - 1, static_cast<int>(std::ceil(c.cx + c.r)));
    for (int r = r0; r <= r1; ++r)
        for (int col = c0; col <= c1; ++col)
            if (std::hypot(col - c.cx, r - c.cy) < c.r) out(r, col) = value;
    return out;
}

double clean_radius(double r_p) {
    if (!(r_p > 0.0)) throw Error(ErrorCode::InvalidArgument, "pupil radius must be positive");
    double k;
    if (r_p < 33) k = 2.85;
    else if (r_p <= 35) k = 2.65;
    else if (r_p <= 36) k = 2.69;
    else if (r_p < 41) k = 2.38;
    else if (r_p < 47) k = 2.15;
    else if (r_p < 51) k = 1.92;
    else if (r_p < 55) k = 1.7;
    else k = 1.5;
    return std::ceil(k * r_p);
}

double clamp_limbic(double r_p, double r_l) {
    struct Rule {
        double lo, hi, trigger, replace;
    };
    static constexpr Rule rules[] = {
        {47, 52, 2.6, 2.0}, {44, 47, 2.7, 2.1}, {41, 44, 2.8, 2.3}, {35, 41, 3.0, 3.0},
        {35, 41, 3.3, 2.6}, {31, 35, 3.4, 3.4}, {23, 31, 3.5, 3.6},
    };
    for (const Rule& rule : rules) {
        if (r_p > rule.lo && r_p < rule.hi && r_l > rule.trigger * r_p) return rule.replace * r_p;
    }
    // pupil sizes outside every listed band still honor the 3.6x ceiling
    return std::min(r_l, 3.6 * r_p);
}

namespace {

double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * double(v.size() - 1);
    const std::size_t i = static_cast<std::size_t>(std::floor(pos));
    const double t = pos - double(i);
    return i + 1 < v.size() ? v[i] * (1.0 - t) + v[i + 1] * t : v[i];
}

}  // namespace

LimbicResult limbic_radius(const GrayImage& img, const PupilCircle& pupil, const SegmentationConfig& cfg,
                           EdgeMap* cleaned_edges) {
    EdgeMap edges = canny(img, cfg.canny);
    const double erase = clean_radius(pupil.r);
    for (int r = 0; r < edges.height(); ++r)
        for (int c = 0; c < edges.width(); ++c)
            if (edges(r, c) && std::hypot(c - pupil.cx, r - pupil.cy) < erase) edges.set(r, c, false);

    std::vector<double> dists;
    const int row0 = std::max(0, static_cast<int>(std::ceil(pupil.cy)));
    const int row1 = std::min(img.height() - 1, static_cast<int>(std::floor(pupil.cy + 0.9 * pupil.r)));
    const int left_start = static_cast<int>(std::lround(pupil.cx - (pupil.r + 2.0)));
    const int right_start = static_cast<int>(std::lround(pupil.cx + (pupil.r + 2.0)));
    for (int r = row0; r <= row1; ++r) {
        for (int c = std::min(left_start, img.width() - 1); c >= 0; --c) {
            if (edges(r, c)) {
                dists.push_back(std::hypot(c - pupil.cx, r - pupil.cy));
                break;
            }
        }
        for (int c = std::max(right_start, 0); c < img.width(); ++c) {
            if (edges(r, c)) {
                dists.push_back(std::hypot(c - pupil.cx, r - pupil.cy));
                break;
            }
        }
    }
    if (cleaned_edges) *cleaned_edges = edges;

    LimbicResult res;
    res.hits = static_cast<int>(dists.size());
    if (dists.size() < 3) throw Error(ErrorCode::NoLimbicPoints, "fewer than 3 limbic scan hits");
    const double median = quantile(dists, 0.5);
    const double iqr = quantile(dists, 0.75) - quantile(dists, 0.25);
    double sum = 0.0;
    for (double d : dists) {
        if (std::abs(d - median) <= 1.5 * iqr) {
            sum += d;
            ++res.survivors;
        }
    }
    if (res.survivors < 3) throw Error(ErrorCode::NoLimbicPoints, "fewer than 3 limbic points survive outlier removal");
    res.raw_mean = sum / res.survivors;
    res.radius = clamp_limbic(pupil.r, res.raw_mean);
    return res;
}

Segmentation segment(const GrayImage& img, const SegmentationConfig& cfg, SegmentationTrace* trace) {
    cfg.validate();
    auto staged = [](const char* stage, auto&& fn) {
        try {
            return fn();
        } catch (const Error& e) {
            throw e.with_stage(stage);
        }
    };

    GrayImage mask = staged("weighted_mask", [&] { return weighted_mask(img, cfg.a_fraction); });
    GrayImage highlighted = staged("highlight_pupil", [&] { return highlight_pupil(img, mask, cfg.threshold_T); });
    EdgeMap pupil_edges = staged("canny", [&] { return canny(highlighted, cfg.canny); });
    const PupilCircle initial = staged("estimate_pupil", [&] { return estimate_pupil(pupil_edges); });
    if (!initial.inside(img)) {
        throw Error(ErrorCode::DegenerateInput, "pupil estimate leaves the image", "estimate_pupil");
    }

    Segmentation out;
    const double pupil_mean = pupil_square_mean(img, initial);
    const RefineResult refined = refine_pupil(img, initial, pupil_mean, cfg);
    out.geometry.pupil = refined.circle;
    out.flags.refine_converged = refined.converged;

    GrayImage filled = cfg.fill_enabled ? fill_pupil(img, refined.circle, cfg.fill_multiplier) : img;
    EdgeMap limbic_edges;
    try {
        out.geometry.limbic_r = limbic_radius(filled, refined.circle, cfg, &limbic_edges).radius;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoLimbicPoints) throw e.with_stage("limbic_radius");
        out.geometry.limbic_r = 3.0 * refined.circle.r;
        out.flags.limbic_fallback = true;
    }
    if (out.geometry.limbic_r <= out.geometry.pupil.r) {
        out.geometry.limbic_r = 3.0 * refined.circle.r;
        out.flags.limbic_fallback = true;
    }

    if (trace) {
        trace->mask = std::move(mask);
        trace->highlighted = std::move(highlighted);
        trace->pupil_edges = std::move(pupil_edges);
        trace->initial = initial;
        trace->filled = std::move(filled);
        trace->limbic_edges = std::move(limbic_edges);
    }
    return out;
}

}  // namespace iris
