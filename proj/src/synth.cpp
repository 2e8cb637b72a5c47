#include "iris/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "iris/error.hpp"

namespace iris {

void SynthEyeSpec::validate() const {
    if (width < 16 || height < 16) throw Error(ErrorCode::InvalidSpec, "image too small");
    if (!(pupil_r > 0.0) || !(pupil_r < limbic_r)) throw Error(ErrorCode::InvalidSpec, "need 0 < pupil_r < limbic_r");
    if (!(occlusion >= 0.0 && occlusion < 1.0)) throw Error(ErrorCode::InvalidSpec, "occlusion must be in [0,1)");
    if (band_lo < 1 || band_hi < band_lo || components < 1) throw Error(ErrorCode::InvalidSpec, "bad texture band");
    if (specular_count < 0 || !(noise_sigma >= 0.0) || !(capture_texture >= 0.0)) {
        throw Error(ErrorCode::InvalidSpec, "negative noise parameters");
    }
}

namespace {

struct Wave {
    double amp;
    int cycles;
    double phase;
    double radial_freq;
};

std::vector<Wave> make_waves(std::uint64_t seed, const SynthEyeSpec& spec, double amplitude) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> cycles(spec.band_lo, spec.band_hi);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> radial(0.0, 3.0 * std::numbers::pi);
    std::uniform_real_distribution<double> weight(0.5, 1.5);
    std::vector<Wave> waves(spec.components);
    double power = 0.0;
    for (Wave& w : waves) {
        w.amp = weight(rng);
        w.cycles = cycles(rng);
        w.phase = phase(rng);
        w.radial_freq = radial(rng);
        power += 0.5 * w.amp * w.amp;
    }
    const double scale = power > 0.0 ? amplitude / std::sqrt(power) : 0.0;
    for (Wave& w : waves) w.amp *= scale;
    return waves;
}

double eval_waves(const std::vector<Wave>& waves, double rho, double theta) {
    double v = 0.0;
    for (const Wave& w : waves) v += w.amp * std::cos(w.cycles * theta + w.phase + w.radial_freq * rho);
    return v;
}

// Texture fades out toward the limbus, leaving a smooth outer band.
double taper(double rho) {
    if (rho <= 0.55) return 1.0;
    if (rho >= 0.75) return 0.0;
    const double t = (rho - 0.55) / 0.2;
    const double c = std::cos(0.5 * std::numbers::pi * t);
    return c * c;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a * 0x9E3779B97F4A7C15ULL ^ (b + 0x7F4A7C159E3779B9ULL + (a << 6) + (a >> 2));
    x ^= x >> 31;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 29;
    return x;
}

}  // namespace

SynthEye synth_eye(const SynthEyeSpec& spec) {
    spec.validate();
    const auto identity = make_waves(spec.identity_seed, spec, spec.texture_amplitude);
    const double capture_amp = spec.upper_noise_only ? spec.texture_amplitude
                                                     : spec.capture_texture * spec.texture_amplitude;
    const auto capture = make_waves(mix(spec.capture_seed, 0xC0FFEE), spec, capture_amp);
    const double rot = spec.rotation_deg * std::numbers::pi / 180.0;

    SynthEye out{GrayImage(spec.width, spec.height), {{spec.pupil_cx, spec.pupil_cy, spec.pupil_r}, spec.limbic_r},
                 EdgeMap(spec.width, spec.height)};
    const double lid_top = spec.pupil_cy - spec.limbic_r + 2.0 * spec.occlusion * spec.limbic_r;
    for (int r = 0; r < spec.height; ++r) {
        for (int c = 0; c < spec.width; ++c) {
            const double dx = c - spec.pupil_cx;
            const double dy = r - spec.pupil_cy;
            const double d = std::hypot(dx, dy);
            const double in_pupil = std::clamp(spec.pupil_r - d + 0.5, 0.0, 1.0);
            const double in_iris = std::clamp(spec.limbic_r - d + 0.5, 0.0, 1.0);
            double iris = spec.iris_level;
            if (in_iris > in_pupil) {
                const double rho = std::clamp((d - spec.pupil_r) / (spec.limbic_r - spec.pupil_r), 0.0, 1.0);
                double theta = std::atan2(dy, dx);
                if (theta < 0.0) theta += 2.0 * std::numbers::pi;
                const double fade = taper(rho);
                if (fade > 0.0) {
                    const double local = theta - rot;
                    const bool upper = theta > std::numbers::pi;
                    double tex = (spec.upper_noise_only && upper) ? 0.0 : eval_waves(identity, rho, local);
                    if (capture_amp > 0.0 && (!spec.upper_noise_only || upper)) tex += eval_waves(capture, rho, local);
                    // soft limit so rare constructive peaks never reach pupil darkness
                    const double lim = 2.5 * spec.texture_amplitude;
                    if (lim > 0.0) tex = lim * std::tanh(tex / lim);
                    iris += fade * tex;
                }
            }
            double v = in_pupil * spec.pupil_level + (in_iris - in_pupil) * iris + (1.0 - in_iris) * spec.sclera_level;
            if (spec.occlusion > 0.0) {
                // upper lid: parabola bowing upward away from the pupil column
                const double u = dx / spec.limbic_r;
                const double lid_y = lid_top + 0.25 * spec.limbic_r * u * u;
                const double cover = std::clamp(lid_y - r + 0.5, 0.0, 1.0);
                if (cover > 0.0) {
                    v = cover * spec.lid_level + (1.0 - cover) * v;
                    out.occluded.set(r, c, cover >= 0.5);
                }
            }
            out.image(r, c) = v;
        }
    }

    std::mt19937_64 rng(mix(spec.capture_seed, 0x5EC));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < spec.specular_count; ++k) {
        const double ang = 2.0 * std::numbers::pi * unit(rng);
        const double rad = 0.5 * spec.pupil_r * std::sqrt(unit(rng));
        const double sx = spec.pupil_cx + rad * std::cos(ang);
        const double sy = spec.pupil_cy + rad * std::sin(ang);
        const double sr = 2.0 + unit(rng);
        for (int r = static_cast<int>(sy - sr - 1); r <= static_cast<int>(sy + sr + 1); ++r)
            for (int c = static_cast<int>(sx - sr - 1); c <= static_cast<int>(sx + sr + 1); ++c) {
                if (r < 0 || c < 0 || r >= spec.height || c >= spec.width) continue;
                const double cover = std::clamp(sr - std::hypot(c - sx, r - sy) + 0.5, 0.0, 1.0);
                out.image(r, c) = cover * 250.0 + (1.0 - cover) * out.image(r, c);
            }
    }

    std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);
    for (double& v : out.image.data()) {
        if (spec.noise_sigma > 0.0) v += noise(rng);
        v = std::clamp(std::round(v), 0.0, 255.0);
    }
    return out;
}

std::string subject_name(int subject) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "s%03d", subject);
    return buf;
}

std::vector<CohortSample> make_cohort(const CohortSpec& spec) {
    if (spec.subjects < 1 || spec.samples < 1) throw Error(ErrorCode::InvalidSpec, "empty cohort");
    std::vector<CohortSample> out;
    const int eyes = spec.both_eyes ? 2 : 1;
    for (int s = 0; s < spec.subjects; ++s) {
        for (int e = 0; e < eyes; ++e) {
            const std::uint64_t identity = mix(mix(spec.seed, std::uint64_t(s) + 1), std::uint64_t(e) + 101);
            std::mt19937_64 id_rng(identity);
            std::uniform_real_distribution<double> pupil(26.0, 31.0);
            std::uniform_real_distribution<double> ratio(3.15, 3.3);
            const double base_pupil = pupil(id_rng);
            const double limbic = base_pupil * ratio(id_rng);
            for (int k = 0; k < spec.samples; ++k) {
                const std::uint64_t capture = mix(identity, std::uint64_t(k) + 7);
                std::mt19937_64 rng(capture);
                std::uniform_real_distribution<double> u(-1.0, 1.0);
                CohortSample cs;
                cs.subject = subject_name(s);
                cs.eye = e == 0 ? Eye::Left : Eye::Right;
                cs.index = k;
                SynthEyeSpec& p = cs.spec;
                p.identity_seed = identity;
                p.capture_seed = capture;
                p.pupil_cx = 0.5 * p.width + spec.center_jitter * u(rng);
                p.pupil_cy = 0.5 * p.height + spec.center_jitter * u(rng);
                p.pupil_r = base_pupil + spec.dilation_jitter * u(rng);
                p.limbic_r = limbic;
                p.rotation_deg = spec.rotation_max_deg * u(rng);
                p.capture_texture = spec.capture_texture;
                p.upper_noise_only = spec.upper_noise_only;
                p.occlusion = spec.occlusion;
                p.specular_count = spec.specular_count;
                p.noise_sigma = spec.noise_sigma;
                out.push_back(std::move(cs));
            }
        }
    }
    return out;
}

}  // namespace iris
