#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iris/features.hpp"
#include "iris/image.hpp"
#include "iris/segmentation.hpp"

namespace iris {

// Parameters of one rendered eye. Texture is defined in normalized polar
// coordinates (radius 0 at the pupil, 1 at the limbus) so pupil dilation and
// translation do not alter it; rotation_deg turns it clockwise.
struct SynthEyeSpec {
    int width = 320;
    int height = 280;
    std::uint64_t identity_seed = 1;
    std::uint64_t capture_seed = 1;
    double pupil_cx = 160.0;
    double pupil_cy = 140.0;
    double pupil_r = 30.0;
    double limbic_r = 95.0;
    double rotation_deg = 0.0;
    int band_lo = 8;            // angular frequencies (cycles per turn) of the texture
    int band_hi = 45;
    int components = 36;
    double texture_amplitude = 12.0;
    double capture_texture = 0.0;  // per-capture texture, relative to texture_amplitude
    bool upper_noise_only = false;  // upper half carries capture texture only
    double occlusion = 0.0;     // fraction of the limbic disc height hidden by the upper lid
    int specular_count = 0;
    double noise_sigma = 0.0;
    double pupil_level = 30.0;
    double iris_level = 95.0;
    double sclera_level = 115.0;
    double lid_level = 100.0;

    void validate() const;
};

struct SynthEye {
    GrayImage image;
    IrisGeometry truth;
    EdgeMap occluded;  // pixels covered by the lid
};

SynthEye synth_eye(const SynthEyeSpec& spec);

struct CohortSpec {
    int subjects = 30;
    int samples = 10;       // per subject and eye
    bool both_eyes = false;
    std::uint64_t seed = 1;
    double occlusion = 0.0;
    int specular_count = 0;
    double noise_sigma = 2.0;
    double rotation_max_deg = 4.0;
    double center_jitter = 6.0;
    double dilation_jitter = 1.0;
    double capture_texture = 0.4;
    bool upper_noise_only = false;
};

struct CohortSample {
    std::string subject;
    Eye eye = Eye::Left;
    int index = 0;
    SynthEyeSpec spec;
};

// Deterministic capture list, ordered by subject, eye, sample index.
std::vector<CohortSample> make_cohort(const CohortSpec& spec);

std::string subject_name(int subject);

}  // namespace iris
