#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iris/features.hpp"
#include "iris/segmentation.hpp"
#include "iris/synth.hpp"

namespace iris {

struct DatasetEntry {
    std::string subject;
    Eye eye = Eye::Left;
    int index = 0;  // position within (subject, eye), in path order
    std::filesystem::path path;
    std::optional<IrisGeometry> truth;  // from a .circles sidecar, when present
};

// Layout: root/<subject>/<image>.pgm|.bmp, optional <image>.circles next to
// each image holding "cx cy r_p r_l". Images may sit in subfolders of the
// subject folder; order is by full path.
struct DatasetIndex {
    std::filesystem::path root;
    std::vector<DatasetEntry> entries;  // sorted by subject, eye, index

    std::vector<std::string> subjects() const;
    bool has_eye(Eye e) const;
};

DatasetIndex scan_dataset(const std::filesystem::path& root);

// An isolated L or R token in a file stem names the eye ("s001_R_03",
// "S1001R02"); anything else is treated as a left eye.
Eye parse_eye(std::string_view stem);
char eye_letter(Eye e);

std::optional<IrisGeometry> read_circles(const std::filesystem::path& path);
void write_circles(const std::filesystem::path& path, const IrisGeometry& g);

// Renders a cohort to disk with ground-truth sidecars and returns its index.
DatasetIndex write_synthetic(const CohortSpec& spec, const std::filesystem::path& root);

}  // namespace iris
