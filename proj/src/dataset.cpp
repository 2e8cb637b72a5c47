#include "iris/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "iris/error.hpp"
#include "iris/image_io.hpp"

namespace fs = std::filesystem;

namespace iris {

std::vector<std::string> DatasetIndex::subjects() const {
    std::set<std::string> s;
    for (const auto& e : entries) s.insert(e.subject);
    return {s.begin(), s.end()};
}

bool DatasetIndex::has_eye(Eye e) const {
    return std::any_of(entries.begin(), entries.end(), [e](const DatasetEntry& d) { return d.eye == e; });
}

Eye parse_eye(std::string_view stem) {
    for (std::size_t i = 0; i < stem.size(); ++i) {
        const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(stem[i])));
        if (c != 'L' && c != 'R') continue;
        const bool left_ok = i == 0 || !std::isalpha(static_cast<unsigned char>(stem[i - 1]));
        const bool right_ok = i + 1 == stem.size() || !std::isalpha(static_cast<unsigned char>(stem[i + 1]));
        // CASIA-style "S1001L01": the letter sits between digits.
        if (left_ok && right_ok) return c == 'L' ? Eye::Left : Eye::Right;
        if (i > 0 && std::isdigit(static_cast<unsigned char>(stem[i - 1])) && right_ok)
            return c == 'L' ? Eye::Left : Eye::Right;
    }
    return Eye::Left;
}

char eye_letter(Eye e) { return e == Eye::Right ? 'R' : 'L'; }

std::optional<IrisGeometry> read_circles(const fs::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    IrisGeometry g;
    if (!(in >> g.pupil.cx >> g.pupil.cy >> g.pupil.r >> g.limbic_r))
        throw Error(ErrorCode::CorruptFormat, "expected 'cx cy r_p r_l' in " + path.string());
    if (!(g.pupil.r > 0.0) || !(g.limbic_r > g.pupil.r))
        throw Error(ErrorCode::CorruptFormat, "need 0 < r_p < r_l in " + path.string());
    return g;
}

void write_circles(const fs::path& path, const IrisGeometry& g) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g\n", g.pupil.cx, g.pupil.cy, g.pupil.r, g.limbic_r);
    out << buf;
}

namespace {

bool is_image(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    return ext == ".pgm" || ext == ".bmp";
}

}  // namespace

DatasetIndex scan_dataset(const fs::path& root) {
    if (!fs::is_directory(root)) throw Error(ErrorCode::FileNotFound, "no dataset directory " + root.string());
    DatasetIndex idx;
    idx.root = root;
    std::vector<fs::path> subjects;
    for (const auto& d : fs::directory_iterator(root))
        if (d.is_directory()) subjects.push_back(d.path());
    std::sort(subjects.begin(), subjects.end());

    for (const auto& dir : subjects) {
        std::vector<fs::path> files;
        // nested folders (e.g. per-session) belong to the same subject
        for (const auto& f : fs::recursive_directory_iterator(dir))
            if (f.is_regular_file() && is_image(f.path())) files.push_back(f.path());
        std::sort(files.begin(), files.end());
        std::map<Eye, int> counter;
        std::vector<DatasetEntry> local;
        for (const auto& f : files) {
            DatasetEntry e;
            e.subject = dir.filename().string();
            e.eye = parse_eye(f.stem().string());
            e.index = counter[e.eye]++;
            e.path = f;
            e.truth = read_circles(fs::path(f).replace_extension(".circles"));
            local.push_back(std::move(e));
        }
        std::stable_sort(local.begin(), local.end(),
                         [](const DatasetEntry& a, const DatasetEntry& b) { return a.eye < b.eye; });
        idx.entries.insert(idx.entries.end(), local.begin(), local.end());
    }
    if (idx.entries.empty()) throw Error(ErrorCode::EmptyInput, "no images under " + root.string());
    return idx;
}

DatasetIndex write_synthetic(const CohortSpec& spec, const fs::path& root) {
    const auto cohort = make_cohort(spec);
    for (const auto& s : cohort) {
        const fs::path dir = root / s.subject;
        fs::create_directories(dir);
        char name[64];
        std::snprintf(name, sizeof name, "%s_%c_%02d", s.subject.c_str(), eye_letter(s.eye), s.index);
        const auto eye = synth_eye(s.spec);
        write_pgm(dir / (std::string(name) + ".pgm"), eye.image);
        write_circles(dir / (std::string(name) + ".circles"), eye.truth);
    }
    return scan_dataset(root);
}

}  // namespace iris
