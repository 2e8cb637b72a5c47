#include "iris/store.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "iris/error.hpp"

namespace fs = std::filesystem;

namespace iris {

void TemplateStore::add(StoreRecord r) {
    if (r.subject_id.empty()) throw Error(ErrorCode::InvalidArgument, "empty subject id");
    if (r.subject_id.size() > std::numeric_limits<std::uint16_t>::max())
        throw Error(ErrorCode::InvalidArgument, "subject id too long");
    if (contains(r.subject_id, r.eye, r.sample_index))
        throw Error(ErrorCode::DuplicateKey, "record " + r.subject_id + "/" + std::to_string(int(r.eye)) + "/" +
                                                 std::to_string(r.sample_index) + " already stored");
    records_.push_back(std::move(r));
}

bool TemplateStore::contains(const std::string& subject, Eye eye, std::uint16_t sample) const {
    return std::any_of(records_.begin(), records_.end(), [&](const StoreRecord& r) {
        return r.subject_id == subject && r.eye == eye && r.sample_index == sample;
    });
}

std::uint16_t TemplateStore::next_sample_index(const std::string& subject, Eye eye) const {
    int next = 0;
    for (const auto& r : records_)
        if (r.subject_id == subject && r.eye == eye) next = std::max(next, r.sample_index + 1);
    if (next > std::numeric_limits<std::uint16_t>::max())
        throw Error(ErrorCode::InvalidArgument, "sample index space exhausted for " + subject);
    return static_cast<std::uint16_t>(next);
}

std::vector<IrisTemplate> TemplateStore::templates(const std::optional<std::string>& subject,
                                                   std::optional<Eye> eye) const {
    std::vector<IrisTemplate> out;
    for (const auto& r : records_) {
        if (subject && r.subject_id != *subject) continue;
        if (eye && r.eye != *eye) continue;
        IrisTemplate t = unpack_template(r.code);
        t.subject_id = r.subject_id;
        t.eye = r.eye;
        out.push_back(std::move(t));
    }
    return out;
}

namespace {

constexpr char kMagic[4] = {'I', 'R', 'D', 'B'};

void put16(std::vector<std::uint8_t>& b, std::uint16_t v) {
    b.push_back(static_cast<std::uint8_t>(v & 0xFF));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

struct Reader {
    const std::vector<std::uint8_t>& b;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (b.size() - pos < n) throw Error(ErrorCode::TruncatedFile, "template store ends mid-record");
    }
    std::uint8_t u8() {
        need(1);
        return b[pos++];
    }
    std::uint16_t u16() {
        need(2);
        const std::uint16_t v = static_cast<std::uint16_t>(b[pos] | (b[pos + 1] << 8));
        pos += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
};

}  // namespace

std::vector<std::uint8_t> serialize_store(const TemplateStore& s) {
    std::vector<std::uint8_t> b(std::begin(kMagic), std::end(kMagic));
    put16(b, TemplateStore::kVersion);
    put32(b, static_cast<std::uint32_t>(s.size()));
    for (const auto& r : s.records()) {
        put16(b, static_cast<std::uint16_t>(r.subject_id.size()));
        b.insert(b.end(), r.subject_id.begin(), r.subject_id.end());
        b.push_back(static_cast<std::uint8_t>(r.eye));
        put16(b, r.sample_index);
        b.insert(b.end(), r.code.begin(), r.code.end());
    }
    return b;
}

TemplateStore parse_store(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw Error(ErrorCode::BadMagic, "not a template store (missing IRDB magic)");
    Reader in{bytes, 4};
    const std::uint16_t version = in.u16();
    if (version != TemplateStore::kVersion)
        throw Error(ErrorCode::VersionMismatch, "store version " + std::to_string(version) + " unsupported");
    const std::uint32_t count = in.u32();
    TemplateStore s;
    for (std::uint32_t i = 0; i < count; ++i) {
        StoreRecord r;
        const std::uint16_t len = in.u16();
        in.need(len);
        r.subject_id.assign(reinterpret_cast<const char*>(bytes.data() + in.pos), len);
        in.pos += len;
        const std::uint8_t eye = in.u8();
        if (eye > 1) throw Error(ErrorCode::CorruptFormat, "eye byte must be 0 or 1");
        r.eye = static_cast<Eye>(eye);
        r.sample_index = in.u16();
        in.need(kTemplateBytes);
        std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(in.pos), kTemplateBytes, r.code.begin());
        in.pos += kTemplateBytes;
        s.add(std::move(r));
    }
    if (in.pos != bytes.size()) throw Error(ErrorCode::CorruptFormat, "trailing bytes after last record");
    return s;
}

void store_save(const TemplateStore& s, const fs::path& path) {
    const auto bytes = serialize_store(s);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorCode::IoFailure, "cannot replace " + path.string());
    }
}

TemplateStore store_load(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileNotFound, "no template store at " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_store(bytes);
}

}  // namespace iris
