#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "iris/features.hpp"

namespace iris {

struct StoreRecord {
    std::string subject_id;
    Eye eye = Eye::Left;
    std::uint16_t sample_index = 0;
    PackedCode code{};

    friend bool operator==(const StoreRecord&, const StoreRecord&) = default;
};

// File layout (little-endian):
//   "IRDB" | u16 version | u32 count |
//   count x { u16 id_len | id bytes | u8 eye | u16 sample | 80-byte code }
class TemplateStore {
public:
    static constexpr std::uint16_t kVersion = 1;

    void add(StoreRecord r);  // duplicate (subject, eye, sample) is an error
    const std::vector<StoreRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    bool contains(const std::string& subject, Eye eye, std::uint16_t sample) const;
    std::uint16_t next_sample_index(const std::string& subject, Eye eye) const;

    // Unpacked templates labelled with their subject; optional filters.
    std::vector<IrisTemplate> templates(const std::optional<std::string>& subject = std::nullopt,
                                        std::optional<Eye> eye = std::nullopt) const;

    friend bool operator==(const TemplateStore&, const TemplateStore&) = default;

private:
    std::vector<StoreRecord> records_;
};

std::vector<std::uint8_t> serialize_store(const TemplateStore& s);
TemplateStore parse_store(const std::vector<std::uint8_t>& bytes);

// Atomic: writes a sibling temp file, then renames over the target.
void store_save(const TemplateStore& s, const std::filesystem::path& path);
TemplateStore store_load(const std::filesystem::path& path);

}  // namespace iris
