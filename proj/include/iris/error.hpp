#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace iris {

enum class ErrorCode {
    FileNotFound,
    UnsupportedFormat,
    CorruptFormat,
    IoFailure,
    DegenerateInput,
    DimensionMismatch,
    InvalidArgument,
    ParallelBisectors,
    TooFewEdgePoints,
    AllChordsDegenerate,
    NoLimbicPoints,
    AnnulusOutOfBounds,
    UnknownFamily,
    MatrixTooSmall,
    UnknownSelection,
    LevelUnavailable,
    LengthMismatch,
    EmptyInput,
    ClassTooSmall,
    AllFeaturesDegenerate,
    InsufficientImages,
    MissingGroundTruth,
    InvalidSpec,
    BadMagic,
    TruncatedFile,
    VersionMismatch,
    DuplicateKey,
    InvalidConfig,
};

std::string_view to_string(ErrorCode code);

// Every domain failure in the library is reported through this type. The
// stage tag names the pipeline step that raised it (empty for leaf calls).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string stage = {});

    ErrorCode code() const noexcept { return code_; }
    const std::string& stage() const noexcept { return stage_; }

    // Same error re-tagged with the given stage, unless one is already set.
    Error with_stage(std::string stage) const;

private:
    ErrorCode code_;
    std::string stage_;
    std::string message_;
};

}  // namespace iris
