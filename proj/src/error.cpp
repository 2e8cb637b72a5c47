#include "iris/error.hpp"

namespace iris {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::FileNotFound: return "file-not-found";
        case ErrorCode::UnsupportedFormat: return "unsupported-format";
        case ErrorCode::CorruptFormat: return "corrupt-format";
        case ErrorCode::IoFailure: return "io-failure";
        case ErrorCode::DegenerateInput: return "degenerate-input";
        case ErrorCode::DimensionMismatch: return "dimension-mismatch";
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::ParallelBisectors: return "parallel-bisectors";
        case ErrorCode::TooFewEdgePoints: return "too-few-edge-points";
        case ErrorCode::AllChordsDegenerate: return "all-chords-degenerate";
        case ErrorCode::NoLimbicPoints: return "no-limbic-points";
        case ErrorCode::AnnulusOutOfBounds: return "annulus-out-of-bounds";
        case ErrorCode::UnknownFamily: return "unknown-family";
        case ErrorCode::MatrixTooSmall: return "matrix-too-small";
        case ErrorCode::UnknownSelection: return "unknown-selection";
        case ErrorCode::LevelUnavailable: return "level-unavailable";
        case ErrorCode::LengthMismatch: return "length-mismatch";
        case ErrorCode::EmptyInput: return "empty-input";
        case ErrorCode::ClassTooSmall: return "class-too-small";
        case ErrorCode::AllFeaturesDegenerate: return "all-features-degenerate";
        case ErrorCode::InsufficientImages: return "insufficient-images-per-subject";
        case ErrorCode::MissingGroundTruth: return "missing-ground-truth";
        case ErrorCode::InvalidSpec: return "invalid-spec";
        case ErrorCode::BadMagic: return "bad-magic";
        case ErrorCode::TruncatedFile: return "truncated-file";
        case ErrorCode::VersionMismatch: return "version-mismatch";
        case ErrorCode::DuplicateKey: return "duplicate-key";
        case ErrorCode::InvalidConfig: return "invalid-config";
    }
    return "unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& message, const std::string& stage) {
    std::string out;
    if (!stage.empty()) out += stage + ": ";
    out += std::string(to_string(code));
    if (!message.empty()) out += ": " + message;
    return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::string stage)
    : std::runtime_error(compose(code, message, stage)),
      code_(code),
      stage_(std::move(stage)),
      message_(message) {}

Error Error::with_stage(std::string stage) const {
    if (!stage_.empty()) return *this;
    return Error(code_, message_, std::move(stage));
}

}  // namespace iris
