#pragma once

#include <stdexcept>
#include <string>

namespace handval {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// kinematics
struct DepthHoleError final : Error { using Error::Error; };
struct MissingJointError final : Error { using Error::Error; };
struct NonPhysicalDepthError final : Error { using Error::Error; };
struct InvalidIntrinsicsError final : Error { using Error::Error; };
struct GridMismatchError final : Error { using Error::Error; };
struct WrongLabelsError final : Error { using Error::Error; };
struct TooFewSamplesError final : Error { using Error::Error; };

// alignment
struct OutOfSpanError final : Error { using Error::Error; };
struct DegenerateSeriesError final : Error { using Error::Error; };
struct LengthMismatchError final : Error { using Error::Error; };
struct InsufficientOverlapError final : Error { using Error::Error; };

// metrics
struct EmptySeriesError final : Error { using Error::Error; };
struct AllExcludedError final : Error { using Error::Error; };
struct BandEmptyError final : Error { using Error::Error; };
struct TooShortError final : Error { using Error::Error; };

// segmentation
struct NoExtremaError final : Error { using Error::Error; };
struct EmptySegmentListError final : Error { using Error::Error; };

// agreement
struct TooFewPairsError final : Error { using Error::Error; };
struct DegenerateInputError final : Error { using Error::Error; };

// synth
struct InvalidSpecError final : Error { using Error::Error; };

// io / pipeline
struct ParseError final : Error {
    ParseError(const std::string& path, std::size_t line, const std::string& reason)
        : Error(path + ":" + std::to_string(line) + ": " + reason), line_number(line) {}
    std::size_t line_number = 0;
};
struct SchemaMismatchError final : Error { using Error::Error; };
struct VersionUnsupportedError final : Error { using Error::Error; };
struct TaskMismatchError final : Error { using Error::Error; };
struct EmptyInputError final : Error { using Error::Error; };
struct IoError final : Error { using Error::Error; };

} // namespace handval
