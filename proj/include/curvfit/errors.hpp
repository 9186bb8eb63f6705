#pragma once

#include <stdexcept>
#include <string>

namespace curvfit {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// File reading/writing and parse failures (message carries path and line).
struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

/// Invalid mesh topology: bad indices, non-manifold edges, orientation.
struct MeshError : Error {
    explicit MeshError(const std::string& msg) : Error(msg) {}
};

/// Failure of a local fit: too few usable points, singular system,
/// degenerate target frame.
struct FitError : Error {
    explicit FitError(const std::string& msg) : Error(msg) {}
};

} // namespace curvfit
