#pragma once

#include <stdexcept>

namespace gfuse {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : Error { using Error::Error; };    // mismatched tensor/image dimensions
struct SizeError : Error { using Error::Error; };     // window or crop larger than the image
struct FormatError : Error { using Error::Error; };   // undecodable or unsupported file content
struct GraphError : Error { using Error::Error; };    // invalid graph construction request
struct NumericError : Error { using Error::Error; };  // NaN/Inf where finite values are required
struct DataError : Error { using Error::Error; };     // dataset listing / pairing problems

}  // namespace gfuse
