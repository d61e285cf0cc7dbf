#pragma once
#include <stdexcept>

namespace dl {

// window could not be covered (grid depth exhausted or caps hit)
struct CoverageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// structurally valid request that this build cannot serve
struct UnsupportedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// malformed configuration
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace dl
