#pragma once

#include <stdexcept>

namespace gprt {

struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct UnsupportedOrder : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised when an optimization produces non-finite loss.
struct Divergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace gprt
