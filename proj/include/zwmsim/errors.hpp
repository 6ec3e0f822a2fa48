#pragma once

#include <stdexcept>
#include <string>

namespace zwmsim {

// Maps to CLI exit code 1.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Maps to CLI exit code 2.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Maps to CLI exit code 3.
struct low_statistics_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace zwmsim
