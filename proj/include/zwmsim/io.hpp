#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "zwmsim/errors.hpp"

namespace zwmsim {

/// Round-trip decimal formatting (17 significant digits) so CSV numbers
/// compare exactly across runs.
inline std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary); // binary: byte-identical across runs
    if (!out)
        throw config_error("cannot open output file: " + path.string());
    return out;
}

} // namespace zwmsim
