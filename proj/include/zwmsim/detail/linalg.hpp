#pragma once

#include <array>
#include <cmath>

#include "zwmsim/errors.hpp"

namespace zwmsim::detail {

using Mat3 = std::array<double, 9>;
using Vec3 = std::array<double, 3>;

/// Inverse of a 3x3 matrix via the adjugate.
inline Mat3 invert3(const Mat3& a) {
    const double c00 = a[4] * a[8] - a[5] * a[7];
    const double c01 = a[5] * a[6] - a[3] * a[8];
    const double c02 = a[3] * a[7] - a[4] * a[6];
    const double det = a[0] * c00 + a[1] * c01 + a[2] * c02;
    if (det == 0.0 || !std::isfinite(det))
        throw numerical_error("linalg: singular 3x3 system");
    const double inv = 1.0 / det;
    return {c00 * inv,
            (a[2] * a[7] - a[1] * a[8]) * inv,
            (a[1] * a[5] - a[2] * a[4]) * inv,
            c01 * inv,
            (a[0] * a[8] - a[2] * a[6]) * inv,
            (a[2] * a[3] - a[0] * a[5]) * inv,
            c02 * inv,
            (a[1] * a[6] - a[0] * a[7]) * inv,
            (a[0] * a[4] - a[1] * a[3]) * inv};
}

inline Vec3 mul3(const Mat3& a, const Vec3& x) {
    return {a[0] * x[0] + a[1] * x[1] + a[2] * x[2],
            a[3] * x[0] + a[4] * x[1] + a[5] * x[2],
            a[6] * x[0] + a[7] * x[1] + a[8] * x[2]};
}

} // namespace zwmsim::detail
