#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ktune {

using index_t = std::int64_t;

/// Thrown for contract violations (bad arguments, malformed input files,
/// plan/kernel mismatches). Numerical breakdowns inside solvers are
/// reported through result flags instead, so iteration state survives.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw Error(msg);
}

// ---------------------------------------------------------------------------
// Dense vector helpers. Deliberately serial: a single fixed accumulation
// order keeps every solver bitwise reproducible at a given configuration.
// SpMV is the only parallel kernel in the library.
// ---------------------------------------------------------------------------

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) {
    return std::sqrt(dot(a, a));
}

inline double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scal(double alpha, std::span<double> x) {
    for (double& v : x) v *= alpha;
}

inline void fill_zero(std::span<double> x) {
    for (double& v : x) v = 0.0;
}

}  // namespace ktune
