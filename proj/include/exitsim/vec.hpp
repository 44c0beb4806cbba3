#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace exitsim {

using Vec = std::vector<double>;  // point in R^d
using Mat = std::vector<double>;  // row-major d x d

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) {
    return std::sqrt(dot(a, a));
}

// Hilbert-Schmidt norm of a row-major matrix stored flat.
inline double frobenius_norm(std::span<const double> m) {
    return norm(m);
}

// out = m * x, m row-major d x d.
inline void matvec(std::span<const double> m, std::span<const double> x, std::span<double> out) {
    const std::size_t d = x.size();
    for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += m[i * d + j] * x[j];
        out[i] = s;
    }
}

// out = m^T * x (row vector times matrix).
inline void vecmat(std::span<const double> x, std::span<const double> m, std::span<double> out) {
    const std::size_t d = x.size();
    for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) s += x[i] * m[i * d + j];
        out[j] = s;
    }
}

inline double dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double e = a[i] - b[i];
        s += e * e;
    }
    return std::sqrt(s);
}

// Compensated (Kahan) accumulator; keeps long sums drift-free.
struct KahanAccum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
    void reset(double v = 0.0) {
        sum = v;
        comp = 0.0;
    }
};

}  // namespace exitsim
