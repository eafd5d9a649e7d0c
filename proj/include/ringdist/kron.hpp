#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ringdist/errors.hpp"

namespace ringdist {

// 2x2 factor of a Kronecker-product operator.
struct Mat2 {
    double m00 = 1.0, m01 = 0.0;
    double m10 = 0.0, m11 = 1.0;
};

namespace mats {

inline constexpr Mat2 identity{1.0, 0.0, 0.0, 1.0};

// Raw-moment accumulator and its inverse.
inline constexpr Mat2 B{1.0, 1.0, 0.0, 1.0};
inline constexpr Mat2 B_inv{1.0, -1.0, 0.0, 1.0};

// Centering factor for a symmetric binary variable (mean 1/2) and inverse.
inline constexpr Mat2 T_sym{1.0, 1.0, -0.5, 0.5};
inline constexpr Mat2 T_sym_inv{0.5, -1.0, 0.5, 1.0};

// Effect-coding contrast; self-inverse up to the factor 1/2.
inline constexpr Mat2 E{1.0, 1.0, 1.0, -1.0};
inline constexpr Mat2 E_inv{0.5, 0.5, 0.5, -0.5};

// Central moments directly from raw moments: T_sym * B_inv.
inline constexpr Mat2 T_from_B{1.0, 0.0, -0.5, 1.0};

// Centering factor for a general binary margin with P(level 1) = mean: the
// second row carries the residuals (0 - mean, 1 - mean).
inline constexpr Mat2 T_general(double mean) {
    return Mat2{1.0, 1.0, -mean, 1.0 - mean};
}

}  // namespace mats

// Applies (M_1 (x) ... (x) M_p) x where factor M_{q+1} acts on bit q of the
// cell index (first variable fastest). One sweep per bit position, touching
// each pair of entries that differ only in that bit: O(p 2^p) total.
inline void kron_apply_inplace(std::span<const Mat2> factors, std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n != (std::size_t{1} << factors.size()))
        throw std::domain_error("vector length must be 2^(number of factors)");
    for (std::size_t q = 0; q < factors.size(); ++q) {
        const Mat2& m = factors[q];
        const std::size_t stride = std::size_t{1} << q;
        for (std::size_t block = 0; block < n; block += 2 * stride) {
            for (std::size_t i = block; i < block + stride; ++i) {
                const double lo = x[i];
                const double hi = x[i + stride];
                x[i] = m.m00 * lo + m.m01 * hi;
                x[i + stride] = m.m10 * lo + m.m11 * hi;
            }
        }
    }
}

inline std::vector<double> kron_apply(std::span<const Mat2> factors, std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    kron_apply_inplace(factors, y);
    return y;
}

// Same factor at every position.
inline std::vector<double> kron_apply(const Mat2& factor, std::span<const double> x, int positions) {
    if (positions < 0)
        throw std::domain_error("factor count must be nonnegative");
    std::vector<Mat2> factors(static_cast<std::size_t>(positions), factor);
    return kron_apply(factors, x);
}

}  // namespace ringdist
