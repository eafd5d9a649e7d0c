#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "ringdist/errors.hpp"

namespace ringdist {

// One-parameter family of jointly symmetric binary distributions generated
// over a star graph: Q leaf variables A_1..A_Q, each depending on a common
// binary root L, every variable with equally probable levels.
//
// Indexing convention used by every vector in this library: cell index
// t in [0, 2^p); bit q of t (0-based, least significant first) holds the
// {0,1} level of variable q+1, and when the root is included it occupies the
// most significant bit. So the first variable changes fastest and the root
// block splits the vector in halves (L=0 first, L=1 second).

inline constexpr int kMaxVars = 30;  // 2^30 doubles = 8 GiB; reject beyond

// rho in [0, 1) <-> alpha in [1, inf), the odds parameter of each leaf-root
// pair. alpha is also the conditional relative chance and alpha^2 the
// conditional odds-ratio of every such pair.
inline double rho_to_alpha(double rho) {
    if (!(rho >= 0.0 && rho < 1.0))
        throw std::domain_error("rho must lie in [0, 1)");
    return (1.0 + rho) / (1.0 - rho);
}

inline double alpha_to_rho(double alpha) {
    if (!(alpha >= 1.0))
        throw std::domain_error("alpha must lie in [1, inf)");
    return (alpha - 1.0) / (alpha + 1.0);
}

struct ModelSpec {
    int leaves = 1;      // Q >= 1
    double rho = 0.0;    // leaf-root correlation, [0, 1)
    double alpha = 1.0;  // (1+rho)/(1-rho)

    int vars() const noexcept { return leaves + 1; }  // p = Q + 1

    // Normalizing constant c_Q = 2(1+alpha)^Q.
    double norm_const() const { return 2.0 * std::pow(1.0 + alpha, leaves); }

    static ModelSpec from_rho(int leaves, double rho) {
        validate_leaves(leaves);
        return ModelSpec{leaves, rho, rho_to_alpha(rho)};
    }

    static ModelSpec from_alpha(int leaves, double alpha) {
        validate_leaves(leaves);
        return ModelSpec{leaves, alpha_to_rho(alpha), alpha};
    }

private:
    static void validate_leaves(int leaves) {
        if (leaves < 1)
            throw std::domain_error("leaf count must be >= 1");
        if (leaves + 1 > kMaxVars)
            throw capacity_error("variable count exceeds 2^30-cell capacity");
    }
};

// Probability vector over all level combinations of `vars` variables.
struct ProbVector {
    int vars = 0;
    bool root_included = false;
    std::vector<double> entries;  // size 2^vars

    int leaves() const noexcept { return root_included ? vars - 1 : vars; }
    std::size_t size() const noexcept { return entries.size(); }
};

// Leaf-level summary of one cell index: K = number of ones among the leaf
// bits, s = sum of the leaves in {-1,1} coding = 2K - Q.
struct IndexStats {
    std::uint64_t index = 0;
    int ones = 0;  // K_t
    int sum = 0;   // s_t
};

inline IndexStats index_stats(std::uint64_t t, int leaves) {
    if (leaves < 1 || leaves + 1 > kMaxVars)
        throw std::domain_error("leaf count out of range");
    if (t >= (std::uint64_t{1} << (leaves + 1)))
        throw std::domain_error("cell index out of range");
    const std::uint64_t leaf_mask = (std::uint64_t{1} << leaves) - 1;
    const int k = std::popcount(t & leaf_mask);
    return IndexStats{t, k, 2 * k - leaves};
}

namespace detail {

inline std::vector<double> power_table(double base, int up_to) {
    std::vector<double> pw(static_cast<std::size_t>(up_to) + 1);
    pw[0] = 1.0;
    for (int k = 1; k <= up_to; ++k) pw[k] = pw[k - 1] * base;
    return pw;
}

}  // namespace detail

// Joint distribution evaluated cell by cell: pi(a,l)*c_Q = alpha^K for l=1
// and alpha^(Q-K) for l=0.
inline ProbVector joint_vector_direct(const ModelSpec& spec) {
    const int q = spec.leaves;
    const std::size_t half = std::size_t{1} << q;
    const double c = spec.norm_const();
    const auto pw = detail::power_table(spec.alpha, q);

    ProbVector out{spec.vars(), true, std::vector<double>(half * 2)};
    for (std::size_t t = 0; t < half; ++t) {
        const int k = std::popcount(t);
        out.entries[t] = pw[q - k] / c;         // L = 0 block
        out.entries[t + half] = pw[k] / c;      // L = 1 block
    }
    return out;
}

// Same distribution through the product form pi = 2^-p prod_q (1 + rho a*_q l*)
// with {-1,1}-coded levels. Independent route used to cross-check the others.
inline ProbVector joint_vector_product(const ModelSpec& spec) {
    const int q = spec.leaves;
    const int p = spec.vars();
    const std::size_t n = std::size_t{1} << p;
    const double base = std::ldexp(1.0, -p);  // 2^-p

    ProbVector out{p, true, std::vector<double>(n)};
    for (std::size_t t = 0; t < n; ++t) {
        const double l_star = (t >> q) & 1 ? 1.0 : -1.0;
        double prob = base;
        for (int j = 0; j < q; ++j) {
            const double a_star = (t >> j) & 1 ? 1.0 : -1.0;
            prob *= 1.0 + spec.rho * a_star * l_star;
        }
        out.entries[t] = prob;
    }
    return out;
}

// Kronecker-power construction: the vector is (w (x) ... (x) w, v (x) ... (x) v)/c_Q
// with v = (1, alpha), w = (alpha, 1), built by repeated in-place doubling.
inline ProbVector joint_vector_kron(const ModelSpec& spec) {
    const int q = spec.leaves;
    const std::size_t half = std::size_t{1} << q;
    const double c = spec.norm_const();

    ProbVector out{spec.vars(), true, std::vector<double>(half * 2)};
    double* lo = out.entries.data();         // w-power, L = 0 block
    double* hi = out.entries.data() + half;  // v-power, L = 1 block
    lo[0] = spec.alpha;
    lo[1] = 1.0;
    hi[0] = 1.0;
    hi[1] = spec.alpha;
    for (std::size_t len = 2; len < half; len *= 2) {
        // append one factor: new most significant leaf bit
        for (std::size_t i = 0; i < len; ++i) {
            lo[len + i] = lo[i];             // w_1 = 1
            hi[len + i] = hi[i] * spec.alpha;  // v_1 = alpha
            lo[i] *= spec.alpha;             // w_0 = alpha
            // v_0 = 1: hi[i] unchanged
        }
    }
    for (std::size_t t = 0; t < half * 2; ++t) out.entries[t] /= c;
    return out;
}

// Exponent pattern e_t with entries[t]*c_Q = alpha^{e_t}. The strong-signal
// (L=1) half read in index order is the integer ladder that generates the
// family as p grows; the L=0 half is its mirror image.
inline std::vector<int> integer_pattern(const ModelSpec& spec) {
    const int q = spec.leaves;
    const std::size_t half = std::size_t{1} << q;
    std::vector<int> e(half * 2);
    for (std::size_t t = 0; t < half; ++t) {
        const int k = std::popcount(t);
        e[t] = q - k;
        e[t + half] = k;
    }
    return e;
}

// Exact integer cell values alpha^{e_t} for integer alpha. The full vector
// sums to c_Q = 2(1+alpha)^Q; throws once any cell or the sum overflows.
inline std::vector<std::uint64_t> integer_cells(const ModelSpec& spec) {
    const double a_int = std::round(spec.alpha);
    if (std::abs(spec.alpha - a_int) > 1e-12 || a_int < 1.0)
        throw std::domain_error("integer cell values require integer alpha >= 1");
    const auto a = static_cast<std::uint64_t>(a_int);

    const auto e = integer_pattern(spec);
    std::vector<std::uint64_t> pw(static_cast<std::size_t>(spec.leaves) + 1);
    pw[0] = 1;
    for (int k = 1; k <= spec.leaves; ++k) {
        if (pw[k - 1] > std::numeric_limits<std::uint64_t>::max() / a)
            throw std::overflow_error("integer cell value exceeds 64-bit range");
        pw[k] = pw[k - 1] * a;
    }
    std::vector<std::uint64_t> cells(e.size());
    std::uint64_t sum = 0;
    for (std::size_t t = 0; t < e.size(); ++t) {
        cells[t] = pw[e[t]];
        if (sum > std::numeric_limits<std::uint64_t>::max() - cells[t])
            throw std::overflow_error("integer cell sum exceeds 64-bit range");
        sum += cells[t];
    }
    return cells;
}

// Distribution of the leaves after summing out the root:
// pi(a)*c_Q = alpha^K + alpha^(Q-K). Computed as the floating-point L-sum of
// the joint table so the two agree bit for bit.
inline ProbVector marginal_leaves(const ModelSpec& spec) {
    const ProbVector joint = joint_vector_direct(spec);
    const std::size_t n = std::size_t{1} << spec.leaves;
    ProbVector out{spec.leaves, false, std::vector<double>(n)};
    for (std::size_t t = 0; t < n; ++t)
        out.entries[t] = joint.entries[t] + joint.entries[t + n];
    return out;
}

// P(L = 0 | a), P(L = 1 | a) for a given leaf-level combination, passed as the
// low Q bits of `leaf_bits`.
struct RootPosterior {
    double weak = 0.5;    // P(L = 0 | a)
    double strong = 0.5;  // P(L = 1 | a)
};

inline RootPosterior conditional_root(const ModelSpec& spec, std::uint64_t leaf_bits) {
    const int q = spec.leaves;
    if (leaf_bits >= (std::uint64_t{1} << q))
        throw std::domain_error("leaf level combination out of range");
    const int k = std::popcount(leaf_bits);
    // alpha^K / (alpha^K + alpha^(Q-K)) = 1 / (1 + alpha^(Q-2K))
    const double strong = 1.0 / (1.0 + std::pow(spec.alpha, double(q - 2 * k)));
    return RootPosterior{1.0 - strong, strong};
}

// Sample size at which the smallest joint cell (probability 1/c_Q) has
// expected count one: ceil(c_Q).
inline std::uint64_t plan_sample_size(const ModelSpec& spec) {
    const double c = std::ceil(spec.norm_const());
    if (c >= 1.8e19)
        throw std::overflow_error("planned sample size exceeds 64-bit range");
    return static_cast<std::uint64_t>(c);
}

}  // namespace ringdist
