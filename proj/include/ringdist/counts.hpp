#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ringdist/dependence.hpp"
#include "ringdist/errors.hpp"
#include "ringdist/model.hpp"
#include "ringdist/rng.hpp"

namespace ringdist {

// Observed (or imputed) counts over level combinations, in ProbVector cell
// order. Cells are doubles so that exact population tables and E-step
// pseudo-counts fit the same type; observed data is integer-valued.
struct CountTable {
    int leaves = 0;
    bool root_observed = false;
    std::vector<double> counts;  // size 2^leaves, or 2^(leaves+1) with root

    int vars() const noexcept { return root_observed ? leaves + 1 : leaves; }

    double total() const noexcept {
        double n = 0.0;
        for (double c : counts) n += c;
        return n;
    }
};

namespace detail {

inline void check_count_table(const CountTable& ct) {
    if (ct.leaves < 1 || ct.vars() > kMaxVars)
        throw std::domain_error("count table has unsupported variable count");
    if (ct.counts.size() != (std::size_t{1} << ct.vars()))
        throw std::domain_error("count table has inconsistent size");
    for (double c : ct.counts)
        if (!(c >= 0.0) || !std::isfinite(c))
            throw std::domain_error("counts must be finite and nonnegative");
}

}  // namespace detail

inline TwoByTwo pair_margin(const CountTable& ct, int row_var, int col_var) {
    detail::check_count_table(ct);
    if (row_var == col_var || row_var < 0 || col_var < 0 ||
        row_var >= ct.vars() || col_var >= ct.vars())
        throw std::domain_error("pair variables must be distinct and in range");
    const std::size_t rbit = std::size_t{1} << row_var;
    const std::size_t cbit = std::size_t{1} << col_var;
    TwoByTwo t;
    for (std::size_t u = 0; u < ct.counts.size(); ++u) {
        const bool r = u & rbit;
        const bool c = u & cbit;
        (r ? (c ? t.ss : t.sw) : (c ? t.ms : t.mw)) += ct.counts[u];
    }
    return t;
}

// Sum out the root column.
inline CountTable drop_root(const CountTable& ct) {
    detail::check_count_table(ct);
    if (!ct.root_observed) return ct;
    const std::size_t half = std::size_t{1} << ct.leaves;
    CountTable out{ct.leaves, false, std::vector<double>(half)};
    for (std::size_t t = 0; t < half; ++t)
        out.counts[t] = ct.counts[t] + ct.counts[t + half];
    return out;
}

// Ancestral sampling along the star graph: draw the root fair, then each
// leaf independently at success chance (1+rho)/2 given a strong root and
// (1-rho)/2 given a weak one. Fully determined by (spec, n, seed).
inline CountTable sample(const ModelSpec& spec, std::uint64_t n, std::uint64_t seed,
                         bool include_root = false) {
    if (n == 0)
        throw std::domain_error("sample size must be >= 1");
    const int q = spec.leaves;
    const double p_strong = (1.0 + spec.rho) / 2.0;
    const double p_weak = (1.0 - spec.rho) / 2.0;

    CountTable out{q, include_root,
                   std::vector<double>(std::size_t{1} << (include_root ? q + 1 : q), 0.0)};
    SplitMix64 rng(seed);
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint64_t l = rng.next() & 1;
        const double p1 = l ? p_strong : p_weak;
        std::uint64_t cell = include_root ? l << q : 0;
        for (int j = 0; j < q; ++j)
            if (rng.next_unit() < p1) cell |= std::uint64_t{1} << j;
        out.counts[cell] += 1.0;
    }
    return out;
}

}  // namespace ringdist
