#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "ringdist/errors.hpp"
#include "ringdist/model.hpp"

namespace ringdist {

// 2x2 table of a pair (A, L): rows A in {miss, succeed}, columns L in
// {weak, strong}. Holds probabilities or counts.
struct TwoByTwo {
    double mw = 0.0;  // A miss,    L weak
    double sw = 0.0;  // A succeed, L weak
    double ms = 0.0;  // A miss,    L strong
    double ss = 0.0;  // A succeed, L strong

    double total() const noexcept { return mw + sw + ms + ss; }
};

// Standard dependence measures of a 2x2 table. A measure whose defining
// denominator is zero stays unset so callers can render partial results.
struct MeasureSet {
    std::optional<double> odds_given_strong;   // ss/ms
    std::optional<double> odds_given_weak;     // sw/mw
    std::optional<double> odds_ratio;          // (ss*mw)/(ms*sw)
    std::optional<double> chance_given_strong; // ss/(ms+ss)
    std::optional<double> chance_given_weak;   // sw/(mw+sw)
    std::optional<double> chance_difference;
    std::optional<double> relative_chance;
};

inline MeasureSet measures(const TwoByTwo& t) {
    MeasureSet out;
    if (t.ms > 0.0) out.odds_given_strong = t.ss / t.ms;
    if (t.mw > 0.0) out.odds_given_weak = t.sw / t.mw;
    if (t.ms > 0.0 && t.sw > 0.0) out.odds_ratio = (t.ss * t.mw) / (t.ms * t.sw);
    if (t.ms + t.ss > 0.0) out.chance_given_strong = t.ss / (t.ms + t.ss);
    if (t.mw + t.sw > 0.0) out.chance_given_weak = t.sw / (t.mw + t.sw);
    if (out.chance_given_strong && out.chance_given_weak) {
        out.chance_difference = *out.chance_given_strong - *out.chance_given_weak;
        if (*out.chance_given_weak > 0.0)
            out.relative_chance = *out.chance_given_strong / *out.chance_given_weak;
    }
    return out;
}

// Cross-sum difference {(n00+n11) - (n01+n10)}/n: the closed-form correlation
// estimate for a symmetric binary pair, and exactly rho on the model table.
inline double csd(const TwoByTwo& t) {
    const double n = t.total();
    if (!(n > 0.0))
        throw std::domain_error("cross-sum difference needs a nonempty table");
    return ((t.mw + t.ss) - (t.sw + t.ms)) / n;
}

// Margin of a probability vector onto the pair (row_var, col_var), summing
// over every other variable. Variables are 0-based positions; the root is
// position vars-1 when included.
inline TwoByTwo pair_margin(const ProbVector& pi, int row_var, int col_var) {
    if (row_var == col_var || row_var < 0 || col_var < 0 ||
        row_var >= pi.vars || col_var >= pi.vars)
        throw std::domain_error("pair variables must be distinct and in range");
    const std::size_t rbit = std::size_t{1} << row_var;
    const std::size_t cbit = std::size_t{1} << col_var;
    TwoByTwo t;
    for (std::size_t u = 0; u < pi.entries.size(); ++u) {
        const bool r = u & rbit;
        const bool c = u & cbit;
        (r ? (c ? t.ss : t.sw) : (c ? t.ms : t.mw)) += pi.entries[u];
    }
    return t;
}

// Conditional 2x2 slice of the pair given fixed levels of every remaining
// variable (taken from the matching bits of `given_levels`; the pair's own
// bits are ignored). Renormalized; a zero-probability condition throws.
inline TwoByTwo conditional_pair_table(const ProbVector& pi, int row_var, int col_var,
                                       std::uint64_t given_levels) {
    if (row_var == col_var || row_var < 0 || col_var < 0 ||
        row_var >= pi.vars || col_var >= pi.vars)
        throw std::domain_error("pair variables must be distinct and in range");
    const std::size_t rbit = std::size_t{1} << row_var;
    const std::size_t cbit = std::size_t{1} << col_var;
    const std::size_t base = static_cast<std::size_t>(given_levels) & ~rbit & ~cbit &
                             ((std::size_t{1} << pi.vars) - 1);
    TwoByTwo t{pi.entries[base],
               pi.entries[base | rbit],
               pi.entries[base | cbit],
               pi.entries[base | rbit | cbit]};
    const double mass = t.total();
    if (!(mass > 0.0))
        throw std::domain_error("conditioning event has zero probability");
    t.mw /= mass;
    t.sw /= mass;
    t.ms /= mass;
    t.ss /= mass;
    return t;
}

// p x p correlation matrix of the {-1,1}-coded variables, leaves first and
// the root last: rho^2 between leaves, rho between each leaf and the root.
inline std::vector<std::vector<double>> correlation_matrix(const ModelSpec& spec) {
    const int p = spec.vars();
    std::vector<std::vector<double>> r(p, std::vector<double>(p, 0.0));
    for (int i = 0; i < p; ++i) {
        r[i][i] = 1.0;
        for (int j = i + 1; j < p; ++j) {
            const bool with_root = (j == p - 1);
            r[i][j] = r[j][i] = with_root ? spec.rho : spec.rho * spec.rho;
        }
    }
    return r;
}

// Same form with one dependence per leaf: rho_q * rho_r between leaves,
// rho_q between leaf q and the root.
inline std::vector<std::vector<double>> correlation_matrix_general(
    const std::vector<double>& rhos) {
    const int q = static_cast<int>(rhos.size());
    if (q < 1)
        throw std::domain_error("need at least one leaf dependence");
    for (double r : rhos)
        if (!(r >= 0.0 && r < 1.0))
            throw std::domain_error("each leaf dependence must lie in [0, 1)");
    const int p = q + 1;
    std::vector<std::vector<double>> m(p, std::vector<double>(p, 0.0));
    for (int i = 0; i < p; ++i) m[i][i] = 1.0;
    for (int i = 0; i < q; ++i) {
        m[i][p - 1] = m[p - 1][i] = rhos[i];
        for (int j = i + 1; j < q; ++j) m[i][j] = m[j][i] = rhos[i] * rhos[j];
    }
    return m;
}

// What the three measures look like once the roles of the root and a leaf
// are exchanged in the conditional tables (L, A_2 | A_1). Odds-ratios are
// unchanged; chance differences and relative chances distort.
struct ReversalReport {
    double alpha = 1.0;
    double rho = 0.0;
    // dependence of A_2 on L given A_1, identical at both levels of A_1
    double forward_odds_ratio = 1.0;        // alpha^2
    double forward_chance_difference = 0.0; // rho
    double forward_relative_chance = 1.0;   // alpha
    // dependence of L on A_2 given A_1
    double reversed_odds_ratio = 1.0;                 // alpha^2, both levels
    double reversed_relative_chance_given_miss = 1.0;    // (1+alpha^2)/2
    double reversed_relative_chance_given_succeed = 1.0; // 2 alpha^2/(1+alpha^2)
    double reversed_chance_difference_given_miss = 0.0;    // 1/2 - 1/(1+alpha^2)
    double reversed_chance_difference_given_succeed = 0.0; // alpha^2/(1+alpha^2) - 1/2
    // largest relative chance for the root as leaves are added: value at
    // Q-1 misses of the remaining leaves
    double extreme_relative_chance = 1.0;  // (1+alpha^Q)/2
};

inline ReversalReport reversal_analysis(double alpha, int leaves) {
    if (!(alpha >= 1.0))
        throw std::domain_error("alpha must lie in [1, inf)");
    if (leaves < 1)
        throw std::domain_error("leaf count must be >= 1");
    const double a2 = alpha * alpha;
    ReversalReport r;
    r.alpha = alpha;
    r.rho = alpha_to_rho(alpha);
    r.forward_odds_ratio = a2;
    r.forward_chance_difference = r.rho;
    r.forward_relative_chance = alpha;
    r.reversed_odds_ratio = a2;
    r.reversed_relative_chance_given_miss = (1.0 + a2) / 2.0;
    r.reversed_relative_chance_given_succeed = 2.0 * a2 / (1.0 + a2);
    r.reversed_chance_difference_given_miss = 0.5 - 1.0 / (1.0 + a2);
    r.reversed_chance_difference_given_succeed = a2 / (1.0 + a2) - 0.5;
    r.extreme_relative_chance = (1.0 + std::pow(alpha, leaves)) / 2.0;
    return r;
}

}  // namespace ringdist
