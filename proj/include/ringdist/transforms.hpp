#pragma once

#include <bit>
#include <cmath>
#include <string>
#include <vector>

#include "ringdist/errors.hpp"
#include "ringdist/kron.hpp"
#include "ringdist/model.hpp"

namespace ringdist {

// Parametrizations reachable from a probability vector by Kronecker maps.
enum class MomentKind { raw, central, loglinear, linear };

inline const char* to_string(MomentKind kind) {
    switch (kind) {
        case MomentKind::raw: return "raw";
        case MomentKind::central: return "central";
        case MomentKind::loglinear: return "loglinear";
        case MomentKind::linear: return "linear";
    }
    return "?";
}

// Interaction/moment vector indexed by variable subsets: bit q of the entry
// index is set iff variable q+1 belongs to the subset (same convention as
// ProbVector cells). Entry 0 is the constant term, or the normalizing term
// for the loglinear kind.
struct InteractionVector {
    int vars = 0;
    bool root_included = false;
    MomentKind kind = MomentKind::raw;
    std::vector<double> entries;
};

namespace detail {

inline void check_prob_vector(const ProbVector& pi) {
    if (pi.vars < 1 || pi.entries.size() != (std::size_t{1} << pi.vars))
        throw std::domain_error("probability vector has inconsistent size");
}

// Mean of variable q under pi.
inline double variable_mean(const ProbVector& pi, int q) {
    double m = 0.0;
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t t = 0; t < pi.entries.size(); ++t)
        if (t & bit) m += pi.entries[t];
    return m;
}

inline void require_symmetric_margins(const ProbVector& pi, double tol = 1e-8) {
    for (int q = 0; q < pi.vars; ++q)
        if (std::abs(variable_mean(pi, q) - 0.5) > tol)
            throw std::domain_error("variable " + std::to_string(q + 1) +
                                    " margin is not symmetric");
}

}  // namespace detail

// Raw moments m_I = P(all variables in I at level 1).
inline InteractionVector raw_moments(const ProbVector& pi) {
    detail::check_prob_vector(pi);
    return InteractionVector{pi.vars, pi.root_included, MomentKind::raw,
                             kron_apply(mats::B, pi.entries, pi.vars)};
}

// Central moments of the {0,1}-coded variables; requires symmetric margins.
inline InteractionVector central_moments(const ProbVector& pi) {
    detail::check_prob_vector(pi);
    detail::require_symmetric_margins(pi);
    return InteractionVector{pi.vars, pi.root_included, MomentKind::central,
                             kron_apply(mats::T_sym, pi.entries, pi.vars)};
}

// Central moments for arbitrary binary margins: each centering factor is
// built from that variable's own mean.
inline InteractionVector central_moments_general(const ProbVector& pi) {
    detail::check_prob_vector(pi);
    std::vector<Mat2> factors;
    factors.reserve(static_cast<std::size_t>(pi.vars));
    for (int q = 0; q < pi.vars; ++q)
        factors.push_back(mats::T_general(detail::variable_mean(pi, q)));
    return InteractionVector{pi.vars, pi.root_included, MomentKind::central,
                             kron_apply(factors, pi.entries)};
}

// Central moments straight from raw moments via the factorwise product
// T B^-1 (mixed-product property).
inline InteractionVector central_from_raw(const InteractionVector& m) {
    if (m.kind != MomentKind::raw)
        throw std::domain_error("central_from_raw expects a raw-moment vector");
    return InteractionVector{m.vars, m.root_included, MomentKind::central,
                             kron_apply(mats::T_from_B, m.entries, m.vars)};
}

// Log-linear interactions at level combination one; requires a strictly
// positive table.
inline InteractionVector loglinear_interactions(const ProbVector& pi) {
    detail::check_prob_vector(pi);
    std::vector<double> logp(pi.entries.size());
    for (std::size_t t = 0; t < pi.entries.size(); ++t) {
        if (!(pi.entries[t] > 0.0))
            throw std::domain_error("log-linear interactions require strictly positive cells");
        logp[t] = std::log(pi.entries[t]);
    }
    return InteractionVector{pi.vars, pi.root_included, MomentKind::loglinear,
                             kron_apply(mats::E_inv, logp, pi.vars)};
}

// Linear interactions: standardized central moments of the {-1,1}-coded
// variables on even subsets (effect-coding contrast applied to pi).
inline InteractionVector linear_interactions(const ProbVector& pi) {
    detail::check_prob_vector(pi);
    return InteractionVector{pi.vars, pi.root_included, MomentKind::linear,
                             kron_apply(mats::E, pi.entries, pi.vars)};
}

// Closed form of the linear interactions for the leaf margin of a model:
// rho^|I| on even-size subsets, zero on odd ones.
inline InteractionVector leaf_linear_interactions(const ModelSpec& spec) {
    const std::size_t n = std::size_t{1} << spec.leaves;
    InteractionVector out{spec.leaves, false, MomentKind::linear, std::vector<double>(n, 0.0)};
    const auto pw = detail::power_table(spec.rho, spec.leaves);
    for (std::size_t s = 0; s < n; ++s) {
        const int k = std::popcount(s);
        if (k % 2 == 0) out.entries[s] = pw[k];
    }
    return out;
}

// Leaf log-linear vector computed from the leaf linear interactions; zero on
// exactly the odd-size subsets.
inline InteractionVector leaf_loglinear(const ModelSpec& spec) {
    const auto xi = leaf_linear_interactions(spec);
    // invert the contrast to recover the leaf table, then take logs
    std::vector<double> table = kron_apply(mats::E_inv, xi.entries, spec.leaves);
    for (double& cell : table) {
        if (!(cell > 0.0))
            throw numerical_error("leaf table reconstructed from interactions is not positive");
        cell = std::log(cell);
    }
    return InteractionVector{spec.leaves, false, MomentKind::loglinear,
                             kron_apply(mats::E_inv, table, spec.leaves)};
}

// Exact inverse of each transform. Loglinear inversion checks that the
// reconstructed table is normalized.
inline ProbVector inverse_transform(const InteractionVector& v) {
    if (v.vars < 1 || v.entries.size() != (std::size_t{1} << v.vars))
        throw std::domain_error("interaction vector has inconsistent size");
    ProbVector out{v.vars, v.root_included, {}};
    switch (v.kind) {
        case MomentKind::raw:
            out.entries = kron_apply(mats::B_inv, v.entries, v.vars);
            break;
        case MomentKind::central:
            out.entries = kron_apply(mats::T_sym_inv, v.entries, v.vars);
            break;
        case MomentKind::linear:
            out.entries = kron_apply(mats::E_inv, v.entries, v.vars);
            break;
        case MomentKind::loglinear: {
            out.entries = kron_apply(mats::E, v.entries, v.vars);
            double sum = 0.0;
            for (double& cell : out.entries) {
                cell = std::exp(cell);
                sum += cell;
            }
            if (std::abs(sum - 1.0) > 1e-8)
                throw numerical_error("log-linear inversion is off normalization by " +
                                      std::to_string(sum - 1.0));
            break;
        }
    }
    return out;
}

}  // namespace ringdist
