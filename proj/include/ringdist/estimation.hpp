#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "ringdist/counts.hpp"
#include "ringdist/dependence.hpp"
#include "ringdist/errors.hpp"
#include "ringdist/model.hpp"

namespace ringdist {

// Point estimate of the dependence parameter. `raw` is the unclamped value
// on the estimator's natural scale (rho for the observed-root estimate,
// rho^2 for the latent ones).
struct Estimate {
    double rho = 0.0;
    double rho_sq = 0.0;
    double raw = 0.0;
    bool clamped = false;
    bool non_identifiable = false;  // rho == 0: alpha == 1, independence
};

namespace detail {

inline double largest_below_one() { return std::nextafter(1.0, 0.0); }

inline Estimate finish_estimate(double rho, double rho_sq, double raw, bool clamped) {
    return Estimate{rho, rho_sq, raw, clamped, rho == 0.0};
}

inline void require_total(const CountTable& ct) {
    if (!(ct.total() > 0.0))
        throw std::domain_error("estimators need a table with positive total count");
}

// s_t = 2 K_t - Q per leaf cell, shared by several estimators.
inline std::vector<int> leaf_sums(int leaves) {
    const std::size_t n = std::size_t{1} << leaves;
    std::vector<int> s(n);
    for (std::size_t t = 0; t < n; ++t)
        s[t] = 2 * std::popcount(t) - leaves;
    return s;
}

}  // namespace detail

// Closed-form maximum-likelihood estimate with the root observed: the mean
// of the Q leaf-root cross-sum differences, clamped into [0, 1).
inline Estimate mle_observed(const CountTable& ct) {
    detail::check_count_table(ct);
    detail::require_total(ct);
    if (!ct.root_observed)
        throw std::domain_error("observed-root estimate needs a root column");
    double acc = 0.0;
    for (int q = 0; q < ct.leaves; ++q)
        acc += csd(pair_margin(ct, q, ct.leaves));
    const double raw = acc / ct.leaves;
    double rho = raw;
    bool clamped = false;
    if (rho < 0.0) {
        rho = 0.0;
        clamped = true;
    } else if (rho >= 1.0) {
        rho = detail::largest_below_one();
        clamped = true;
    }
    return detail::finish_estimate(rho, rho * rho, raw, clamped);
}

// Method-of-moments estimate of rho^2 from the second moment of the mean of
// the {-1,1}-coded leaves: Q v - 1 = (Q-1) rho^2. Uses the uncentered moment
// since the model mean of the leaf average is exactly zero.
inline Estimate mom_estimate(const CountTable& ct) {
    detail::check_count_table(ct);
    detail::require_total(ct);
    if (ct.root_observed)
        throw std::domain_error("method-of-moments estimate expects a leaves-only table");
    if (ct.leaves < 2)
        throw std::domain_error("rho is not identifiable from a single leaf");
    const auto s = detail::leaf_sums(ct.leaves);
    const double n = ct.total();
    const double q = ct.leaves;
    double second = 0.0;
    for (std::size_t t = 0; t < ct.counts.size(); ++t)
        second += ct.counts[t] * double(s[t]) * double(s[t]);
    const double v_hat = second / (n * q * q);
    const double raw = (q * v_hat - 1.0) / (q - 1.0);
    double rho_sq = raw;
    bool clamped = false;
    if (rho_sq < 0.0) {
        rho_sq = 0.0;
        clamped = true;
    } else if (rho_sq >= 1.0) {
        rho_sq = detail::largest_below_one();
        clamped = true;
    }
    return detail::finish_estimate(std::sqrt(rho_sq), rho_sq, raw, clamped);
}

// Closed-form latent-root maximum-likelihood estimate of rho^2, available
// for two and three leaves: the (mean of the) pairwise leaf cross-sum
// difference(s). Negative values clamp to zero.
inline Estimate closed_form_latent(const CountTable& ct) {
    detail::check_count_table(ct);
    detail::require_total(ct);
    if (ct.root_observed)
        throw std::domain_error("latent estimate expects a leaves-only table");
    if (ct.leaves != 2 && ct.leaves != 3)
        throw std::invalid_argument(
            "closed-form latent estimate exists only for 2 or 3 leaves; use em_fit");
    double acc = 0.0;
    int pairs = 0;
    for (int a = 0; a < ct.leaves; ++a)
        for (int b = a + 1; b < ct.leaves; ++b) {
            acc += csd(pair_margin(ct, a, b));
            ++pairs;
        }
    const double raw = acc / pairs;
    double rho_sq = raw;
    bool clamped = false;
    if (rho_sq < 0.0) {
        rho_sq = 0.0;
        clamped = true;
    } else if (rho_sq >= 1.0) {
        rho_sq = detail::largest_below_one();
        clamped = true;
    }
    return detail::finish_estimate(std::sqrt(rho_sq), rho_sq, raw, clamped);
}

// Marginal log-likelihood of a leaves-only table under the model with the
// given rho. Neumaier summation keeps the per-iteration comparisons sharp.
inline double loglik(double rho, const CountTable& ct) {
    detail::check_count_table(ct);
    if (ct.root_observed)
        throw std::domain_error("marginal log-likelihood expects a leaves-only table");
    const ProbVector pi = marginal_leaves(ModelSpec::from_rho(ct.leaves, rho));
    double sum = 0.0, comp = 0.0;
    for (std::size_t t = 0; t < ct.counts.size(); ++t) {
        if (ct.counts[t] == 0.0) continue;
        const double term = ct.counts[t] * std::log(pi.entries[t]);
        const double next = sum + term;
        comp += std::abs(sum) >= std::abs(term) ? (sum - next) + term : (term - next) + sum;
        sum = next;
    }
    return sum + comp;
}

// Exhaustive scan of the marginal log-likelihood over the grid
// {0, step, 2 step, ..., 1-step}; ties to the smaller rho.
inline double grid_mle_oracle(const CountTable& ct, double step) {
    if (!(step > 0.0 && step <= 0.01))
        throw std::domain_error("grid step must lie in (0, 0.01]");
    detail::require_total(ct);
    double best_rho = 0.0;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (std::uint64_t k = 0;; ++k) {
        const double rho = double(k) * step;
        if (rho >= 1.0 - step / 2.0) break;
        const double ll = loglik(rho, ct);
        if (ll > best_ll) {
            best_ll = ll;
            best_rho = rho;
        }
    }
    return best_rho;
}

// E-step: split each observed leaf count across the two root levels with the
// current conditional root distribution. Leaf margins are preserved exactly.
inline CountTable em_estep(const ModelSpec& spec, const CountTable& ct) {
    detail::check_count_table(ct);
    if (ct.root_observed)
        throw std::domain_error("E-step expects a leaves-only table");
    if (ct.leaves != spec.leaves)
        throw std::domain_error("leaf counts of spec and table disagree");
    const std::size_t half = std::size_t{1} << ct.leaves;
    CountTable out{ct.leaves, true, std::vector<double>(half * 2)};
    for (std::size_t t = 0; t < half; ++t) {
        const double strong = ct.counts[t] * conditional_root(spec, t).strong;
        out.counts[t + half] = strong;
        out.counts[t] = ct.counts[t] - strong;
    }
    return out;
}

// M-step: rho from the imputed full table via the conditional-mean
// difference of the leaf average.
inline double em_mstep(const CountTable& pseudo) {
    detail::check_count_table(pseudo);
    detail::require_total(pseudo);
    if (!pseudo.root_observed)
        throw std::domain_error("M-step needs a root column");
    const auto s = detail::leaf_sums(pseudo.leaves);
    const std::size_t half = std::size_t{1} << pseudo.leaves;
    double acc = 0.0;
    for (std::size_t t = 0; t < half; ++t)
        acc += double(s[t]) * (pseudo.counts[t + half] - pseudo.counts[t]);
    return acc / (pseudo.total() * pseudo.leaves);
}

// One term of the combined EM update: s (alpha^s - 1)/(alpha^s + 1),
// even in s and nonnegative for alpha >= 1. Evaluated through |s| so large
// negative sums cannot overflow; a saturated power yields |s|.
inline double T_term(double alpha, int s) {
    if (!(alpha >= 1.0))
        throw std::domain_error("alpha must lie in [1, inf)");
    if (s == 0) return 0.0;
    const double mag = std::abs(double(s));
    const double a_pow = std::pow(alpha, mag);
    if (a_pow > 1e300) return mag;
    return mag * (a_pow - 1.0) / (a_pow + 1.0);
}

struct EmConfig {
    double tolerance = 1e-7;  // stop when |rho(m+1) - rho(m)| < tolerance
    int max_iterations = 500;
    std::optional<double> init;  // in (0, 1); default: method-of-moments
};

struct EmIteration {
    int m = 0;
    double rho = 0.0;
    double alpha = 1.0;
    double loglik = 0.0;
};

struct EmTrace {
    std::vector<EmIteration> iterations;  // index 0 is the starting point
    bool converged = false;
    int steps = 0;  // update steps performed
    double final_rho = 0.0;
    bool clamped = false;          // snapped to the rho = 0 boundary
    bool boundary = false;         // capped just below rho = 1
    bool non_identifiable = false; // final_rho == 0
};

// EM for the latent-root model, collapsed into the single update
// rho(m+1) = (1/nQ) sum_t T_t(m) n_t. Starts from the method-of-moments
// estimate (floored at 0.01 when that degenerates, since 0 is a fixed
// point), records the marginal log-likelihood at every step, and resolves
// the rho = 0 boundary by direct likelihood comparison.
inline EmTrace em_fit(const CountTable& ct, const EmConfig& config = {}) {
    detail::check_count_table(ct);
    detail::require_total(ct);
    if (ct.root_observed)
        throw std::domain_error("em_fit expects a leaves-only table; use mle_observed");
    if (ct.leaves < 2)
        throw std::domain_error("rho is not identifiable from a single leaf");
    if (!(config.tolerance > 0.0))
        throw std::domain_error("tolerance must be positive");
    if (config.max_iterations < 1)
        throw std::domain_error("max_iterations must be >= 1");
    if (config.init && !(*config.init > 0.0 && *config.init < 1.0))
        throw std::domain_error("init must lie in (0, 1)");

    const auto s = detail::leaf_sums(ct.leaves);
    const double n = ct.total();
    const double nq = n * ct.leaves;

    double rho = config.init ? *config.init : [&] {
        const Estimate mom = mom_estimate(ct);
        return mom.rho_sq > 0.0 ? mom.rho : 0.01;
    }();

    EmTrace trace;
    trace.iterations.push_back({0, rho, rho_to_alpha(rho), loglik(rho, ct)});

    for (int m = 1; m <= config.max_iterations; ++m) {
        const double alpha = rho_to_alpha(rho);
        double acc = 0.0;
        for (std::size_t t = 0; t < ct.counts.size(); ++t) {
            if (ct.counts[t] == 0.0) continue;
            acc += T_term(alpha, s[t]) * ct.counts[t];
        }
        double next = acc / nq;
        if (!std::isfinite(next))
            throw numerical_error("EM update produced a non-finite value");
        if (next >= 1.0 - 1e-9) {
            next = 1.0 - 1e-9;
            trace.boundary = true;
        }
        trace.iterations.push_back({m, next, rho_to_alpha(next), loglik(next, ct)});
        trace.steps = m;
        const double delta = std::abs(next - rho);
        rho = next;
        if (delta < config.tolerance) {
            trace.converged = true;
            break;
        }
    }
    trace.final_rho = rho;

    // The update map has 0 as a fixed point, so runs heading for the boundary
    // stall near the starting floor; accept rho = 0 when it is at least as
    // likely as where the iteration stopped.
    const double ll_zero = loglik(0.0, ct);
    if (ll_zero >= trace.iterations.back().loglik - 1e-10 && trace.final_rho != 0.0) {
        trace.final_rho = 0.0;
        trace.clamped = true;
        trace.converged = true;
        trace.iterations.push_back({trace.iterations.back().m + 1, 0.0, 1.0, ll_zero});
    }
    trace.non_identifiable = trace.final_rho == 0.0;
    return trace;
}

}  // namespace ringdist
