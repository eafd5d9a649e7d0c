#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "ringdist/counts.hpp"
#include "ringdist/errors.hpp"
#include "ringdist/estimation.hpp"
#include "ringdist/rng.hpp"

namespace ringdist {

// Nearest-rank quantile of an unsorted sample.
inline double quantile(std::vector<double> values, double q) {
    if (values.empty())
        throw std::domain_error("quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0))
        throw std::domain_error("quantile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    if (q == 0.0) return values.front();
    const auto rank = static_cast<std::size_t>(std::ceil(q * double(values.size())));
    return values[std::min(rank, values.size()) - 1];
}

struct SimulationConfig {
    int leaves = 4;
    std::vector<double> rhos{0.5, 0.6, 0.7, 0.8};
    std::vector<std::uint64_t> sample_sizes{300, 1000};
    int replicates = 500;
    std::vector<double> tolerances{1e-4, 1e-7};
    int max_iterations = 500;
    std::uint64_t master_seed = 1;
    int threads = 1;
};

// One cell = one (rho, n) pair; per tolerance, the per-replicate fit results
// in replicate order. `iterations` counts the updates required to converge:
// the final update, which lands within tolerance of its predecessor, merely
// certifies convergence and is not counted.
struct ToleranceResults {
    double tolerance = 0.0;
    std::vector<double> rho_hat;   // one per replicate
    std::vector<int> iterations;   // required update steps per replicate
    std::vector<double> abs_error; // |rho_hat - rho_true|
};

struct CellReport {
    double rho = 0.0;
    std::uint64_t sample_size = 0;
    std::vector<ToleranceResults> by_tolerance;
};

struct SimulationReport {
    SimulationConfig config;
    std::vector<CellReport> cells;  // rho-major, then sample size
    std::uint64_t loglik_violations = 0;  // EM monotonicity breaches (slack 1e-10)
    std::uint64_t non_converged = 0;
};

// End-to-end harness: sample each replicate, fit it at every tolerance, and
// summarize. Replicate seeds depend only on (master_seed, cell, replicate),
// so results are identical for any thread count.
inline SimulationReport run_simulation(const SimulationConfig& config) {
    if (config.leaves < 2)
        throw std::domain_error("simulation needs at least two leaves");
    if (config.replicates < 1)
        throw std::domain_error("replicate count must be >= 1");
    if (config.rhos.empty() || config.sample_sizes.empty() || config.tolerances.empty())
        throw std::domain_error("rho, sample-size and tolerance grids must be nonempty");
    for (double r : config.rhos) (void)rho_to_alpha(r);
    for (std::uint64_t n : config.sample_sizes)
        if (n == 0) throw std::domain_error("sample sizes must be >= 1");

    SimulationReport report;
    report.config = config;
    const std::size_t n_cells = config.rhos.size() * config.sample_sizes.size();
    report.cells.resize(n_cells);
    for (std::size_t c = 0; c < n_cells; ++c) {
        CellReport& cell = report.cells[c];
        cell.rho = config.rhos[c / config.sample_sizes.size()];
        cell.sample_size = config.sample_sizes[c % config.sample_sizes.size()];
        cell.by_tolerance.resize(config.tolerances.size());
        for (std::size_t j = 0; j < config.tolerances.size(); ++j) {
            auto& tr = cell.by_tolerance[j];
            tr.tolerance = config.tolerances[j];
            tr.rho_hat.resize(config.replicates);
            tr.iterations.resize(config.replicates);
            tr.abs_error.resize(config.replicates);
        }
    }

    std::atomic<std::uint64_t> violations{0};
    std::atomic<std::uint64_t> non_converged{0};
    const std::size_t total_runs = n_cells * static_cast<std::size_t>(config.replicates);

    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t task = begin; task < end; ++task) {
            const std::size_t c = task / config.replicates;
            const auto rep = static_cast<int>(task % config.replicates);
            CellReport& cell = report.cells[c];
            const ModelSpec spec = ModelSpec::from_rho(config.leaves, cell.rho);
            const CountTable data =
                sample(spec, cell.sample_size, derive_seed(config.master_seed, c, rep));
            for (auto& tr : cell.by_tolerance) {
                const EmTrace fit =
                    em_fit(data, EmConfig{tr.tolerance, config.max_iterations, {}});
                tr.rho_hat[rep] = fit.final_rho;
                tr.iterations[rep] = fit.converged && fit.steps > 0 ? fit.steps - 1 : fit.steps;
                tr.abs_error[rep] = std::abs(fit.final_rho - cell.rho);
                if (!fit.converged) non_converged.fetch_add(1, std::memory_order_relaxed);
                for (std::size_t i = 1; i < fit.iterations.size(); ++i)
                    if (fit.iterations[i].loglik < fit.iterations[i - 1].loglik - 1e-10)
                        violations.fetch_add(1, std::memory_order_relaxed);
            }
        }
    };

    const int threads = std::clamp(config.threads, 1, 256);
    if (threads == 1 || total_runs < 2) {
        run_range(0, total_runs);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (total_runs + threads - 1) / threads;
        for (int w = 0; w < threads; ++w) {
            const std::size_t begin = std::min(total_runs, w * chunk);
            const std::size_t end = std::min(total_runs, begin + chunk);
            if (begin < end) pool.emplace_back(run_range, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    report.loglik_violations = violations.load();
    report.non_converged = non_converged.load();
    return report;
}

}  // namespace ringdist
