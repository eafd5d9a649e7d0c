#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ringdist/counts.hpp"
#include "ringdist/dependence.hpp"
#include "ringdist/model.hpp"
#include "ringdist/rng.hpp"
#include "ringdist/simulate.hpp"

using namespace ringdist;
using Catch::Approx;

TEST_CASE("sampling is deterministic in the seed") {
    const ModelSpec spec = ModelSpec::from_rho(3, 0.6);
    const CountTable a = sample(spec, 5000, 42, true);
    const CountTable b = sample(spec, 5000, 42, true);
    CHECK(a.counts == b.counts);
    CHECK(a.total() == 5000.0);

    const CountTable c = sample(spec, 5000, 43, true);
    CHECK(a.counts != c.counts);

    // dropping the root column is a pure projection of the same draws
    const CountTable no_root = sample(spec, 5000, 42, false);
    CHECK(no_root.counts == drop_root(a).counts);

    CHECK_THROWS_AS(sample(spec, 0, 1), std::domain_error);
}

TEST_CASE("independent sampling shows no pairwise dependence") {
    const CountTable data = sample(ModelSpec::from_rho(3, 0.0), 10000, 7, false);
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b)
            CHECK(std::abs(csd(pair_margin(data, a, b))) < 0.1);
}

TEST_CASE("leaf-root dependence concentrates at rho") {
    const CountTable data = sample(ModelSpec::from_rho(4, 0.6), 100000, 11, true);
    for (int q = 0; q < 4; ++q)
        CHECK(csd(pair_margin(data, q, 4)) == Approx(0.6).margin(0.02));

    // and the sampled joint matches the exact table cellwise
    const ProbVector pv = joint_vector_direct(ModelSpec::from_rho(4, 0.6));
    for (std::size_t t = 0; t < pv.size(); ++t)
        CHECK(data.counts[t] / 100000.0 == Approx(pv.entries[t]).margin(0.01));
}

TEST_CASE("replicate seeds are order-independent and well spread") {
    CHECK(derive_seed(1, 0, 0) != derive_seed(1, 0, 1));
    CHECK(derive_seed(1, 0, 0) != derive_seed(1, 1, 0));
    CHECK(derive_seed(1, 0, 1) != derive_seed(2, 0, 1));
    CHECK(derive_seed(5, 3, 7) == derive_seed(5, 3, 7));
}

TEST_CASE("simulation harness is reproducible across thread counts") {
    SimulationConfig config;
    config.leaves = 3;
    config.rhos = {0.4, 0.7};
    config.sample_sizes = {200};
    config.replicates = 12;
    config.tolerances = {1e-4, 1e-7};
    config.master_seed = 99;

    config.threads = 1;
    const SimulationReport serial = run_simulation(config);
    config.threads = 4;
    const SimulationReport parallel = run_simulation(config);

    REQUIRE(serial.cells.size() == parallel.cells.size());
    for (std::size_t c = 0; c < serial.cells.size(); ++c)
        for (std::size_t j = 0; j < serial.cells[c].by_tolerance.size(); ++j) {
            CHECK(serial.cells[c].by_tolerance[j].rho_hat ==
                  parallel.cells[c].by_tolerance[j].rho_hat);
            CHECK(serial.cells[c].by_tolerance[j].iterations ==
                  parallel.cells[c].by_tolerance[j].iterations);
        }
    CHECK(serial.loglik_violations == 0);
    CHECK(serial.non_converged == 0);
}

TEST_CASE("simulation on an independent cell flags the estimates") {
    SimulationConfig config;
    config.leaves = 3;
    config.rhos = {0.0};
    config.sample_sizes = {2000};
    config.replicates = 8;
    config.tolerances = {1e-4};
    config.master_seed = 3;
    const SimulationReport report = run_simulation(config);
    // the null estimate scales like n^(-1/4), so "near zero" is coarse
    for (double rho_hat : report.cells[0].by_tolerance[0].rho_hat)
        CHECK(rho_hat < 0.2);
}

TEST_CASE("quantile helper uses nearest rank") {
    const std::vector<double> v{5, 1, 4, 2, 3};
    CHECK(quantile(v, 0.0) == 1.0);
    CHECK(quantile(v, 0.5) == 3.0);
    CHECK(quantile(v, 0.95) == 5.0);
    CHECK(quantile(v, 1.0) == 5.0);
    CHECK(quantile(std::vector<double>{7.0}, 0.5) == 7.0);
    CHECK_THROWS_AS(quantile({}, 0.5), std::domain_error);
}
