#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "ringdist/model.hpp"
#include "ringdist/transforms.hpp"

using namespace ringdist;
using Catch::Approx;

namespace {

void check_close(const std::vector<double>& got, const std::vector<double>& want,
                 double tol = 1e-13) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got[i] == Approx(want[i]).margin(tol));
}

}  // namespace

TEST_CASE("kron_apply basics") {
    CHECK(kron_apply(mats::E, std::vector<double>{1.0, 0.0}, 1) ==
          std::vector<double>{1.0, 1.0});

    const std::vector<double> x{0.3, 0.1, 0.4, 0.2};
    CHECK(kron_apply(mats::identity, x, 2) == x);

    CHECK_THROWS_AS(kron_apply(mats::B, std::vector<double>{1.0, 2.0, 3.0}, 2),
                    std::domain_error);
}

TEST_CASE("kron_apply against the dense matrix, mixed factors") {
    const std::vector<Mat2> factors{mats::B, mats::E, mats::T_sym, mats::B_inv, mats::E_inv};
    const ProbVector pi = oracle::random_positive(5, 11);
    check_close(kron_apply(factors, pi.entries),
                oracle::dense_apply(oracle::dense_kron(factors), pi.entries));
}

TEST_CASE("raw moments") {
    const double alpha = 3.0, c2 = 32.0;
    const ProbVector pv = joint_vector_direct(ModelSpec::from_alpha(2, alpha));
    const InteractionVector m = raw_moments(pv);
    const double beta = (1.0 + alpha * alpha) / c2;
    const double gamma = alpha * (1.0 + alpha) / c2;
    const double delta = alpha * alpha / c2;
    check_close(m.entries, {1.0, 0.5, 0.5, beta, 0.5, gamma, gamma, delta});

    const InteractionVector indep =
        raw_moments(joint_vector_direct(ModelSpec::from_rho(1, 0.0)));
    check_close(indep.entries, {1.0, 0.5, 0.5, 0.25});

    const ProbVector p4 = joint_vector_direct(ModelSpec::from_alpha(3, 3.0));
    check_close(raw_moments(p4).entries, oracle::dense_apply(mats::B, 4, p4.entries));
}

TEST_CASE("central moments") {
    const double rho = 0.5, gamma = rho / 4.0;
    const ProbVector pv = joint_vector_direct(ModelSpec::from_rho(2, rho));
    const InteractionVector mu = central_moments(pv);
    check_close(mu.entries, {1.0, 0.0, 0.0, 4.0 * gamma * gamma, 0.0, gamma, gamma, 0.0});
    CHECK(mu.entries[3] == Approx(0.0625).margin(1e-15));
    CHECK(mu.entries[5] == Approx(0.125).margin(1e-15));

    const InteractionVector indep =
        central_moments(joint_vector_direct(ModelSpec::from_rho(3, 0.0)));
    CHECK(indep.entries[0] == Approx(1.0));
    for (std::size_t i = 1; i < indep.entries.size(); ++i)
        CHECK(indep.entries[i] == Approx(0.0).margin(1e-15));

    // asymmetric tables are rejected by the symmetric transform but handled
    // by the general one
    ProbVector skew = oracle::random_positive(2, 5);
    CHECK_THROWS_AS(central_moments(skew), std::domain_error);
    const InteractionVector general = central_moments_general(skew);
    CHECK(general.entries[0] == Approx(1.0).margin(1e-12));
    CHECK(general.entries[1] == Approx(0.0).margin(1e-12));  // first central moment
}

TEST_CASE("central moments from raw moments") {
    const ProbVector pv = joint_vector_direct(ModelSpec::from_alpha(2, 3.0));
    check_close(central_from_raw(raw_moments(pv)).entries, central_moments(pv).entries);

    for (std::uint64_t seed : {1, 2, 3}) {
        const ProbVector pi = oracle::random_joint_symmetric(4, seed);
        check_close(central_from_raw(raw_moments(pi)).entries,
                    central_moments(pi).entries, 1e-12);
    }

    const ProbVector margin = joint_vector_product(ModelSpec::from_rho(1, 0.3));
    ProbVector one{1, false, {margin.entries[0] + margin.entries[2],
                              margin.entries[1] + margin.entries[3]}};
    check_close(central_from_raw(raw_moments(one)).entries, {1.0, 0.0});
}

TEST_CASE("log-linear interactions") {
    const double alpha = 3.0;
    const ModelSpec spec = ModelSpec::from_alpha(3, alpha);
    const InteractionVector lam = loglinear_interactions(joint_vector_direct(spec));
    const double gamma = 0.5 * std::log(alpha);
    const double constant = 3.0 * gamma - std::log(spec.norm_const());
    REQUIRE(lam.entries.size() == 16);
    for (std::size_t i = 0; i < 16; ++i) {
        if (i == 0)
            CHECK(lam.entries[i] == Approx(constant).margin(1e-13));
        else if (i == 0b1001 || i == 0b1010 || i == 0b1100)  // {q, L} pairs
            CHECK(lam.entries[i] == Approx(gamma).margin(1e-13));
        else
            CHECK(lam.entries[i] == Approx(0.0).margin(1e-13));
    }

    CHECK(0.5 * std::log(9.0) == Approx(1.0986).margin(5e-5));

    const InteractionVector indep =
        loglinear_interactions(joint_vector_direct(ModelSpec::from_rho(1, 0.0)));
    for (std::size_t i = 1; i < indep.entries.size(); ++i)
        CHECK(indep.entries[i] == Approx(0.0).margin(1e-14));

    ProbVector with_zero{1, false, {0.0, 1.0}};
    CHECK_THROWS_AS(loglinear_interactions(with_zero), std::domain_error);
}

TEST_CASE("linear interactions") {
    const double rho = 0.5;
    const InteractionVector xi =
        linear_interactions(joint_vector_direct(ModelSpec::from_rho(3, rho)));
    const double r2 = rho * rho, r3 = rho * rho * rho;
    check_close(xi.entries,
                {1, 0, 0, r2, 0, r2, r2, 0, 0, rho, rho, 0, rho, 0, 0, r3});

    const InteractionVector indep =
        linear_interactions(joint_vector_direct(ModelSpec::from_rho(4, 0.0)));
    CHECK(indep.entries[0] == Approx(1.0));
    for (std::size_t i = 1; i < indep.entries.size(); ++i)
        CHECK(indep.entries[i] == Approx(0.0).margin(1e-15));

    // five variables: even-order terms with the root are rho^(k-1), without
    // it rho^k, odd-order terms vanish
    const ModelSpec spec = ModelSpec::from_rho(4, 0.6);
    const InteractionVector xi5 = linear_interactions(joint_vector_direct(spec));
    for (std::size_t s = 1; s < xi5.entries.size(); ++s) {
        const int size = std::popcount(s);
        const bool with_root = (s >> 4) & 1;
        double want = 0.0;
        if (size % 2 == 0) want = std::pow(0.6, with_root ? size - 1 : size);
        CHECK(xi5.entries[s] == Approx(want).margin(1e-12));
    }
}

TEST_CASE("linear interactions are the standardized moments of the table") {
    for (int leaves : {2, 3, 4, 5}) {
        for (double rho : {0.0, 0.4, 0.8}) {
            const ProbVector pv = joint_vector_direct(ModelSpec::from_rho(leaves, rho));
            const InteractionVector xi = linear_interactions(pv);
            for (std::size_t s = 0; s < xi.entries.size(); ++s)
                CHECK(xi.entries[s] == Approx(oracle::product_moment(pv, s)).margin(1e-12));
        }
    }
    // on arbitrary jointly symmetric tables, even subsets agree with the
    // enumerated product moments
    const ProbVector pi = oracle::random_joint_symmetric(5, 77);
    const InteractionVector xi = linear_interactions(pi);
    for (std::size_t s = 0; s < xi.entries.size(); ++s)
        if (std::popcount(s) % 2 == 0)
            CHECK(xi.entries[s] == Approx(oracle::product_moment(pi, s)).margin(1e-12));
}

TEST_CASE("leaf linear interactions") {
    const double rho = 0.5;
    const InteractionVector xi = leaf_linear_interactions(ModelSpec::from_rho(3, rho));
    check_close(xi.entries, {1, 0, 0, rho * rho, 0, rho * rho, rho * rho, 0});

    const InteractionVector zero = leaf_linear_interactions(ModelSpec::from_rho(4, 0.0));
    CHECK(zero.entries[0] == 1.0);
    for (std::size_t i = 1; i < zero.entries.size(); ++i) CHECK(zero.entries[i] == 0.0);

    const InteractionVector q4 = leaf_linear_interactions(ModelSpec::from_rho(4, 0.5));
    CHECK(q4.entries[0b1111] == Approx(0.0625).margin(1e-15));
    // brute-force moment of the marginal table
    CHECK(q4.entries[0b1111] ==
          Approx(oracle::product_moment(marginal_leaves(ModelSpec::from_rho(4, 0.5)), 0b1111))
              .margin(1e-13));

    // matches the direct transform of the leaf margin, and the no-root slice
    // of the full vector
    for (double r : {0.25, 0.6}) {
        const ModelSpec spec = ModelSpec::from_rho(4, r);
        const InteractionVector closed = leaf_linear_interactions(spec);
        const InteractionVector direct = linear_interactions(marginal_leaves(spec));
        check_close(closed.entries, direct.entries, 1e-12);
        const InteractionVector full = linear_interactions(joint_vector_direct(spec));
        for (std::size_t s = 0; s < closed.entries.size(); ++s)
            CHECK(closed.entries[s] == Approx(full.entries[s]).margin(1e-12));
    }
}

TEST_CASE("leaf log-linear interactions") {
    const InteractionVector lam = leaf_loglinear(ModelSpec::from_alpha(3, 3.0));
    REQUIRE(lam.entries.size() == 8);
    CHECK(lam.entries[0b011] > 0.0);
    CHECK(lam.entries[0b011] == Approx(lam.entries[0b101]).margin(1e-14));
    CHECK(lam.entries[0b011] == Approx(lam.entries[0b110]).margin(1e-14));
    for (std::size_t s : {std::size_t{1}, std::size_t{2}, std::size_t{4}, std::size_t{7}})
        CHECK(lam.entries[s] == Approx(0.0).margin(1e-12));

    const InteractionVector indep = leaf_loglinear(ModelSpec::from_rho(3, 0.0));
    for (std::size_t i = 1; i < indep.entries.size(); ++i)
        CHECK(indep.entries[i] == Approx(0.0).margin(1e-14));

    // two leaves: lambda_12 = (1/4) log{(1+alpha^2)^2 / (4 alpha^2)}
    for (double alpha : {3.0, 9.0}) {
        const InteractionVector l2 = leaf_loglinear(ModelSpec::from_alpha(2, alpha));
        const double want =
            0.25 * std::log((1.0 + alpha * alpha) * (1.0 + alpha * alpha) /
                            (4.0 * alpha * alpha));
        CHECK(l2.entries[0b11] == Approx(want).margin(1e-13));
        CHECK(l2.entries[0b01] == Approx(0.0).margin(1e-13));
        CHECK(l2.entries[0b10] == Approx(0.0).margin(1e-13));
    }

    // zero entries sit at exactly the odd-size subsets
    const InteractionVector q4 = leaf_loglinear(ModelSpec::from_alpha(4, 5.0));
    for (std::size_t s = 1; s < q4.entries.size(); ++s) {
        if (std::popcount(s) % 2 == 1)
            CHECK(q4.entries[s] == Approx(0.0).margin(1e-12));
        else
            CHECK(std::abs(q4.entries[s]) > 1e-6);
    }
}

TEST_CASE("inverse transforms round-trip") {
    const ProbVector pv = joint_vector_direct(ModelSpec::from_alpha(3, 3.0));
    for (MomentKind kind : {MomentKind::raw, MomentKind::central, MomentKind::loglinear,
                            MomentKind::linear}) {
        InteractionVector iv;
        switch (kind) {
            case MomentKind::raw: iv = raw_moments(pv); break;
            case MomentKind::central: iv = central_moments(pv); break;
            case MomentKind::loglinear: iv = loglinear_interactions(pv); break;
            case MomentKind::linear: iv = linear_interactions(pv); break;
        }
        const ProbVector back = inverse_transform(iv);
        CHECK(back.root_included == pv.root_included);
        check_close(back.entries, pv.entries, 1e-11);
    }

    // unit interaction vector inverts to the uniform table
    InteractionVector unit{3, true, MomentKind::linear, {1, 0, 0, 0, 0, 0, 0, 0}};
    const ProbVector uniform = inverse_transform(unit);
    for (double v : uniform.entries) CHECK(v == Approx(0.125).margin(1e-15));

    // the closed-form raw moments invert to the exact table
    const double alpha = 3.0, c2 = 32.0;
    InteractionVector m3{3, true, MomentKind::raw,
                         {1.0, 0.5, 0.5, (1 + alpha * alpha) / c2, 0.5,
                          alpha * (1 + alpha) / c2, alpha * (1 + alpha) / c2,
                          alpha * alpha / c2}};
    const double expected[] = {9, 3, 3, 1, 1, 3, 3, 9};
    const ProbVector back = inverse_transform(m3);
    for (int t = 0; t < 8; ++t)
        CHECK(back.entries[t] == Approx(expected[t] / 32.0).margin(1e-14));
}

TEST_CASE("all transforms match the dense oracle up to six variables") {
    for (int p = 1; p <= 6; ++p) {
        const ProbVector pi = oracle::random_joint_symmetric(p, 100 + p);
        check_close(raw_moments(pi).entries, oracle::dense_apply(mats::B, p, pi.entries),
                    1e-12);
        check_close(central_moments(pi).entries,
                    oracle::dense_apply(mats::T_sym, p, pi.entries), 1e-12);
        check_close(linear_interactions(pi).entries,
                    oracle::dense_apply(mats::E, p, pi.entries), 1e-12);
        std::vector<double> logp(pi.entries.size());
        for (std::size_t t = 0; t < logp.size(); ++t) logp[t] = std::log(pi.entries[t]);
        check_close(loglinear_interactions(pi).entries,
                    oracle::dense_apply(mats::E_inv, p, logp), 1e-12);
        check_close(central_from_raw(raw_moments(pi)).entries,
                    oracle::dense_apply(mats::T_from_B, p, raw_moments(pi).entries), 1e-12);
    }
}

TEST_CASE("raw, central and linear transforms are linear in the table") {
    const ProbVector a = oracle::random_joint_symmetric(4, 21);
    const ProbVector b = oracle::random_joint_symmetric(4, 22);
    const double w = 0.3;
    ProbVector mix{4, false, std::vector<double>(a.entries.size())};
    for (std::size_t t = 0; t < mix.entries.size(); ++t)
        mix.entries[t] = w * a.entries[t] + (1.0 - w) * b.entries[t];

    const auto combine = [w](const std::vector<double>& u, const std::vector<double>& v) {
        std::vector<double> out(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) out[i] = w * u[i] + (1.0 - w) * v[i];
        return out;
    };
    check_close(raw_moments(mix).entries,
                combine(raw_moments(a).entries, raw_moments(b).entries), 1e-13);
    check_close(central_moments(mix).entries,
                combine(central_moments(a).entries, central_moments(b).entries), 1e-13);
    check_close(linear_interactions(mix).entries,
                combine(linear_interactions(a).entries, linear_interactions(b).entries),
                1e-13);
}
