#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include <expmod/marginal.hpp>
#include <expmod/numeric.hpp>

using namespace expmod;

namespace {

template <class T>
std::vector<std::vector<T>> dense(const TransitionMatrix<T>& M) {
    std::vector<std::vector<T>> out(M.dim, std::vector<T>(M.dim, T(0)));
    for (std::size_t b = 0; b < M.dim; ++b)
        for (const auto& [a, w] : M.rows[b]) out[b][a] = w;
    return out;
}

}  // namespace

TEST_CASE("order-zero chain is the two-state mutation kernel") {
    auto M = build_transition<double>(0, 0.3);
    auto D = dense(M);
    CHECK(D[0][0] == Catch::Approx(0.7).margin(1e-15));
    CHECK(D[0][1] == Catch::Approx(0.3).margin(1e-15));
    CHECK(D[1][0] == Catch::Approx(0.3).margin(1e-15));
    CHECK(D[1][1] == Catch::Approx(0.7).margin(1e-15));

    auto R = dense(build_transition<rational>(0, rational(3, 10)));
    CHECK(R[0][0] == rational(7, 10));
    CHECK(R[0][1] == rational(3, 10));
}

TEST_CASE("rows are stochastic") {
    auto M = build_transition<double>(3, 0.3);
    for (const auto& row : M.rows) {
        double sum = 0;
        for (const auto& [a, w] : row) {
            CHECK(w >= 0.0);
            sum += w;
        }
        CHECK(sum == Catch::Approx(1.0).epsilon(0).margin(1e-14));
    }
    auto R = build_transition<rational>(3, rational(3, 10));
    for (const auto& row : R.rows) {
        rational sum(0);
        for (const auto& [a, w] : row) sum += w;
        CHECK(sum == 1);
    }
}

TEST_CASE("early-stopping enumeration matches full brute force") {
    for (int ell = 0; ell <= 4; ++ell) {
        auto fast = dense(build_transition<rational>(ell, rational(1, 2)));
        auto slow = dense(brute_force_transition<rational>(ell, rational(1, 2)));
        CHECK(fast == slow);
    }
    auto fast = dense(build_transition<double>(4, 0.37));
    auto slow = dense(brute_force_transition<double>(4, 0.37));
    for (std::size_t b = 0; b < fast.size(); ++b)
        for (std::size_t a = 0; a < fast.size(); ++a)
            CHECK(fast[b][a] == Catch::Approx(slow[b][a]).epsilon(0).margin(1e-15));
}

TEST_CASE("order-zero stationary vector is uniform") {
    auto M = build_transition<double>(0, 0.3);
    auto mu = stationary(M).distribution;
    CHECK(mu.weights[0] == Catch::Approx(0.5).margin(1e-13));
    CHECK(mu.weights[1] == Catch::Approx(0.5).margin(1e-13));
}

TEST_CASE("order-one exact stationary vector at p = 1/10") {
    auto M = build_transition<rational>(1, rational(1, 10));
    auto mu = stationary_exact(M);
    // Columns are indexed first-symbol-first: 0b10 is the word 01.
    CHECK(mu[0b00] == mu[0b11]);
    CHECK(mu[0b10] == mu[0b01]);
    CHECK(mu[0b00] + mu[0b10] == rational(1, 2));
    CHECK(mu[0b00] + mu[0b11] - rational(1, 2) == rational(2) * rational(5, 24));
    MarginalDistribution<rational> dist{1, mu};
    CHECK(correlation_from_marginal(dist, 1) == rational(5, 24));
    CHECK(correlation_from_marginal(dist, 0) == rational(1, 4));

    auto fl = stationary(build_transition<double>(1, 0.1)).distribution;
    CHECK(fl.weights[0b00] == Catch::Approx(11.0 / 24).margin(1e-13));
    CHECK(fl.weights[0b10] == Catch::Approx(1.0 / 24).margin(1e-13));
}

TEST_CASE("exact and iterated stationary vectors agree") {
    auto exact = stationary_exact(build_transition<rational>(4, rational(1, 4)));
    auto iter = stationary(build_transition<double>(4, 0.25)).distribution;
    for (std::size_t i = 0; i < exact.size(); ++i)
        CHECK(iter.weights[i] == Catch::Approx(exact[i].convert_to<double>()).margin(1e-13));
}

TEST_CASE("stationary vectors are flip symmetric with uniform site marginals") {
    for (double p : {0.1, 0.45, 0.8}) {
        auto M = build_transition<double>(3, p);
        auto mu = stationary(M).distribution;
        for (std::uint32_t a = 0; a < M.dim; ++a) {
            CHECK(mu.weights[a] == Catch::Approx(mu.weights[flip_index(a, 4)]).margin(1e-13));
            CHECK(mu.weights[a] > 0.0);
        }
        for (int site = 0; site <= 3; ++site) {
            double mass = 0;
            for (std::uint32_t a = 0; a < M.dim; ++a)
                if ((a >> site) & 1u) mass += mu.weights[a];
            CHECK(mass == Catch::Approx(0.5).margin(1e-13));
        }
    }
}

TEST_CASE("least strictly positive power of the support") {
    for (int ell = 0; ell <= 3; ++ell) {
        auto M = build_transition<double>(ell, 0.5);
        CHECK(primitivity_certificate(transition_support(M)) ==
              static_cast<std::size_t>(ell) + 1);
    }
}

TEST_CASE("support does not depend on the mutation probability") {
    auto a = transition_support(build_transition<double>(4, 0.01));
    auto b = transition_support(build_transition<double>(4, 0.5));
    CHECK(a == b);
}

TEST_CASE("consecutive stationary orders marginalize consistently") {
    auto hi = stationary(build_transition<double>(2, 0.3)).distribution;
    auto lo = stationary(build_transition<double>(1, 0.3)).distribution;
    CHECK(compatibility_residual(hi, lo) <= 1e-12);

    MarginalDistribution<double> uhi{1, {0.25, 0.25, 0.25, 0.25}};
    MarginalDistribution<double> ulo{0, {0.5, 0.5}};
    CHECK(compatibility_residual(uhi, ulo) == 0.0);

    auto hi6 = stationary(build_transition<double>(6, 0.45)).distribution;
    auto lo5 = stationary(build_transition<double>(5, 0.45)).distribution;
    CHECK(compatibility_residual(hi6, lo5) <= 1e-10);

    CHECK_THROWS_AS(compatibility_residual(hi6, ulo), std::invalid_argument);
}

TEST_CASE("pair correlation approaches 1/4 as mutation vanishes") {
    auto mu = stationary_exact(build_transition<rational>(2, rational(1, 1000)));
    auto c = correlation_from_marginal(MarginalDistribution<rational>{2, mu}, 2);
    CHECK(c.convert_to<double>() > 0.24);
    CHECK(c.convert_to<double>() < 0.25);
}

TEST_CASE("distance beyond the order is rejected") {
    MarginalDistribution<double> mu{1, {0.25, 0.25, 0.25, 0.25}};
    CHECK_THROWS_AS(correlation_from_marginal(mu, 2), std::out_of_range);
    CHECK_THROWS_AS(build_transition<double>(13, 0.5), std::length_error);
}

TEST_CASE("distance to stationarity shrinks from the all-ones start") {
    auto M = build_transition<double>(3, 0.2);
    auto target = stationary(M).distribution.weights;
    std::vector<double> mu(M.dim, 0.0);
    mu[M.dim - 1] = 1.0;  // point mass at 1111
    double prev = total_variation(mu, target);
    bool reached = false;
    for (int t = 1; t <= 400; ++t) {
        mu = apply_to_distribution(M, mu);
        double tv = total_variation(mu, target);
        CHECK(tv <= prev + 1e-12);
        prev = tv;
        if (tv < 1e-6) {
            reached = true;
            break;
        }
    }
    CHECK(reached);
}
