#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <set>
#include <vector>

#include <expmod/correlation.hpp>
#include <expmod/montecarlo.hpp>

using namespace expmod;

TEST_CASE("counter generator: purity and rough uniformity") {
    CHECK(counter_hash(1, 2, 3, 4) == counter_hash(1, 2, 3, 4));
    std::set<std::uint64_t> seen;
    for (std::uint64_t pos = 0; pos < 100; ++pos) seen.insert(counter_hash(7, 1, 0, pos));
    CHECK(seen.size() == 100);

    double acc = 0;
    for (std::uint64_t s = 0; s < 10000; ++s) {
        double u = uniform01(counter_hash(42, s, 0, 0));
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        acc += u;
    }
    CHECK(acc / 10000.0 == Catch::Approx(0.5).margin(0.02));
}

TEST_CASE("simulated prefixes: reproducibility and degenerate cases") {
    auto a = simulate_prefix(0.3, 40, 17, 99, 5);
    auto b = simulate_prefix(0.3, 40, 17, 99, 5);
    REQUIRE(a.size() == 17);
    CHECK(a == b);
    CHECK(simulate_prefix(0.3, 40, 17, 99, 6) != a);

    // p = 0: no symbol ever flips, the word stays all ones.
    for (std::uint8_t sym : simulate_prefix(0.0, 10, 32, 1, 0)) CHECK(sym == 1);

    // Slow growth still terminates; the word keeps evolving past the step
    // count until the requested length exists.
    auto slow = simulate_prefix(0.9, 5, 9, 3, 0);
    CHECK(slow.size() == 9);

    CHECK_THROWS_AS(simulate_prefix(1.0, 10, 2, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(simulate_prefix(-0.1, 10, 2, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(simulate_prefix(0.3, -1, 2, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(simulate_prefix(0.3, 10, 0, 1, 0), std::invalid_argument);
}

TEST_CASE("ensemble estimates are bitwise identical for any worker count") {
    SimulationOptions opt;
    opt.seed = 2026;
    opt.samples = 4096;
    std::vector<long long> ds{1, 3, 8};

    setenv("EXPMOD_THREADS", "1", 1);
    auto serial = estimate_correlations(0.25, ds, opt);
    setenv("EXPMOD_THREADS", "7", 1);
    auto threaded = estimate_correlations(0.25, ds, opt);
    unsetenv("EXPMOD_THREADS");

    REQUIRE(serial.size() == 3);
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].match_fraction == threaded[i].match_fraction);
        CHECK(serial[i].value == threaded[i].value);
        CHECK(serial[i].value == (serial[i].match_fraction - 0.5) / 2.0);
    }
}

TEST_CASE("ensemble estimates bracket the exact correlations") {
    SimulationOptions opt;
    opt.seed = 20260814;
    opt.samples = 20000;
    std::vector<long long> ds;
    for (long long n = 1; n <= 16; ++n) ds.push_back(n);
    auto est = estimate_correlations(0.1, ds, opt);
    auto exact = correlation_series(parse_probability("0.1"), 16);

    int hits = 0;
    for (const auto& e : est) {
        CHECK(e.half_width == Catch::Approx(1.96 / (4.0 * std::sqrt(20000.0))));
        double truth = static_cast<double>(exact.values[static_cast<std::size_t>(e.distance)]);
        if (std::fabs(e.value - truth) <= e.half_width) ++hits;
    }
    // Deterministic given the pinned seed; comfortably above the 95% rate.
    CHECK(hits == 16);

    // p = 0 collapses the estimator to the exact constant 1/4.
    auto frozen = estimate_correlations(0.0, {5}, opt);
    CHECK(frozen[0].match_fraction == 1.0);
    CHECK(frozen[0].value == 0.25);

    CHECK_THROWS_AS(estimate_correlations(0.1, {}, opt), std::invalid_argument);
    CHECK_THROWS_AS(estimate_correlations(0.1, {0}, opt), std::invalid_argument);
    CHECK_THROWS_AS(estimate_correlations(1.0, {1}, opt), std::invalid_argument);
    SimulationOptions bad = opt;
    bad.samples = 0;
    CHECK_THROWS_AS(estimate_correlations(0.1, {1}, bad), std::invalid_argument);
}

TEST_CASE("snapshot ensembles converge to the exact stationary marginal") {
    SimulationOptions opt;
    opt.seed = 77;
    opt.samples = 50000;
    auto scan = convergence_scan(0.3, 3, {1, 2, 4, 8, 16, 32}, opt);

    REQUIRE(scan.tv.size() == 6);
    // After one round the word has at most 2 symbols, so every sample is
    // still short of the 4-symbol snapshot.
    CHECK(scan.short_fraction[0] == 1.0);
    CHECK(scan.tv[0] == 1.0);
    CHECK(scan.short_fraction[5] == 0.0);
    for (std::size_t k = 1; k < 6; ++k) CHECK(scan.short_fraction[k] <= scan.short_fraction[k - 1]);
    CHECK(scan.tv[5] < scan.tv[1]);
    // By the last checkpoint only sampling noise remains.
    CHECK(scan.tv[5] < 0.01);

    auto again = convergence_scan(0.3, 3, {1, 2, 4, 8, 16, 32}, opt);
    CHECK(scan.tv == again.tv);

    CHECK_THROWS_AS(convergence_scan(0.3, 13, {1}, opt), std::length_error);
    CHECK_THROWS_AS(convergence_scan(0.3, 3, {}, opt), std::invalid_argument);
    CHECK_THROWS_AS(convergence_scan(0.3, 3, {4, 2}, opt), std::invalid_argument);
    CHECK_THROWS_AS(convergence_scan(0.3, 3, {0, 2}, opt), std::invalid_argument);
}

TEST_CASE("first symbol dynamics: flips at rate p, mixes to a fair coin") {
    const double p = 0.2;
    const long long t = 25;
    const int N = 20000;
    int flips = 0, ones = 0;
    for (int s = 0; s < N; ++s) {
        auto now = simulate_prefix(p, t, 1, 31337, static_cast<std::uint64_t>(s));
        auto next = simulate_prefix(p, t + 1, 1, 31337, static_cast<std::uint64_t>(s));
        flips += now[0] != next[0] ? 1 : 0;
        ones += now[0];
    }
    // The leading symbol flips exactly when its own substitution comes up
    // modify, so the one-step flip frequency estimates p itself.
    CHECK(static_cast<double>(flips) / N == Catch::Approx(p).margin(0.02));
    CHECK(static_cast<double>(ones) / N == Catch::Approx(0.5).margin(0.02));
}

TEST_CASE("sample complexity explodes where the correlation nearly vanishes") {
    auto hard = sample_complexity(parse_probability("0.4"), 32);
    CHECK(hard.correlation == Catch::Approx(-5.398341717e-6).epsilon(1e-6));
    CHECK(hard.samples_needed == Catch::Approx(8.23894e9).epsilon(1e-4));

    auto easy = sample_complexity(parse_probability("0.1"), 1);
    CHECK(easy.correlation == Catch::Approx(1.0 / 4.8).epsilon(1e-12));
    CHECK(easy.samples_needed < 10.0);
    CHECK(hard.samples_needed / easy.samples_needed > 1e9);

    CHECK_THROWS_AS(sample_complexity(parse_probability("0.1"), 0), std::invalid_argument);
}
