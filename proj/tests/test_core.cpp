#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <expmod/numeric.hpp>
#include <expmod/reachability.hpp>
#include <expmod/threads.hpp>
#include <expmod/word.hpp>

using namespace expmod;

TEST_CASE("single-symbol images") {
    CHECK(apply_local(Sub::expand, 0).to_string() == "00");
    CHECK(apply_local(Sub::expand, 1).to_string() == "11");
    CHECK(apply_local(Sub::modify, 0).to_string() == "1");
    CHECK(apply_local(Sub::modify, 1).to_string() == "0");
}

TEST_CASE("global substitution concatenates local images") {
    Word w = Word::from_string("0110");
    auto s = subs_from_string("emme");
    CHECK(apply_global(s, w).to_string() == "000000");
    CHECK(apply_global(subs_from_string("emem"), w).to_string() == "000111");

    CHECK(apply_global(subs_from_string("ee"), Word::from_string("01")).to_string() == "0011");
    CHECK(apply_global(subs_from_string("mm"), Word::from_string("01")).to_string() == "10");
}

TEST_CASE("substitution word shorter than input is rejected") {
    CHECK_THROWS_AS(apply_global(subs_from_string("e"), Word::from_string("01")), std::length_error);
}

TEST_CASE("unused trailing substitution symbols are ignored") {
    auto s = subs_from_string("meee");
    CHECK(apply_global(s, Word::from_string("10")).to_string() == "000");
}

TEST_CASE("word accessors round-trip") {
    Word w;
    CHECK(w.empty());
    for (int i = 0; i < 200; ++i) w.push_back(i % 3 == 0);
    CHECK(w.size() == 200);
    for (int i = 0; i < 200; ++i) CHECK(w.get(i) == (i % 3 == 0 ? 1 : 0));
    Word copy = Word::from_string(w.to_string());
    CHECK(copy == w);
    w.truncate(67);
    CHECK(w.size() == 67);
    CHECK(w.is_prefix_of(copy));
    CHECK(w.flipped().flipped() == w);
}

TEST_CASE("random substitutions: length, prefix monotonicity, flip equivariance") {
    std::mt19937_64 rng(12345);
    for (int trial = 0; trial < 400; ++trial) {
        std::size_t len = 1 + rng() % 24;
        Word w(len, 0);
        SubstitutionWord s;
        std::size_t expansions = 0;
        for (std::size_t i = 0; i < len; ++i) {
            w.set(i, rng() & 1);
            bool expand = rng() & 1;
            s.push_back(expand ? Sub::expand : Sub::modify);
            expansions += expand;
        }
        Word out = apply_global(s, w);
        CHECK(out.size() == len + expansions);

        // Images of flipped inputs are flipped images.
        CHECK(apply_global(s, w.flipped()) == out.flipped());

        // The first L output symbols depend only on the first L input symbols.
        std::size_t cut = 1 + rng() % len;
        Word head = w;
        head.truncate(cut);
        SubstitutionWord shead(s.begin(), s.begin() + static_cast<long>(cut));
        Word out_head = apply_global(shead, head);
        out_head.truncate(cut);
        Word out_cut = out;
        out_cut.truncate(cut);
        CHECK(out_head == out_cut);
    }
}

TEST_CASE("reachability witnesses for single symbols") {
    for (int x = 0; x <= 1; ++x) {
        Word a(1, x);
        auto same = reachability_witness(a, a);
        REQUIRE(same.size() == 1);
        CHECK(same[0] == SubstitutionWord{Sub::expand});
        auto diff = reachability_witness(a, a.flipped());
        REQUIRE(diff.size() == 1);
        CHECK(diff[0] == SubstitutionWord{Sub::modify});
    }
}

TEST_CASE("reachability witness replays to the target prefix") {
    std::mt19937_64 rng(777);
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t len = 1 + rng() % 8;
        Word a(len, 0), b(len, 0);
        for (std::size_t i = 0; i < len; ++i) {
            a.set(i, rng() & 1);
            b.set(i, rng() & 1);
        }
        auto witness = reachability_witness(a, b);
        for (const auto& s : witness) CHECK(s.size() == len);
        CHECK(replay_witness(a, witness) == b);
    }
}

TEST_CASE("witness endpoints must agree in length") {
    CHECK_THROWS_AS(reachability_witness(Word::from_string("01"), Word::from_string("011")),
                    std::invalid_argument);
}

TEST_CASE("probability parsing accepts decimals and fractions") {
    auto p = parse_probability("0.35");
    CHECK_FALSE(p.from_fraction);
    CHECK(p.exact == rational(7, 20));
    auto q = parse_probability("1/10");
    CHECK(q.from_fraction);
    CHECK(q.exact == rational(1, 10));
    CHECK(q.as_double() == Catch::Approx(0.1));
    CHECK(parse_probability(".5").exact == rational(1, 2));
    CHECK_THROWS_AS(parse_probability("0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_probability("1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_probability("3/2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_probability("abc"), std::invalid_argument);
    CHECK_THROWS_AS(parse_probability("-0.2"), std::invalid_argument);
}

TEST_CASE("float formatting uses 17 significant digits") {
    // 17 significant digits round-trip every double exactly.
    CHECK(std::stod(format_float(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(std::stod(format_float(0.1)) == 0.1);
    std::string s = format_float(0.1);
    CHECK(s.find("1.0000000000000001") != std::string::npos);
    CHECK(format_rational(rational(5, 24)) == "5/24");
    CHECK(format_rational(rational(3, 1)) == "3/1");
    CHECK(format_rational(rational(-1, 4)) == "-1/4");
}

TEST_CASE("precision guard restores and validates") {
    CHECK_THROWS_AS(precision_guard(17), std::invalid_argument);
    auto before = big_float::default_precision();
    {
        precision_guard guard(256);
        big_float x = big_float(1) / 3;
        CHECK(big_float::default_precision() >= digits10_for_bits(256));
        (void)x;
    }
    CHECK(big_float::default_precision() == before);
}

TEST_CASE("parallel partition covers every index exactly once") {
    std::vector<std::atomic<int>> hits(257);
    for (auto& h : hits) h.store(0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i].fetch_add(1); }, 4);
    for (auto& h : hits) CHECK(h.load() == 1);
    parallel_for(0, [&](std::size_t) { FAIL("no work expected"); }, 4);
}
