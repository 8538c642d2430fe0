#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "word.hpp"

namespace expmod {

// Constructive reachability between equal-length words: a finite list of
// substitution words whose composition maps `a` to a word having `b` as a
// prefix. Existence for every pair is what makes the finite-order marginal
// chain primitive.
//
// Construction. Stage one maps `a` to a word with an all-zero prefix: one
// step turns the leading symbol into 0, then pure-expansion steps double the
// leading zero block until it covers the whole window. Stage two builds `b`
// from the all-zero word by induction on the length: given a list of k+1
// words producing the length-l suffix of `b` from 0^l, prefix every word
// with a modify so the leading zero is negated once per step, and when the
// resulting flip parity disagrees with the target's leading symbol, insert
// one extra leading step that also starts with a modify. (An insertion step
// starting with an expansion would leave the flip count odd, so the inserted
// word must itself negate the leading symbol; replay tests pin this down.)
//
// Every returned word has length exactly |a|, and replay only ever needs the
// leading |a| symbols of the working word: each local image is at least one
// symbol long, so the first |a| output symbols depend on at most the first
// |a| input symbols.

namespace detail {

// Maps 0^length to a word with prefix equal to `target`.
inline std::vector<SubstitutionWord> build_from_zeros(const Word& target) {
    std::size_t length = target.size();
    std::vector<SubstitutionWord> words;
    // Base level: 0 -> 0 via expand, 0 -> 1 via modify.
    words.push_back({target.get(length - 1) ? Sub::modify : Sub::expand});
    for (std::size_t level = 2; level <= length; ++level) {
        int lead = target.get(length - level);
        std::size_t k = words.size() - 1;
        bool parity_matches = ((k % 2 == 0) && lead == 1) || ((k % 2 == 1) && lead == 0);
        if (!parity_matches) {
            SubstitutionWord opener;
            opener.push_back(Sub::modify);
            for (std::size_t i = 1; i < level; ++i) opener.push_back(Sub::expand);
            words.insert(words.begin(), opener);
        }
        for (auto& w : words)
            if (w.size() < level) w.insert(w.begin(), Sub::modify);
        // The freshly inserted opener already has the right length; every
        // older word grew by exactly the one prefixed modify.
    }
    return words;
}

}  // namespace detail

inline std::vector<SubstitutionWord> reachability_witness(const Word& a, const Word& b) {
    if (a.size() != b.size()) throw std::invalid_argument("witness endpoints differ in length");
    if (a.empty()) throw std::invalid_argument("witness endpoints must be non-empty");
    std::size_t length = a.size();

    if (length == 1) {
        return {SubstitutionWord{a.get(0) == b.get(0) ? Sub::expand : Sub::modify}};
    }

    std::vector<SubstitutionWord> words;
    // Stage one: zero the leading symbol, then double the zero block.
    SubstitutionWord first;
    first.push_back(a.get(0) ? Sub::modify : Sub::expand);
    while (first.size() < length) first.push_back(Sub::expand);
    words.push_back(first);
    std::size_t doubling_steps = 1;
    while ((std::size_t{1} << doubling_steps) < length) ++doubling_steps;
    ++doubling_steps;
    for (std::size_t j = 0; j < doubling_steps; ++j)
        words.emplace_back(length, Sub::expand);

    auto stage2 = detail::build_from_zeros(b);
    words.insert(words.end(), stage2.begin(), stage2.end());
    return words;
}

// Applies the witness in order, keeping only the leading |a| symbols of the
// working word at each step (sound by prefix monotonicity, and it bounds the
// replay cost linearly in the witness size).
inline Word replay_witness(const Word& a, const std::vector<SubstitutionWord>& witness) {
    Word w = a;
    for (const auto& s : witness) {
        w = apply_global(s, w);
        w.truncate(a.size());
    }
    return w;
}

}  // namespace expmod
