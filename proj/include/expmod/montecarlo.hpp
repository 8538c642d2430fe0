#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "correlation.hpp"
#include "marginal.hpp"
#include "numeric.hpp"
#include "threads.hpp"

// Forward simulation of the substitution dynamics, used to cross-check the
// exact machinery. All randomness comes from a counter-based generator keyed
// by (seed, sample, step, position), so every number produced is a pure
// function of its key: results are bitwise identical for any worker count
// and any scheduling order.

namespace expmod {

// SplitMix64 finalizer, chained once per key component.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t sample, std::uint64_t step,
                                  std::uint64_t position) {
    return mix64(mix64(mix64(mix64(seed) ^ sample) ^ step) ^ position);
}

inline double uniform01(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

struct SimulationOptions {
    std::uint64_t seed = 1;
    long long samples = 100000;
    long long burn_in = 60;  // substitution steps before measuring
    long long length = 0;    // simulated prefix length; 0 = shortest that covers the distances
};

// First `length` symbols of the word after `steps` substitution rounds,
// starting from the single symbol 1. Each symbol of the current word draws
// its own counter value; position indices refer to the truncated word, which
// is exact because the first L output symbols never depend on input symbols
// past position L. If the word is still short after `steps` rounds the
// evolution continues until it reaches `length` (growth is monotone), with a
// cap so that p = 1, where the word never grows, fails cleanly.
inline std::vector<std::uint8_t> simulate_prefix(double p, long long steps, long long length,
                                                 std::uint64_t seed, std::uint64_t sample) {
    if (!(p >= 0.0 && p < 1.0))
        throw std::invalid_argument("simulation needs p in [0, 1) so the word can grow");
    if (length < 1) throw std::invalid_argument("prefix length must be at least 1");
    if (steps < 0) throw std::invalid_argument("step count must be nonnegative");
    std::vector<std::uint8_t> w{1}, next;
    next.reserve(static_cast<std::size_t>(length) + 1);
    const long long cap = steps + 64 * (length + 64);
    long long t = 0;
    while (t < steps || static_cast<long long>(w.size()) < length) {
        next.clear();
        for (std::size_t j = 0; j < w.size() && static_cast<long long>(next.size()) < length; ++j) {
            if (uniform01(counter_hash(seed, sample, static_cast<std::uint64_t>(t), j)) < p) {
                next.push_back(w[j] ^ 1u);
            } else {
                next.push_back(w[j]);
                next.push_back(w[j]);
            }
        }
        if (static_cast<long long>(next.size()) > length)
            next.resize(static_cast<std::size_t>(length));
        w.swap(next);
        ++t;
        if (t > cap)
            throw numeric_failure("simulated word failed to reach length " +
                                  std::to_string(length) + " within " + std::to_string(cap) +
                                  " rounds");
    }
    return w;
}

struct CorrelationEstimate {
    long long distance = 0;
    double match_fraction = 0;  // fraction of samples with equal endpoint symbols
    double value = 0;           // (match_fraction - 1/2) / 2
    double half_width = 0;      // conservative 95% interval: 1.96 / (4 sqrt(N))
    long long samples = 0;
};

// Ensemble estimate of the stationary pair correlations at the given
// distances. One simulated prefix per sample serves every distance. Chunked
// integer accumulation keeps the totals independent of merge order.
inline std::vector<CorrelationEstimate> estimate_correlations(double p,
                                                              std::vector<long long> distances,
                                                              const SimulationOptions& opt) {
    if (!(p >= 0.0 && p < 1.0))
        throw std::invalid_argument("simulation needs p in [0, 1) so the word can grow");
    if (distances.empty()) throw std::invalid_argument("no distances requested");
    for (long long d : distances)
        if (d < 1) throw std::invalid_argument("correlation distances start at 1");
    if (opt.samples < 1) throw std::invalid_argument("sample count must be positive");
    const long long needed = *std::max_element(distances.begin(), distances.end()) + 1;
    if (opt.length != 0 && opt.length < needed)
        throw std::invalid_argument("prefix length " + std::to_string(opt.length) +
                                    " cannot cover distance " + std::to_string(needed - 1));
    const long long length = std::max(needed, opt.length);

    const long long chunk = 1024;
    const std::size_t n_chunks = static_cast<std::size_t>((opt.samples + chunk - 1) / chunk);
    std::vector<long long> matches(distances.size(), 0);
    std::mutex merge;
    parallel_for(n_chunks, [&](std::size_t c) {
        std::vector<long long> local(distances.size(), 0);
        const long long lo = static_cast<long long>(c) * chunk;
        const long long hi = std::min(lo + chunk, opt.samples);
        for (long long s = lo; s < hi; ++s) {
            auto w = simulate_prefix(p, opt.burn_in, length, opt.seed,
                                     static_cast<std::uint64_t>(s));
            for (std::size_t i = 0; i < distances.size(); ++i)
                local[i] += w[0] == w[static_cast<std::size_t>(distances[i])] ? 1 : 0;
        }
        std::lock_guard<std::mutex> lock(merge);
        for (std::size_t i = 0; i < distances.size(); ++i) matches[i] += local[i];
    });

    std::vector<CorrelationEstimate> out(distances.size());
    const double nd = static_cast<double>(opt.samples);
    for (std::size_t i = 0; i < distances.size(); ++i) {
        out[i].distance = distances[i];
        out[i].samples = opt.samples;
        out[i].match_fraction = static_cast<double>(matches[i]) / nd;
        out[i].value = (out[i].match_fraction - 0.5) / 2.0;
        out[i].half_width = 1.96 / (4.0 * std::sqrt(nd));
    }
    return out;
}

inline CorrelationEstimate estimate_correlation(double p, long long distance,
                                                const SimulationOptions& opt) {
    return estimate_correlations(p, {distance}, opt)[0];
}

struct ConvergenceScan {
    int ell = 0;
    std::vector<long long> checkpoints;
    std::vector<double> tv;              // empirical snapshot vs exact stationary
    std::vector<double> short_fraction;  // samples whose word has not reached ell+1
};

// Total-variation distance between ensemble snapshots of the leading
// (ell+1)-symbol word and the exact stationary marginal, at each checkpoint.
// Samples still shorter than ell+1 are excluded from the histogram and
// reported separately; their fraction vanishes after a few rounds.
inline ConvergenceScan convergence_scan(double p, int ell, std::vector<long long> checkpoints,
                                        const SimulationOptions& opt) {
    if (!(p >= 0.0 && p < 1.0))
        throw std::invalid_argument("simulation needs p in [0, 1) so the word can grow");
    if (ell < 0 || ell > default_ell_max)
        throw std::length_error("snapshot order out of configured range");
    if (checkpoints.empty()) throw std::invalid_argument("no checkpoints requested");
    if (!std::is_sorted(checkpoints.begin(), checkpoints.end()) || checkpoints.front() < 1)
        throw std::invalid_argument("checkpoints must be increasing and start at 1 or later");
    if (opt.samples < 1) throw std::invalid_argument("sample count must be positive");

    const std::size_t length = static_cast<std::size_t>(ell) + 1;
    const std::size_t dim = std::size_t{1} << length;
    const std::size_t n_check = checkpoints.size();

    std::vector<std::vector<long long>> counts(n_check, std::vector<long long>(dim, 0));
    std::vector<long long> shorts(n_check, 0);
    std::mutex merge;
    const long long chunk = 1024;
    const std::size_t n_chunks = static_cast<std::size_t>((opt.samples + chunk - 1) / chunk);
    parallel_for(n_chunks, [&](std::size_t c) {
        std::vector<std::vector<long long>> lc(n_check, std::vector<long long>(dim, 0));
        std::vector<long long> ls(n_check, 0);
        std::vector<std::uint8_t> w, next;
        const long long lo = static_cast<long long>(c) * chunk;
        const long long hi = std::min(lo + chunk, opt.samples);
        for (long long s = lo; s < hi; ++s) {
            w.assign(1, 1);
            long long t = 0;
            std::size_t ci = 0;
            while (ci < n_check) {
                next.clear();
                for (std::size_t j = 0; j < w.size() && next.size() < length; ++j) {
                    std::uint64_t bits = counter_hash(opt.seed, static_cast<std::uint64_t>(s),
                                                      static_cast<std::uint64_t>(t), j);
                    if (uniform01(bits) < p) {
                        next.push_back(w[j] ^ 1u);
                    } else {
                        next.push_back(w[j]);
                        next.push_back(w[j]);
                    }
                }
                if (next.size() > length) next.resize(length);
                w.swap(next);
                ++t;
                while (ci < n_check && checkpoints[ci] == t) {
                    if (w.size() < length) {
                        ++ls[ci];
                    } else {
                        std::uint32_t idx = 0;
                        for (std::size_t i = 0; i < length; ++i)
                            idx |= static_cast<std::uint32_t>(w[i]) << i;
                        ++lc[ci][idx];
                    }
                    ++ci;
                }
            }
        }
        std::lock_guard<std::mutex> lock(merge);
        for (std::size_t k = 0; k < n_check; ++k) {
            shorts[k] += ls[k];
            for (std::size_t i = 0; i < dim; ++i) counts[k][i] += lc[k][i];
        }
    });

    auto chain = build_transition<double>(ell, p);
    auto pi = stationary(chain).distribution.weights;

    ConvergenceScan out;
    out.ell = ell;
    out.checkpoints = std::move(checkpoints);
    out.tv.resize(n_check);
    out.short_fraction.resize(n_check);
    for (std::size_t k = 0; k < n_check; ++k) {
        const long long kept = opt.samples - shorts[k];
        out.short_fraction[k] =
            static_cast<double>(shorts[k]) / static_cast<double>(opt.samples);
        if (kept == 0) {
            out.tv[k] = 1.0;
            continue;
        }
        double acc = 0;
        for (std::size_t i = 0; i < dim; ++i)
            acc += std::fabs(static_cast<double>(counts[k][i]) / static_cast<double>(kept) -
                             pi[i]);
        out.tv[k] = acc / 2.0;
    }
    return out;
}

struct SampleComplexity {
    long long distance = 0;
    double correlation = 0;     // exact series value at the distance
    double samples_needed = 0;  // (1.96 / (4 |C|))^2: samples for the 95%
                                // interval to shrink to |C| itself
};

// How many samples the ensemble estimator needs before its conservative 95%
// half-width matches the exact correlation it is trying to resolve.
inline SampleComplexity sample_complexity(const probability& p, long long distance) {
    if (distance < 1) throw std::invalid_argument("correlation distances start at 1");
    auto series = correlation_series(p, std::max<long long>(distance, 2));
    SampleComplexity out;
    out.distance = distance;
    out.correlation = static_cast<double>(series.values[static_cast<std::size_t>(distance)]);
    if (out.correlation == 0.0)
        throw numeric_failure("correlation vanishes at the requested distance");
    const double ratio = 1.96 / (4.0 * std::fabs(out.correlation));
    out.samples_needed = ratio * ratio;
    return out;
}

}  // namespace expmod
