#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "numeric.hpp"
#include "threads.hpp"
#include "word.hpp"

namespace expmod {

// Finite-order marginal chain. States are binary words of length ell+1,
// encoded as integers with bit i holding symbol i (first symbol = bit 0).
// The transition weight from b to a is the total probability of substitution
// prefixes whose image of b starts with a; the first ell+1 output symbols
// never depend on later input symbols, so the chain is autonomous.

inline std::uint32_t word_to_index(const Word& w) {
    std::uint32_t idx = 0;
    for (std::size_t i = 0; i < w.size(); ++i) idx |= static_cast<std::uint32_t>(w.get(i)) << i;
    return idx;
}

inline Word index_to_word(std::uint32_t idx, std::size_t length) {
    Word w(length, 0);
    for (std::size_t i = 0; i < length; ++i) w.set(i, (idx >> i) & 1u);
    return w;
}

inline std::uint32_t flip_index(std::uint32_t idx, std::size_t length) {
    return ~idx & ((std::uint32_t{1} << length) - 1);
}

template <class T>
struct TransitionMatrix {
    int ell = 0;
    std::size_t dim = 0;
    // Sparse rows, each sorted by target index; row sums are 1 by
    // construction (the enumerated substitution prefixes are exhaustive and
    // prefix-free).
    std::vector<std::vector<std::pair<std::uint32_t, T>>> rows;
};

template <class T>
struct MarginalDistribution {
    int ell = 0;
    std::vector<T> weights;  // size 2^(ell+1)
};

inline constexpr int default_ell_max = 12;

namespace detail {

// Enumerates substitution prefixes of the source word, branch by branch,
// stopping as soon as ell+1 output symbols exist. An expansion can overshoot
// by one symbol; the overflow bit is masked away.
template <class T>
void accumulate_row(std::uint32_t source, std::size_t length, const T& p, const T& q,
                    std::vector<T>& row) {
    struct Frame {
        std::uint32_t out;
        std::uint32_t pos;
        std::uint32_t produced;
        T weight;
    };
    const std::uint32_t mask = (std::uint32_t{1} << length) - 1;
    std::vector<Frame> stack;
    stack.push_back({0, 0, 0, T(1)});
    while (!stack.empty()) {
        Frame f = std::move(stack.back());
        stack.pop_back();
        if (f.produced >= length) {
            row[f.out & mask] += f.weight;
            continue;
        }
        std::uint32_t sym = (source >> f.pos) & 1u;
        Frame mod{f.out | ((sym ^ 1u) << f.produced), f.pos + 1, f.produced + 1, f.weight * p};
        Frame exp{f.out | (sym << f.produced) | (sym << (f.produced + 1)), f.pos + 1,
                  f.produced + 2, f.weight * q};
        stack.push_back(std::move(mod));
        stack.push_back(std::move(exp));
    }
}

}  // namespace detail

template <class T>
TransitionMatrix<T> build_transition(int ell, const T& p, int ell_max = default_ell_max) {
    if (ell < 0 || ell > ell_max) throw std::length_error("marginal order out of configured range");
    std::size_t length = static_cast<std::size_t>(ell) + 1;
    TransitionMatrix<T> M;
    M.ell = ell;
    M.dim = std::size_t{1} << length;
    M.rows.resize(M.dim);
    const T q = T(1) - p;
    parallel_for(M.dim, [&](std::size_t b) {
        std::vector<T> dense(M.dim, T(0));
        detail::accumulate_row(static_cast<std::uint32_t>(b), length, p, q, dense);
        auto& row = M.rows[b];
        for (std::uint32_t a = 0; a < M.dim; ++a)
            if (!(dense[a] == T(0))) row.emplace_back(a, dense[a]);
    });
    return M;
}

// Independent construction for small orders: enumerates every substitution
// word of full length and truncates its image. Exponentially slower, used as
// an oracle for build_transition.
template <class T>
TransitionMatrix<T> brute_force_transition(int ell, const T& p) {
    if (ell < 0 || ell > 6) throw std::length_error("brute-force constructor is for small orders");
    std::size_t length = static_cast<std::size_t>(ell) + 1;
    TransitionMatrix<T> M;
    M.ell = ell;
    M.dim = std::size_t{1} << length;
    M.rows.resize(M.dim);
    const T q = T(1) - p;
    for (std::uint32_t b = 0; b < M.dim; ++b) {
        std::vector<T> dense(M.dim, T(0));
        Word source = index_to_word(b, length);
        for (std::uint32_t code = 0; code < M.dim; ++code) {
            SubstitutionWord s;
            T weight(1);
            for (std::size_t i = 0; i < length; ++i) {
                bool modify = (code >> i) & 1u;
                s.push_back(modify ? Sub::modify : Sub::expand);
                weight = weight * (modify ? p : q);
            }
            Word image = apply_global(s, source);
            image.truncate(length);
            dense[word_to_index(image)] += weight;
        }
        for (std::uint32_t a = 0; a < M.dim; ++a)
            if (!(dense[a] == T(0))) M.rows[b].emplace_back(a, dense[a]);
    }
    return M;
}

template <class T>
std::vector<T> apply_to_distribution(const TransitionMatrix<T>& M, const std::vector<T>& mu) {
    if (mu.size() != M.dim) throw std::invalid_argument("distribution size mismatch");
    std::vector<T> out(M.dim, T(0));
    for (std::size_t b = 0; b < M.dim; ++b) {
        if (mu[b] == T(0)) continue;
        for (const auto& [a, w] : M.rows[b]) out[a] += mu[b] * w;
    }
    return out;
}

template <class T>
T total_variation(const std::vector<T>& u, const std::vector<T>& v) {
    if (u.size() != v.size()) throw std::invalid_argument("distribution size mismatch");
    T acc(0);
    for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] < v[i] ? v[i] - u[i] : u[i] - v[i];
    return acc / 2;
}

template <class T>
struct StationaryResult {
    MarginalDistribution<T> distribution;
    std::size_t iterations = 0;
};

// Power iteration from the uniform vector. Primitivity makes this converge
// geometrically; the residual reported against tol is the L1 step size,
// which dominates ||mu M - mu||_1 at the returned iterate.
template <class T>
StationaryResult<T> stationary(const TransitionMatrix<T>& M, double tol = 1e-14,
                               std::size_t max_iterations = 1000000) {
    std::vector<T> mu(M.dim, T(1) / T(static_cast<unsigned>(M.dim)));
    StationaryResult<T> result;
    for (std::size_t it = 1; it <= max_iterations; ++it) {
        std::vector<T> next = apply_to_distribution(M, mu);
        T norm(0);
        for (const auto& x : next) norm += x;
        for (auto& x : next) x /= norm;
        T delta(0);
        for (std::size_t i = 0; i < M.dim; ++i)
            delta += next[i] < mu[i] ? mu[i] - next[i] : next[i] - mu[i];
        mu.swap(next);
        if (delta <= T(tol)) {
            result.distribution = {M.ell, std::move(mu)};
            result.iterations = it;
            return result;
        }
    }
    throw numeric_failure("stationary iteration did not converge within the cap");
}

namespace detail {

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % q);
}

inline std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t q) {
    std::uint64_t acc = 1 % q;
    base %= q;
    while (exp) {
        if (exp & 1u) acc = mulmod(acc, base, q);
        base = mulmod(base, base, q);
        exp >>= 1;
    }
    return acc;
}

inline bool is_prime64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t small : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull})
        if (n % small == 0) return n == small;
    std::uint64_t d = n - 1;
    int r = 0;
    while ((d & 1u) == 0) {
        d >>= 1;
        ++r;
    }
    // Deterministic Miller-Rabin base set for the full 64-bit range.
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull,
                            31ull, 37ull}) {
        std::uint64_t x = powmod(a % n, d, n);
        if (x == 0 || x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 1; i < r; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

// Fixed descending sequence below 2^62, so runs are reproducible and the
// Garner moduli products stay well under bignum surprises.
inline std::uint64_t nth_solver_prime(std::size_t index) {
    static std::vector<std::uint64_t> cache;
    static std::mutex guard;
    std::lock_guard<std::mutex> lock(guard);
    std::uint64_t candidate =
        cache.empty() ? (std::uint64_t{1} << 62) - 1 : cache.back() - 2;
    while (cache.size() <= index) {
        while (!is_prime64(candidate)) candidate -= 2;
        cache.push_back(candidate);
        candidate -= 2;
    }
    return cache[index];
}

inline std::uint64_t residue_of(const rational& r, std::uint64_t q) {
    std::uint64_t num = mpz_fdiv_ui(mpq_numref(r.backend().data()), q);
    std::uint64_t den = mpz_fdiv_ui(mpq_denref(r.backend().data()), q);
    return mulmod(num, powmod(den, q - 2, q), q);
}

// Dense elimination of [A | rhs] mod q. Returns false when the matrix is
// singular modulo this prime (the prime is then discarded).
inline bool solve_dense_mod(std::vector<std::uint64_t>& a, std::vector<std::uint64_t>& rhs,
                            std::size_t n, std::uint64_t q, std::vector<std::uint64_t>& x) {
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        while (pivot < n && a[pivot * n + k] == 0) ++pivot;
        if (pivot == n) return false;
        if (pivot != k) {
            for (std::size_t j = k; j < n; ++j) std::swap(a[pivot * n + j], a[k * n + j]);
            std::swap(rhs[pivot], rhs[k]);
        }
        std::uint64_t inv = powmod(a[k * n + k], q - 2, q);
        for (std::size_t i = k + 1; i < n; ++i) {
            std::uint64_t lead = a[i * n + k];
            if (lead == 0) continue;
            std::uint64_t factor = q - mulmod(lead, inv, q);
            a[i * n + k] = 0;
            for (std::size_t j = k + 1; j < n; ++j)
                a[i * n + j] = (a[i * n + j] + static_cast<unsigned __int128>(factor) *
                                                   a[k * n + j] % q) % q;
            rhs[i] = (rhs[i] + mulmod(factor, rhs[k], q)) % q;
        }
    }
    x.assign(n, 0);
    for (std::size_t k = n; k-- > 0;) {
        std::uint64_t acc = rhs[k];
        for (std::size_t j = k + 1; j < n; ++j) {
            std::uint64_t t = mulmod(a[k * n + j], x[j], q);
            acc = acc >= t ? acc - t : acc + q - t;
        }
        x[k] = mulmod(acc, powmod(a[k * n + k], q - 2, q), q);
    }
    return true;
}

// Wang rational reconstruction: the unique num/den with |num|, den below
// sqrt(modulus/2) congruent to the residue, if one exists.
inline bool rational_reconstruct(const bigint& residue, const bigint& modulus, rational& out) {
    bigint half = modulus / 2;
    bigint bound = sqrt(half);
    bigint r0 = modulus, r1 = residue % modulus;
    if (r1 < 0) r1 += modulus;
    bigint t0 = 0, t1 = 1;
    while (r1 > bound) {
        bigint quot = r0 / r1;
        bigint r2 = r0 - quot * r1;
        bigint t2 = t0 - quot * t1;
        r0 = r1;
        r1 = r2;
        t0 = t1;
        t1 = t2;
    }
    if (t1 == 0) return false;
    if (t1 < 0) {
        t1 = -t1;
        r1 = -r1;
    }
    if (t1 > bound || gcd(r1, t1) != 1) return false;
    out = rational(r1, t1);
    return true;
}

}  // namespace detail

// Exact stationary vector for rational transition weights. The chain
// commutes with global negation, so states are folded into {a, flipped a}
// classes (halving the solve) and class weights split evenly. The folded
// fixed-point system is solved modulo a growing set of word-size primes and
// the probabilities recovered by Chinese remaindering plus rational
// reconstruction; exact elimination over the rationals is avoided because
// its intermediate entries swell to determinant size while the final
// probabilities stay only a few machine words long. The reconstructed
// vector is accepted only after an exact residual check against the sparse
// system, so a too-small prime set can never produce a wrong answer.
inline std::vector<rational> stationary_exact(const TransitionMatrix<rational>& M) {
    std::size_t length = static_cast<std::size_t>(M.ell) + 1;
    std::vector<std::uint32_t> rep;            // class id -> representative index
    std::vector<std::uint32_t> cls(M.dim, 0);  // state index -> class id
    for (std::uint32_t a = 0; a < M.dim; ++a) {
        if (a < flip_index(a, length)) {
            cls[a] = static_cast<std::uint32_t>(rep.size());
            rep.push_back(a);
        }
    }
    for (std::uint32_t a = 0; a < M.dim; ++a) {
        std::uint32_t f = flip_index(a, length);
        if (a > f) cls[a] = cls[f];
    }
    std::size_t n = rep.size();

    // Folded transition rows: class of b -> list of (class of a, weight).
    std::vector<std::vector<std::pair<std::uint32_t, rational>>> folded(n);
    for (std::size_t bc = 0; bc < n; ++bc) {
        std::map<std::uint32_t, rational> acc;
        for (const auto& [a, w] : M.rows[rep[bc]]) acc[cls[a]] += w;
        folded[bc].assign(acc.begin(), acc.end());
    }

    // Left fixed vector: (F^T - I) x = 0 with the last equation replaced by
    // sum(x) = 1.
    auto solve_one_prime = [&](std::uint64_t q, std::vector<std::uint64_t>& x) {
        std::vector<std::uint64_t> a(n * n, 0);
        std::vector<std::uint64_t> rhs(n, 0);
        for (std::size_t bc = 0; bc < n; ++bc)
            for (const auto& [ac, w] : folded[bc]) {
                std::uint64_t cell = (a[ac * n + bc] + detail::residue_of(w, q)) % q;
                a[ac * n + bc] = cell;
            }
        for (std::size_t j = 0; j < n; ++j) {
            std::uint64_t& diag = a[j * n + j];
            diag = diag ? diag - 1 : q - 1;
        }
        for (std::size_t j = 0; j < n; ++j) a[(n - 1) * n + j] = 1;
        rhs[n - 1] = 1;
        return detail::solve_dense_mod(a, rhs, n, q, x);
    };

    constexpr std::size_t max_primes = 64;
    std::vector<std::uint64_t> used_primes;
    std::vector<std::vector<std::uint64_t>> residues;  // per prime, length n
    std::vector<rational> x(n);
    std::size_t next_index = 0;
    while (used_primes.size() < max_primes) {
        // Solve a batch of fresh primes in parallel; order stays fixed.
        std::size_t batch = used_primes.empty() ? 4 : 2;
        std::vector<std::uint64_t> primes(batch);
        for (std::size_t i = 0; i < batch; ++i)
            primes[i] = detail::nth_solver_prime(next_index + i);
        next_index += batch;
        std::vector<std::vector<std::uint64_t>> sols(batch);
        std::vector<char> good(batch, 0);
        parallel_for(batch, [&](std::size_t i) {
            good[i] = solve_one_prime(primes[i], sols[i]) ? 1 : 0;
        });
        for (std::size_t i = 0; i < batch; ++i) {
            if (!good[i]) continue;  // singular mod this prime: discard it
            used_primes.push_back(primes[i]);
            residues.push_back(std::move(sols[i]));
        }
        if (used_primes.empty()) continue;

        // Garner combination per component, then attempted reconstruction.
        bigint modulus = 1;
        for (auto q : used_primes) modulus *= q;
        bool all_ok = true;
        std::vector<rational> candidate(n);
        std::vector<bigint> combined(n, 0);
        bigint partial = 1;
        for (std::size_t pi = 0; pi < used_primes.size() && all_ok; ++pi) {
            std::uint64_t q = used_primes[pi];
            std::uint64_t partial_inv =
                detail::powmod(mpz_fdiv_ui(partial.backend().data(), q), q - 2, q);
            for (std::size_t j = 0; j < n; ++j) {
                std::uint64_t have = mpz_fdiv_ui(combined[j].backend().data(), q);
                std::uint64_t want = residues[pi][j];
                std::uint64_t delta = want >= have ? want - have : want + q - have;
                combined[j] += partial * detail::mulmod(delta, partial_inv, q);
            }
            partial *= q;
        }
        for (std::size_t j = 0; j < n && all_ok; ++j)
            all_ok = detail::rational_reconstruct(combined[j], modulus, candidate[j]);

        if (all_ok) {
            // Exact residual check over the sparse folded system.
            rational total(0);
            for (const auto& v : candidate) total += v;
            bool verified = total == 1;
            if (verified) {
                std::vector<rational> image(n, rational(0));
                for (std::size_t bc = 0; bc < n; ++bc)
                    for (const auto& [ac, w] : folded[bc]) image[ac] += w * candidate[bc];
                for (std::size_t j = 0; j < n && verified; ++j)
                    verified = image[j] == candidate[j];
            }
            if (verified) {
                x = std::move(candidate);
                std::vector<rational> mu(M.dim);
                for (std::uint32_t s = 0; s < M.dim; ++s) mu[s] = x[cls[s]] / 2;
                return mu;
            }
        }
    }
    throw numeric_failure("exact stationary solve exhausted its prime budget");
}

// Least power at which every transition is possible, via boolean support
// powers (the support is p-independent on (0,1), so no underflow concerns).
inline std::size_t primitivity_certificate(const std::vector<std::vector<bool>>& support,
                                           std::size_t cap = 64) {
    std::size_t dim = support.size();
    std::size_t words = (dim + 63) / 64;
    auto pack = [&](const std::vector<std::vector<bool>>& b) {
        std::vector<std::vector<std::uint64_t>> rows(dim, std::vector<std::uint64_t>(words, 0));
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j)
                if (b[i][j]) rows[i][j / 64] |= std::uint64_t{1} << (j % 64);
        return rows;
    };
    auto base = pack(support);
    auto power = base;
    auto all_ones = [&](const std::vector<std::vector<std::uint64_t>>& rows) {
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j)
                if (!((rows[i][j / 64] >> (j % 64)) & 1u)) return false;
        return true;
    };
    for (std::size_t n = 1; n <= cap; ++n) {
        if (all_ones(power)) return n;
        std::vector<std::vector<std::uint64_t>> next(dim, std::vector<std::uint64_t>(words, 0));
        parallel_for(dim, [&](std::size_t i) {
            for (std::size_t j = 0; j < dim; ++j) {
                if ((power[i][j / 64] >> (j % 64)) & 1u)
                    for (std::size_t wdx = 0; wdx < words; ++wdx) next[i][wdx] |= base[j][wdx];
            }
        });
        power.swap(next);
    }
    throw numeric_failure("support powers never became strictly positive within the cap");
}

template <class T>
std::vector<std::vector<bool>> transition_support(const TransitionMatrix<T>& M) {
    std::vector<std::vector<bool>> support(M.dim, std::vector<bool>(M.dim, false));
    for (std::size_t b = 0; b < M.dim; ++b)
        for (const auto& [a, w] : M.rows[b])
            if (!(w == T(0))) support[b][a] = true;
    return support;
}

template <class T>
T compatibility_residual(const MarginalDistribution<T>& mu_hi,
                         const MarginalDistribution<T>& mu_lo) {
    if (mu_hi.ell != mu_lo.ell + 1) throw std::invalid_argument("orders must differ by one");
    std::size_t low_len = static_cast<std::size_t>(mu_lo.ell) + 1;
    std::size_t low_dim = std::size_t{1} << low_len;
    T worst(0);
    for (std::uint32_t a = 0; a < low_dim; ++a) {
        T sum = mu_hi.weights[a] + mu_hi.weights[a | (std::uint32_t{1} << low_len)];
        T diff = sum - mu_lo.weights[a];
        if (diff < T(0)) diff = -diff;
        if (diff > worst) worst = diff;
    }
    return worst;
}

// Two-site correlation at distance n read off a stationary marginal vector:
// probability that sites 0 and n are both 1, minus 1/4.
template <class T>
T correlation_from_marginal(const MarginalDistribution<T>& mu, int n) {
    if (n < 0 || n > mu.ell) throw std::out_of_range("site distance exceeds marginal order");
    T acc(0);
    std::size_t dim = mu.weights.size();
    for (std::uint32_t a = 0; a < dim; ++a)
        if ((a & 1u) && ((a >> n) & 1u)) acc += mu.weights[a];
    return acc - T(1) / 4;
}

}  // namespace expmod
