#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mcip/rng.hpp"

namespace mcip::field {

/// Largest modulus we accept. Keeps q^4 (the biggest exponent / field order
/// that arises) well inside a uint64, so all intermediates are overflow-free.
inline constexpr std::uint64_t kMaxModulus = 32749; // largest prime < 2^15

/// Prime modulus of the base field GF(q). Validated on construction.
class PrimeModulus {
public:
    explicit PrimeModulus(std::uint64_t q);
    std::uint64_t value() const { return q_; }

private:
    std::uint64_t q_;
};

bool is_prime(std::uint64_t m);

/// Least prime p >= m. Trial division; all moduli are desk-scale.
std::uint64_t smallest_prime_geq(std::uint64_t m);

/// Monic irreducible polynomial of degree 4 over GF(q), coefficients lowest
/// degree first (c[4] == 1).
struct IrreduciblePoly {
    std::array<std::uint64_t, 5> coeffs;

    std::string to_string() const;
    static IrreduciblePoly from_string(const std::string& text);
    bool operator==(const IrreduciblePoly& o) const { return coeffs == o.coeffs; }
};

/// Rabin's criterion for a monic degree-4 f over GF(q):
/// X^(q^4) == X (mod f) and gcd(X^(q^2) - X, f) == 1.
bool is_irreducible(const PrimeModulus& q, const std::array<std::uint64_t, 5>& f);

/// Random monic candidates checked by is_irreducible; after 64 misses we
/// fall back to a deterministic exhaustive scan, so setup never fails.
IrreduciblePoly find_irreducible(const PrimeModulus& q, Rng& rng);

/// Element of GF(q^4): c0 + c1*theta + c2*theta^2 + c3*theta^3.
struct ExtElement {
    std::array<std::uint64_t, 4> c{0, 0, 0, 0};

    bool operator==(const ExtElement& o) const { return c == o.c; }
    bool is_zero() const { return c[0] == 0 && c[1] == 0 && c[2] == 0 && c[3] == 0; }

    std::string to_string() const; // "c0,c1,c2,c3"
    static ExtElement from_string(const std::string& text);
};

/// Arithmetic context for GF(q^4): modulus, irreducible polynomial, and the
/// precomputed reduction rows for theta^4..theta^6. Immutable once built;
/// safe to share between threads.
class ExtContext {
public:
    ExtContext(PrimeModulus q, IrreduciblePoly irr);

    std::uint64_t q() const { return q_; }
    const IrreduciblePoly& irr() const { return irr_; }

    ExtElement zero() const { return {}; }
    ExtElement one() const { return ExtElement{{1 % q_, 0, 0, 0}}; }

    /// Embeds a universe element (0 <= a < q) as (a,0,0,0).
    ExtElement embed(std::uint64_t a) const;

    ExtElement add(const ExtElement& a, const ExtElement& b) const {
        ExtElement r;
        for (int i = 0; i < 4; ++i) {
            std::uint64_t s = a.c[i] + b.c[i];
            r.c[i] = s >= q_ ? s - q_ : s;
        }
        return r;
    }
    ExtElement sub(const ExtElement& a, const ExtElement& b) const {
        ExtElement r;
        for (int i = 0; i < 4; ++i)
            r.c[i] = a.c[i] >= b.c[i] ? a.c[i] - b.c[i] : a.c[i] + q_ - b.c[i];
        return r;
    }
    ExtElement neg(const ExtElement& a) const {
        ExtElement r;
        for (int i = 0; i < 4; ++i) r.c[i] = a.c[i] == 0 ? 0 : q_ - a.c[i];
        return r;
    }
    ExtElement mul(const ExtElement& a, const ExtElement& b) const {
        // schoolbook; raw coefficients < 4*(q-1)^2 < 2^32, and the theta^4+
        // folds stay < 2^49, so one Barrett reduction per output suffices
        std::uint64_t prod[7] = {0, 0, 0, 0, 0, 0, 0};
        for (int i = 0; i < 4; ++i) {
            if (a.c[i] == 0) continue;
            for (int j = 0; j < 4; ++j) prod[i + j] += a.c[i] * b.c[j];
        }
        ExtElement r;
        for (int i = 0; i < 4; ++i) {
            std::uint64_t acc = prod[i];
            for (int d = 0; d < 3; ++d) acc += prod[4 + d] * red_[d][i];
            r.c[i] = reduce(acc);
        }
        return r;
    }
    ExtElement pow(const ExtElement& a, std::uint64_t e) const;

    /// Multiplicative inverse via extended Euclid on coordinate polynomials.
    /// Throws std::domain_error on zero.
    ExtElement inv(const ExtElement& a) const;

    /// Element with index i in the fixed lexicographic enumeration of
    /// GF(q^4): coords (i mod q, (i/q) mod q, (i/q^2) mod q, (i/q^3) mod q).
    ExtElement element_at(std::uint64_t index) const;

    /// Checks all coordinates are in [0, q); throws std::invalid_argument.
    void validate(const ExtElement& a) const;

    std::uint64_t reduce(std::uint64_t a) const {
        std::uint64_t t = static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(a) * barrett_) >> 64);
        std::uint64_t r = a - t * q_;
        while (r >= q_) r -= q_;
        return r;
    }

private:
    std::uint64_t q_;
    IrreduciblePoly irr_;
    std::uint64_t barrett_;
    // theta^(4+j) expressed in the theta^0..theta^3 basis, j = 0..2
    std::array<std::array<std::uint64_t, 4>, 3> red_;
};

} // namespace mcip::field
