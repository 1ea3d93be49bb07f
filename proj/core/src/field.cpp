#include "mcip/field.hpp"

#include <sstream>
#include <stdexcept>

namespace mcip::field {

bool is_prime(std::uint64_t m) {
    if (m < 2) return false;
    for (std::uint64_t d = 2; d * d <= m; ++d)
        if (m % d == 0) return false;
    return true;
}

std::uint64_t smallest_prime_geq(std::uint64_t m) {
    std::uint64_t p = m < 2 ? 2 : m;
    while (!is_prime(p)) ++p;
    return p;
}

PrimeModulus::PrimeModulus(std::uint64_t q) : q_(q) {
    if (!is_prime(q)) throw std::invalid_argument("modulus is not prime: " + std::to_string(q));
    if (q > kMaxModulus) throw std::invalid_argument("modulus too large: " + std::to_string(q));
}

namespace {

// --- dense polynomials over GF(q), lowest degree first ---

using Poly = std::vector<std::uint64_t>;

void trim(Poly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

// a * b mod f, where f is monic of degree 4 and a, b have degree < 4
std::array<std::uint64_t, 4> mulmod4(const std::array<std::uint64_t, 4>& a,
                                     const std::array<std::uint64_t, 4>& b,
                                     const std::array<std::uint64_t, 5>& f,
                                     std::uint64_t q) {
    std::array<std::uint64_t, 7> prod{};
    for (int i = 0; i < 4; ++i) {
        if (a[i] == 0) continue;
        for (int j = 0; j < 4; ++j) prod[i + j] += a[i] * b[j];
    }
    for (int i = 0; i < 7; ++i) prod[i] %= q;
    // reduce degrees 6..4: X^4 = -(f0 + f1 X + f2 X^2 + f3 X^3)
    for (int d = 6; d >= 4; --d) {
        std::uint64_t c = prod[d];
        if (c == 0) continue;
        prod[d] = 0;
        for (int j = 0; j < 4; ++j)
            prod[d - 4 + j] = (prod[d - 4 + j] + c * (q - f[j] % q)) % q;
    }
    return {prod[0], prod[1], prod[2], prod[3]};
}

// X^e mod f
std::array<std::uint64_t, 4> xpowmod(std::uint64_t e, const std::array<std::uint64_t, 5>& f,
                                     std::uint64_t q) {
    std::array<std::uint64_t, 4> result{1 % q, 0, 0, 0};
    std::array<std::uint64_t, 4> base{0, 1 % q, 0, 0};
    while (e > 0) {
        if (e & 1) result = mulmod4(result, base, f, q);
        base = mulmod4(base, base, f, q);
        e >>= 1;
    }
    return result;
}

Poly poly_mod(Poly a, const Poly& b, std::uint64_t q) {
    // b must be nonzero; not required monic
    trim(a);
    std::uint64_t lead_inv = 1;
    {
        // inverse of b's leading coefficient via Fermat
        std::uint64_t l = b.back() % q, e = q - 2, acc = 1 % q;
        while (e > 0) {
            if (e & 1) acc = acc * l % q;
            l = l * l % q;
            e >>= 1;
        }
        lead_inv = acc;
    }
    while (a.size() >= b.size() && !a.empty()) {
        std::uint64_t c = a.back() * lead_inv % q;
        std::size_t shift = a.size() - b.size();
        for (std::size_t i = 0; i < b.size(); ++i)
            a[shift + i] = (a[shift + i] + c * (q - b[i] % q)) % q;
        trim(a);
    }
    return a;
}

Poly poly_gcd(Poly a, Poly b, std::uint64_t q) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        Poly r = poly_mod(a, b, q);
        a = std::move(b);
        b = std::move(r);
    }
    return a;
}

} // namespace

bool is_irreducible(const PrimeModulus& qm, const std::array<std::uint64_t, 5>& f) {
    std::uint64_t q = qm.value();
    if (f[4] % q != 1 % q) throw std::invalid_argument("polynomial must be monic of degree 4");
    for (auto c : f)
        if (c >= q) throw std::invalid_argument("coefficient out of range");

    // gcd(X^(q^2) - X, f) == 1 rules out factors of degree 1 and 2
    auto xq2 = xpowmod(q * q, f, q);
    Poly g{xq2[0], (xq2[1] + q - 1 % q) % q, xq2[2], xq2[3]};
    Poly fp(f.begin(), f.end());
    Poly gcd = poly_gcd(fp, g, q);
    if (gcd.size() != 1) return false;

    // X^(q^4) == X (mod f)
    auto xq4 = xpowmod(q * q * q * q, f, q);
    return xq4 == std::array<std::uint64_t, 4>{0, 1 % q, 0, 0};
}

IrreduciblePoly find_irreducible(const PrimeModulus& qm, Rng& rng) {
    std::uint64_t q = qm.value();
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::array<std::uint64_t, 5> f{rng.uniform(q), rng.uniform(q), rng.uniform(q),
                                       rng.uniform(q), 1 % q};
        if (is_irreducible(qm, f)) return IrreduciblePoly{f};
    }
    // deterministic fallback: lexicographic scan, guaranteed to terminate
    // (monic irreducible quartics exist over every finite field)
    std::uint64_t total = q * q * q * q;
    for (std::uint64_t i = 0; i < total; ++i) {
        std::array<std::uint64_t, 5> f{i % q, (i / q) % q, (i / (q * q)) % q,
                                       (i / (q * q * q)) % q, 1 % q};
        if (is_irreducible(qm, f)) return IrreduciblePoly{f};
    }
    throw std::logic_error("no irreducible quartic found"); // unreachable
}

std::string IrreduciblePoly::to_string() const {
    std::ostringstream os;
    for (int i = 0; i < 5; ++i) {
        if (i) os << ',';
        os << coeffs[i];
    }
    return os.str();
}

IrreduciblePoly IrreduciblePoly::from_string(const std::string& text) {
    IrreduciblePoly p{};
    std::istringstream is(text);
    std::string tok;
    for (int i = 0; i < 5; ++i) {
        if (!std::getline(is, tok, ',')) throw std::invalid_argument("bad polynomial literal: " + text);
        p.coeffs[i] = std::stoull(tok);
    }
    if (std::getline(is, tok, ',')) throw std::invalid_argument("bad polynomial literal: " + text);
    if (p.coeffs[4] != 1)
        throw std::invalid_argument("irreducible polynomial literal must be monic: " + text);
    return p;
}

std::string ExtElement::to_string() const {
    std::ostringstream os;
    for (int i = 0; i < 4; ++i) {
        if (i) os << ',';
        os << c[i];
    }
    return os.str();
}

ExtElement ExtElement::from_string(const std::string& text) {
    ExtElement e{};
    std::istringstream is(text);
    std::string tok;
    for (int i = 0; i < 4; ++i) {
        if (!std::getline(is, tok, ',')) throw std::invalid_argument("bad element literal: " + text);
        e.c[i] = std::stoull(tok);
    }
    if (std::getline(is, tok, ',')) throw std::invalid_argument("bad element literal: " + text);
    return e;
}

ExtContext::ExtContext(PrimeModulus q, IrreduciblePoly irr) : q_(q.value()), irr_(irr) {
    if (irr_.coeffs[4] != 1 % q_)
        throw std::invalid_argument("irreducible polynomial must be monic");
    for (auto c : irr_.coeffs)
        if (c >= q_) throw std::invalid_argument("irreducible polynomial coefficient out of range");
    barrett_ = static_cast<std::uint64_t>((static_cast<unsigned __int128>(1) << 64) / q_);
    // theta^4 = -(c0 + c1 theta + c2 theta^2 + c3 theta^3)
    for (int j = 0; j < 4; ++j) red_[0][j] = (q_ - irr_.coeffs[j]) % q_;
    // theta^(d+1) = theta * theta^d, reduced
    for (int d = 1; d < 3; ++d) {
        std::array<std::uint64_t, 4> prev = red_[d - 1];
        std::array<std::uint64_t, 4> next{};
        // shift up by one, then fold theta^4 back in
        std::uint64_t carry = prev[3];
        next[0] = 0;
        for (int j = 1; j < 4; ++j) next[j] = prev[j - 1];
        for (int j = 0; j < 4; ++j) next[j] = (next[j] + carry * red_[0][j]) % q_;
        red_[d] = next;
    }
}

ExtElement ExtContext::embed(std::uint64_t a) const {
    if (a >= q_) throw std::out_of_range("embed: value " + std::to_string(a) +
                                         " not below modulus " + std::to_string(q_));
    return ExtElement{{a, 0, 0, 0}};
}

void ExtContext::validate(const ExtElement& a) const {
    for (auto c : a.c)
        if (c >= q_) throw std::invalid_argument("element coordinate out of range for modulus");
}

ExtElement ExtContext::pow(const ExtElement& a, std::uint64_t e) const {
    ExtElement result = one();
    ExtElement base = a;
    while (e > 0) {
        if (e & 1) result = mul(result, base);
        base = mul(base, base);
        e >>= 1;
    }
    return result;
}

ExtElement ExtContext::inv(const ExtElement& a) const {
    if (a.is_zero()) throw std::domain_error("division by zero in GF(q^4)");
    // extended Euclid over GF(q)[x]: find s with s*a == gcd(a, irr) == const
    using Poly = std::vector<std::uint64_t>;
    auto scalar_inv = [&](std::uint64_t v) {
        std::uint64_t e = q_ - 2, base = v % q_, acc = 1 % q_;
        while (e > 0) {
            if (e & 1) acc = acc * base % q_;
            base = base * base % q_;
            e >>= 1;
        }
        return acc;
    };
    auto trim = [](Poly& p) { while (!p.empty() && p.back() == 0) p.pop_back(); };

    Poly r0(irr_.coeffs.begin(), irr_.coeffs.end());
    Poly r1(a.c.begin(), a.c.end());
    trim(r1);
    Poly s0{}, s1{1 % q_};
    while (!r1.empty()) {
        // divide r0 by r1
        Poly quot(r0.size() > r1.size() - 1 ? r0.size() - r1.size() + 1 : 1, 0);
        Poly rem = r0;
        std::uint64_t linv = scalar_inv(r1.back());
        while (rem.size() >= r1.size() && !rem.empty()) {
            std::uint64_t c = rem.back() * linv % q_;
            std::size_t shift = rem.size() - r1.size();
            quot[shift] = c;
            for (std::size_t i = 0; i < r1.size(); ++i)
                rem[shift + i] = (rem[shift + i] + c * (q_ - r1[i])) % q_;
            trim(rem);
        }
        // s_next = s0 - quot * s1
        Poly snext(std::max<std::size_t>(s0.size(), quot.size() + (s1.empty() ? 0 : s1.size() - 1) + 1), 0);
        for (std::size_t i = 0; i < s0.size(); ++i) snext[i] = s0[i];
        for (std::size_t i = 0; i < quot.size(); ++i) {
            if (quot[i] == 0) continue;
            for (std::size_t j = 0; j < s1.size(); ++j)
                snext[i + j] = (snext[i + j] + quot[i] * (q_ - s1[j])) % q_;
        }
        trim(snext);
        r0 = std::move(r1);
        r1 = std::move(rem);
        s0 = std::move(s1);
        s1 = std::move(snext);
    }
    // r0 is a nonzero constant gcd; scale s0 by its inverse
    std::uint64_t g_inv = scalar_inv(r0[0]);
    ExtElement result{};
    for (std::size_t i = 0; i < s0.size() && i < 4; ++i) result.c[i] = s0[i] * g_inv % q_;
    return result;
}

ExtElement ExtContext::element_at(std::uint64_t index) const {
    ExtElement e;
    e.c[0] = index % q_;
    e.c[1] = (index / q_) % q_;
    e.c[2] = (index / (q_ * q_)) % q_;
    e.c[3] = (index / (q_ * q_ * q_)) % q_;
    return e;
}

} // namespace mcip::field
