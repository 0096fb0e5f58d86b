#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace thetacert {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;
using i128 = __int128;

namespace modarith {

inline u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

inline u64 addmod(u64 a, u64 b, u64 m)
{
    u64 s = a + b;
    return s >= m ? s - m : s;
}

inline u64 submod(u64 a, u64 b, u64 m) { return a >= b ? a - b : a + m - b; }

inline u64 negmod(u64 a, u64 m) { return a == 0 ? 0 : m - a; }

inline u64 reduce(i64 a, u64 m)
{
    i64 r = a % static_cast<i64>(m);
    return static_cast<u64>(r < 0 ? r + static_cast<i64>(m) : r);
}

inline u64 powmod(u64 a, u64 e, u64 m)
{
    u64 r = 1 % m;
    a %= m;
    while (e) {
        if (e & 1) r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1;
    }
    return r;
}

// Inverse of a modulo m; throws when gcd(a, m) != 1.
inline u64 invmod(u64 a, u64 m)
{
    i128 t = 0, nt = 1, r = m, nr = a % m;
    while (nr != 0) {
        i128 q = r / nr;
        i128 tmp = t - q * nt;
        t = nt;
        nt = tmp;
        tmp = r - q * nr;
        r = nr;
        nr = tmp;
    }
    if (r != 1) throw std::domain_error("invmod: element is not invertible");
    if (t < 0) t += m;
    return static_cast<u64>(t);
}

// p-adic valuation of a nonzero integer.
inline int vp(u64 a, u64 p)
{
    if (a == 0) throw std::domain_error("vp: zero has infinite valuation");
    int v = 0;
    while (a % p == 0) {
        a /= p;
        ++v;
    }
    return v;
}

// p^k, or 0 when the result does not fit below 2^bits.
inline u64 checked_pow(u64 p, int k, int bits = 63)
{
    u128 r = 1;
    for (int i = 0; i < k; ++i) {
        r *= p;
        if (r >> bits) return 0;
    }
    return static_cast<u64>(r);
}

inline bool is_prime(u64 n)
{
    if (n < 2) return false;
    for (u64 q : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % q == 0) return n == q;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        u64 x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

// Multiplicative order of a modulo prime p.
inline u64 order_mod(u64 a, u64 p)
{
    a %= p;
    if (a == 0) throw std::domain_error("order_mod: zero has no order");
    u64 x = a, n = 1;
    while (x != 1) {
        x = mulmod(x, a, p);
        ++n;
    }
    return n;
}

// Teichmuller representative of i modulo p^j, i.e. i^(p^(j-1)) mod p^j.
inline u64 teichmuller_int(u64 p, i64 i, int j)
{
    u64 m = checked_pow(p, j, 63);
    if (m == 0) throw std::overflow_error("teichmuller_int: modulus too large");
    u64 a = reduce(i, m);
    if (a % p == 0) throw std::domain_error("teichmuller: residue must be nonzero mod p");
    for (int r = 1; r < j; ++r) a = powmod(a, p, m);
    return a;
}

} // namespace modarith
} // namespace thetacert
