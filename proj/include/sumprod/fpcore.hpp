#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sumprod/common.hpp"

namespace sumprod {

// Prime field context: an odd prime p <= 2^20, its least primitive root g,
// and dense exp/dlog tables so that multiplicative structure reduces to
// index arithmetic mod p-1.
class FieldCtx {
  public:
    explicit FieldCtx(uint32_t p);

    uint32_t p() const { return p_; }
    uint32_t g() const { return g_; }

    uint32_t add(uint32_t a, uint32_t b) const {
        uint32_t s = a + b;
        return s >= p_ ? s - p_ : s;
    }
    uint32_t sub(uint32_t a, uint32_t b) const { return a >= b ? a - b : a + p_ - b; }
    uint32_t neg(uint32_t a) const { return a == 0 ? 0 : p_ - a; }
    uint32_t mul(uint32_t a, uint32_t b) const {
        return static_cast<uint32_t>((static_cast<uint64_t>(a) * b) % p_);
    }
    uint32_t pow(uint32_t a, uint64_t e) const;
    // Inverse of a nonzero residue via the dlog table.
    uint32_t inv(uint32_t a) const;

    // dlog(x) for x != 0: g^dlog(x) = x, dlog(1) = 0, dlog(g) = 1.
    uint32_t dlog(uint32_t x) const { return dlog_[x]; }
    // exp(k) = g^k for 0 <= k < p-1.
    uint32_t exp(uint32_t k) const { return exp_[k]; }

    // Legendre symbol: 0 at 0, +1 on nonzero squares, -1 otherwise.
    int legendre(uint32_t x) const {
        if (x == 0) return 0;
        return (dlog_[x] & 1u) ? -1 : +1;
    }

    const std::vector<uint32_t>& prime_factors_of_order() const { return order_factors_; }

  private:
    uint32_t p_ = 0;
    uint32_t g_ = 0;
    std::vector<uint32_t> exp_;   // length p-1
    std::vector<uint32_t> dlog_;  // length p, dlog_[0] unused
    std::vector<uint32_t> order_factors_;
};

using Field = std::shared_ptr<const FieldCtx>;

// Rejects composite or even p with a diagnostic.
Field make_field(uint32_t p);

// A finite subset of F_p: strictly increasing residues.
struct SetFp {
    Field field;
    std::vector<uint32_t> elems;

    std::size_t size() const { return elems.size(); }
    bool contains(uint32_t x) const;
    // 0/1 membership vector of length p.
    std::vector<uint8_t> bitmap() const;
};

SetFp make_set(const Field& f, std::vector<uint32_t> residues);

// The multiplicative subgroup of order t | p-1.
SetFp subgroup(const Field& f, uint32_t t);

// Set algebra used by the verification suites.
SetFp sumset(const SetFp& a, const SetFp& b);
SetFp product_set(const SetFp& a, const SetFp& b);
SetFp intersect(const SetFp& a, const SetFp& b);
SetFp set_union(const SetFp& a, const SetFp& b);
SetFp set_difference(const SetFp& a, const SetFp& b);
// {x^-1 : x in a, x != 0}; zero is dropped and counted in *dropped_zeros.
SetFp inverse_set(const SetFp& a, std::size_t* dropped_zeros = nullptr);
SetFp negate_set(const SetFp& a);
SetFp shift_set(const SetFp& a, uint32_t s);
SetFp dilate_set(const SetFp& a, uint32_t m);

// Deterministic set generation.
struct SetSpec {
    enum class Kind { Random, Full, Interval, Subgroup, ShiftedSubgroup, Explicit, File };
    Kind kind = Kind::Random;
    uint32_t p = 0;
    std::size_t n = 0;       // random
    uint64_t seed = 0;       // random
    uint32_t lo = 0, hi = 0; // interval
    uint32_t t = 1;          // subgroup order
    uint32_t shift = 0;      // shifted-subgroup additive shift
    std::vector<uint32_t> explicit_elems;
    std::string path;
};

// Textual forms: random:p=1009,n=64,seed=7 | full:p=7 |
// interval:p=1009,lo=0,hi=63 | subgroup:p=1009,t=144 |
// shifted-subgroup:p=1009,t=144,shift=5 | explicit:p=11,{1,2,5} |
// file:p=1009,path=sets/a.txt
SetSpec parse_set_spec(const std::string& text);
SetFp gen_set(const SetSpec& spec);
SetFp gen_set(const SetSpec& spec, const Field& f);

// Identifier of the PRNG/sampling algorithm used by random specs,
// recorded in run metadata.
const char* set_rng_id();

// File format: one decimal residue per line, '#' starts a comment.
std::vector<uint32_t> read_set_file(const std::string& path);
void write_set_file(const std::string& path, const SetFp& s);

// Multiplicative character of exact order d | p-1, d > 1, stored as
// root-of-unity indices: chi(x) = e(idx(x)/d), chi(0) = 0.
struct CharTable {
    Field field;
    uint32_t order = 1;
    std::vector<uint32_t> idx;  // length p; idx[0] is a sentinel
    static constexpr uint32_t kZero = UINT32_MAX;

    bool is_zero(uint32_t x) const { return idx[x] == kZero; }
    cdouble value(uint32_t x) const;
    // Exact evaluations for real characters (order 2): -1/0/+1.
    int sign_value(uint32_t x) const;
};

CharTable mul_char(const Field& f, uint32_t d);

}  // namespace sumprod
