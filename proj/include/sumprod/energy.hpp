#pragma once

#include <optional>

#include "sumprod/transform.hpp"

namespace sumprod {

// Scalar energies are exact rationals (denominator a power of p whenever
// balanced functions enter).
using EnergyValue = Rat;

enum class RepKind { Sum, Diff, Product, Quotient, KFoldSum };

// Representation functions r_{A+B}, r_{A-B}, r_{AB}, r_{A/B}, r_{kA}.
// Quotient excludes b = 0.  KFoldSum uses k, ignores b.
IntFn rep_fn(RepKind kind, const SetFp& a, const SetFp& b, unsigned k = 1,
             ZeroPolicy zp = ZeroPolicy::Track);

// E^+ / E^x of two sets: number of quadruples a1+b1 = a2+b2 (resp. products).
EnergyValue energy_add(const SetFp& a, const SetFp& b);
EnergyValue energy_mul(const SetFp& a, const SetFp& b);
EnergyValue energy_add(const IntFn& f, const IntFn& g);
EnergyValue energy_mul(const IntFn& f, const IntFn& g);

// Default caps guarding |A|^{2k} blowup; raise explicitly when needed.
inline constexpr unsigned kDefaultKCap = 8;
inline constexpr unsigned kDefaultDtimesKCap = 4;

// E^+_k(f) = sum_x (f.f)(x)^k.  k = 1 gives (sum f)^2 for indicators.
EnergyValue energy_k(const IntFn& f, unsigned k, unsigned k_cap = kDefaultKCap);
EnergyValue energy_k(const SetFp& a, unsigned k, unsigned k_cap = kDefaultKCap);

// T^+_k(f) = sum_x r_{kf}(x)^2.
EnergyValue tk(const IntFn& f, unsigned k, unsigned k_cap = kDefaultKCap);
EnergyValue tk(const SetFp& a, unsigned k, unsigned k_cap = kDefaultKCap);

// E^+(f1,f2,f3,f4) = sum_z (f1.f3)(z) (f2.f4)(z).
EnergyValue energy4(const IntFn& f1, const IntFn& f2, const IntFn& f3, const IntFn& f4);

// D^x_k: collision count of k-fold products of differences; the two-weight
// form uses difference factors a - b with a alpha-weighted and b
// beta-weighted, so D^x_k(A,A) is the plain one-set quantity.
EnergyValue dtimes_k(const SetFp& a, unsigned k, ZeroPolicy zp = ZeroPolicy::Track,
                     unsigned k_cap = kDefaultDtimesKCap);
EnergyValue dtimes_k(const IntFn& alpha, const IntFn& beta, unsigned k,
                     ZeroPolicy zp = ZeroPolicy::Track,
                     unsigned k_cap = kDefaultDtimesKCap);

// D'_k(A) = T^+_k(r_{AA}); D'_1(A) is the multiplicative energy E^x(A).
EnergyValue dprime_k(const SetFp& a, unsigned k, unsigned k_cap = kDefaultKCap);


// N(A,B,C): collisions of a(b-c).
EnergyValue n_quantity(const SetFp& a, const SetFp& b, const SetFp& c);

// N'(A): collisions of a1 a2 + a3.
EnergyValue nprime(const SetFp& a);

// sigma_P(A) = sum_{x in P} r_{A-A}(x).
EnergyValue sigma_p(const SetFp& a, const SetFp& pset);

// Constant-free inequality (sum_{x in P} r^k_{f-f}(x))^4
//   <= ||f||_2^{4k} E^+_{2k}(f) E^+(P), both sides exact.
BoundReport change_qg_check(const IntFn& f, const SetFp& pset, unsigned k);

// Verified-invariance report over a multiplicative subgroup.
struct GammaReport {
    SetFp gamma;
    std::vector<BoundReport> rows;
};

// Rows: (a) exact subgroup lower bounds, (b) measured T-ratio, (c) spectral
// maximum vs the exponential-sum shape, (d) the shift-energy dichotomy,
// (e) the sigma-moment inequality behind a verified premise, (f) the exact
// Legendre-energy identity.  f must be Gamma-invariant with zero mean.
GammaReport gamma_suite(const SetFp& gamma, const IntFn& f, unsigned k_max);

// True iff f(x*gamma) = f(x) for all x in F_p^*, gamma in Gamma; on failure
// returns the witness pair.
bool is_gamma_invariant(const SetFp& gamma, const IntFn& f,
                        std::pair<uint32_t, uint32_t>* witness = nullptr);

}  // namespace sumprod
