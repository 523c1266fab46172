#pragma once

#include <complex>
#include <vector>

#include "sumprod/fpcore.hpp"
#include "sumprod/report.hpp"

namespace sumprod {

enum class ConvPath { Auto, Naive, Ntt };
enum class ZeroPolicy { Track, Exclude };

// Process-wide resolution of ConvPath::Auto (default: the p >= 512
// threshold picks the transform-based path).  Overridable by CLI flag.
void set_default_conv_path(ConvPath path);
ConvPath default_conv_path();

// An exact integer-valued function on Z/p with a structural denominator:
// the function is values[x]/denom pointwise.  Balanced indicators carry
// denom = p, plain counts denom = 1.  No gcd normalization is applied.
struct IntFn {
    Field field;
    std::vector<Int> values;  // length exactly p
    Int denom = 1;

    uint32_t p() const { return field->p(); }
    Rat at(uint32_t x) const { return Rat(values[x], denom); }

    Int value_sum() const;              // sum of raw numerators
    Rat sum() const;                    // sum of f
    Rat l1() const;                     // sum |f|
    Rat l2sq() const;                   // sum f^2
    Int max_abs_value() const;          // max |numerator|
    bool is_zero() const;

    static IntFn zero(const Field& f);
    static IntFn delta(const Field& f, uint32_t x);
    static IntFn constant(const Field& f, const Int& c);
    static IntFn indicator(const SetFp& a);
    // p*A(x) - |A| over denom p; mean zero by construction.
    static IntFn balanced(const SetFp& a);
};

IntFn add_fn(const IntFn& f, const IntFn& g);
IntFn sub_fn(const IntFn& f, const IntFn& g);
IntFn scale_fn(const IntFn& f, const Int& c);
// Pointwise k-th power (denominators exponentiate).
IntFn pow_fn(const IntFn& f, unsigned k);
IntFn reflect_fn(const IntFn& f);  // x -> f(-x)

// Complex spectrum of an IntFn.
struct Spectrum {
    Field field;
    std::vector<cdouble> coeffs;  // length p
};

// f_hat(xi) = sum_x f(x) e(-xi x / p).  The naive rule is the reference;
// prime length fast path is a Bluestein chirp reduction to a power-of-two
// transform.  Path selection is by a p threshold (default 512).
Spectrum dft(const IntFn& f, ConvPath path = ConvPath::Auto);
Spectrum dft_naive(const IntFn& f);

// e(k/p) table for a field, built once with long-double argument reduction.
const std::vector<cdouble>& unit_root_table(const Field& f);

// (f*g)(x) = sum_y f(y) g(x-y), exact; result denom = denom_f * denom_g.
IntFn add_conv(const IntFn& f, const IntFn& g, ConvPath path = ConvPath::Auto);
// (f.g)(x) = sum_y f(y) g(y+x), exact.
IntFn add_corr(const IntFn& f, const IntFn& g, ConvPath path = ConvPath::Auto);
// result[x] = sum_{uv=x} f(u) g(v) for x != 0 via the dlog change of
// variables; result[0] = f(0) sum(g) + g(0) sum(f) - f(0)g(0) under Track,
// 0 under Exclude.
IntFn mul_conv(const IntFn& f, const IntFn& g, ZeroPolicy zp = ZeroPolicy::Track,
               ConvPath path = ConvPath::Auto);

// Residual checks of the Plancherel, convolution, inversion and
// product-formula identities; exact sides in IntFn arithmetic, spectral
// sides through dft.
std::vector<BoundReport> identity_suite(const IntFn& f, const IntFn& g,
                                        double tol = 1e-6);

// Exact cyclic integer convolution of arbitrary vectors (helper shared by
// add_conv / mul_conv; exposed for tests).
std::vector<Int> cyclic_int_conv(const std::vector<Int>& a, const std::vector<Int>& b,
                                 ConvPath path = ConvPath::Auto);

}  // namespace sumprod
