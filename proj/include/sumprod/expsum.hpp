#pragma once

#include "sumprod/energy.hpp"

namespace sumprod {

// A complex sum with its trivial bound and accumulated error budget.
struct CSum {
    cdouble value{0.0, 0.0};
    Int term_count = 0;
    double abs_bound() const { return to_double(term_count); }
    double err_est() const { return 1e-12 * to_double(term_count); }
};

// S(X,Y,Z; alpha,beta,gamma) = sum alpha_x beta_y gamma_z e(xyz); weights
// aligned with the sets' element order, all bounded by one in modulus.
// Empty weight vectors mean unit weights.
CSum trilinear_sum(const SetFp& x, const SetFp& y, const SetFp& z,
                   const std::vector<cdouble>& alpha = {},
                   const std::vector<cdouble>& beta = {},
                   const std::vector<cdouble>& gamma = {});

// Direct-summation reference for the collapsed path (tests).
CSum trilinear_sum_direct(const SetFp& x, const SetFp& y, const SetFp& z,
                          const std::vector<cdouble>& alpha = {},
                          const std::vector<cdouble>& beta = {},
                          const std::vector<cdouble>& gamma = {});

// Bilinear weights rho_{x,y} as dense p x p tables (row-major residues).
struct BilinearWeights {
    Field field;
    std::vector<cdouble> w;  // p*p, defaults to all ones
    cdouble at(uint32_t i, uint32_t j) const { return w[static_cast<size_t>(i) * field->p() + j]; }
};

BilinearWeights unit_bilinear(const Field& f);

// T(X,Y,Z; rho,sigma,tau) = sum rho_{x,y} sigma_{x,z} tau_{y,z} e(xyz),
// direct triple loop.
CSum trilinear_bilinear_sum(const SetFp& x, const SetFp& y, const SetFp& z,
                            const BilinearWeights& rho, const BilinearWeights& sigma,
                            const BilinearWeights& tau);

// sum e(a_1 ... a_r) for 3 <= r <= 5 via the exact product-distribution
// collapse; floating point only at the final character sum.
CSum multilinear_sum(const std::vector<SetFp>& sets);

// Explicit saving exponents of the multilinear bounds.
struct ExponentSpec {
    double delta = 0.0;
    unsigned r = 3;
    double exponent = 0.0;
    unsigned k = 0;  // optimizing parameter for the k-free variant
};

enum class ExponentVariant { ThreeSet, FourSet, KFree };

// ThreeSet: delta / (8 log2(8/delta) + 4); FourSet:
// delta / (16 ceil(0.5 log2(200/delta))^2); KFree: delta/(4l) with
// l = ceil(2 log2(8/delta)), reported together with k = ceil(log2 l).
ExponentSpec bound_exponent(double delta, unsigned r, ExponentVariant variant);

// Mixed character sums over inverse shifts and Moebius images.
enum class SpecialSumKind { InvShiftE, InvShiftChi, RationalE, RationalChi };

struct PolyFrac {
    std::vector<uint32_t> num;  // coefficients, constant term first
    std::vector<uint32_t> den;  // empty means the constant 1
};

struct SpecialSumResult {
    CSum sum;
    Int skipped = 0;          // zero-denominator tuples skipped
    BoundReport report;       // rhs shape with the supplied flattening delta
};

// f, g enter as exact integer functions, evaluated as complex weights.
// chi is required for the Chi kinds; r1, r2 for the Rational kinds.
SpecialSumResult special_sum(SpecialSumKind kind, const IntFn& f, const IntFn& g,
                             const SetFp& b, const CharTable* chi = nullptr,
                             const PolyFrac* r1 = nullptr, const PolyFrac* r2 = nullptr,
                             double flattening_delta = 0.0);

uint32_t poly_eval(const std::vector<uint32_t>& coeffs, uint32_t x, const FieldCtx& F);

}  // namespace sumprod
