#pragma once

#include <map>
#include <optional>
#include <unordered_map>

#include "sumprod/expsum.hpp"

namespace sumprod {

// Element of SL_2(F_p): ad - bc = 1.
struct SL2Elem {
    uint32_t a, b, c, d;
    bool operator==(const SL2Elem&) const = default;
    auto operator<=>(const SL2Elem&) const = default;
};

struct GL2Elem {
    uint32_t a, b, c, d;
    uint32_t det;  // nonzero
    bool operator==(const GL2Elem&) const = default;
};

SL2Elem sl2_make(const FieldCtx& F, uint32_t a, uint32_t b, uint32_t c, uint32_t d);
SL2Elem sl2_identity();
SL2Elem sl2_mul(const FieldCtx& F, const SL2Elem& g, const SL2Elem& h);
SL2Elem sl2_inv(const FieldCtx& F, const SL2Elem& g);
uint64_t sl2_key(const FieldCtx& F, const SL2Elem& g);

// Projective line P^1 = F_p with the point at infinity encoded as v = p.
struct ProjPoint {
    uint32_t v;
    bool is_inf(const FieldCtx& F) const { return v == F.p(); }
};
inline ProjPoint proj_inf(const FieldCtx& F) { return {F.p()}; }
inline ProjPoint proj_finite(uint32_t x) { return {x}; }

// Moebius action gz = (az+b)/(cz+d) on P^1.
ProjPoint act(const FieldCtx& F, const SL2Elem& g, ProjPoint z);
ProjPoint act_gl2(const FieldCtx& F, const GL2Elem& g, ProjPoint z);

// Dense enumeration of SL_2(F_p); |SL_2| = p^3 - p.  Gated to small p.
struct SL2Enum {
    Field field;
    std::vector<SL2Elem> elems;
    std::unordered_map<uint64_t, uint32_t> index;
    std::size_t size() const { return elems.size(); }
    uint32_t idx(const SL2Elem& g) const { return index.at(sl2_key(*field, g)); }
};
const SL2Enum& enumerate_sl2(const Field& f);  // cached per field

// Sparse exact weight function on SL_2(F_p), stored as numerators over a
// common positive denominator.
struct GroupFn {
    Field field;
    std::map<uint64_t, std::pair<SL2Elem, Int>> num;  // key -> (element, numerator)
    Int den = 1;

    Rat mass() const;
    Rat l2sq() const;
    bool is_symmetric() const;       // f(x) = f(x^-1)
    bool is_probability() const;     // nonnegative, mass 1
    void add_weight(const SL2Elem& g, const Int& w);

    static GroupFn delta(const Field& f, const SL2Elem& g);
    static GroupFn uniform_on(const Field& f, const std::vector<SL2Elem>& support);
    static GroupFn haar(const Field& f);  // uniform on all of SL_2
};

// Convolution on the group: (mu*nu)(g) = sum_h mu(h) nu(h^-1 g), exact.
GroupFn group_conv(const GroupFn& mu, const GroupFn& nu);

// Generalized convolution with a function on P^1 (f(inf) = 0 convention):
// (F*f)(x) = sum_g F(g) f(g^-1 x); exact rational output of length p+1.
std::vector<Rat> gconv(const GroupFn& F, const IntFn& f);
std::vector<Rat> gconv(const GroupFn& F, const std::vector<Rat>& f_on_p1);

// Matrix families of the expansion arguments.
struct MatrixFamily {
    enum class Kind { Sprime, S, Srational, GL2 } kind;
    Field field;
    std::vector<SL2Elem> elems;     // for SL2-valued kinds
    std::vector<GL2Elem> gl2_elems; // for the GL2 kind
    std::size_t skipped = 0;        // degenerate parameters dropped
    std::size_t b1 = 0, b2 = 0, b3 = 0;  // generating set sizes
    unsigned poly_degree = 0;       // M for Srational
    std::size_t size() const { return kind == Kind::GL2 ? gl2_elems.size() : elems.size(); }
};

MatrixFamily family_sprime(const SetFp& b);
MatrixFamily family_s(const SetFp& b1, const SetFp& b2);
// Checks the linear-independence preconditions of the one-parametric
// family symbolically; rejects naming the dependent combination.
MatrixFamily family_srational(const PolyFrac& r1, const PolyFrac& r2, const SetFp& b);
MatrixFamily family_gl2(const SetFp& b1, const SetFp& b2, const SetFp& b3);

// L2-flattening profile e_k = ||mu *_{2^k} mu||_2^2 - 1/|SL_2|, exact,
// asserting e_k >= 0 and e_{k+1} <= e_k.  Dense iteration gated to p <= 13.
std::vector<Rat> flatten_profile(const GroupFn& mu, unsigned k_max);
// Smallest k with e_k < 2/|SL_2|, if reached.
std::optional<unsigned> flattening_depth(const std::vector<Rat>& profile, const Field& f);

// |AAA| / |A| with the measured growth exponent; never asserts kappa.
struct TriplingResult {
    std::size_t n_a, n_aa, n_aaa;
    double exponent;  // log|AAA|/log|A| - 1
};
TriplingResult tripling(const Field& f, const std::vector<SL2Elem>& a,
                        std::size_t guard = 2000);

// Borel / dihedral coset escape: max |g1 H g2 ^ S| against the family's
// explicit bound; for the GL2 kind the weighted sigma over G^{-1}G pairs.
struct CosetEscapeResult {
    std::vector<BoundReport> rows;
    std::size_t max_borel = 0;
    std::size_t max_dihedral = 0;
    // A Borel configuration exceeding the escape bound (the S' phenomenon).
    std::optional<std::pair<SL2Elem, SL2Elem>> violation;
};
CosetEscapeResult coset_escape(const MatrixFamily& s, std::size_t trials, uint64_t seed = 1);

// Continued fraction value distribution: exact pushforward of
// z -> 1/(a + z) started from 0, k steps; counts over P^1.
struct CfResult {
    std::vector<Int> counts;  // length p+1, infinity last
    Int total;                // |A|^k
    double max_rel_dev;       // max_x |N(x) - |A|^k/p| / (|A|^k/p), finite x
    BoundReport report;
};
CfResult cf_count(const SetFp& a, unsigned k);

// sigma = sum_{s,a} f1(a) f2(sa), exact, with the counting-lemma shape.
struct ActionCountResult {
    Rat sigma;
    Rat main_term;
    Rat error;
    std::optional<unsigned> flattening_k;  // from uniform measure on S^-1 S, p <= 13
    BoundReport report;
};
ActionCountResult action_count(const MatrixFamily& s, const IntFn& f1, const IntFn& f2,
                               bool measure_flattening = true);

// Exact count of 1/a1 - 1/a2 = lambda plus the small-doubling reports.
struct InverseDiffResult {
    Int count;
    Int skipped_zeros;
    Rat k1, k2;                 // |A_i + B| / |A_i|
    EnergyValue inv_energy;     // E^+(1/A1, 1/A2)
    std::vector<BoundReport> rows;
};
InverseDiffResult inverse_diff_count(const SetFp& a1, const SetFp& a2, uint32_t lambda,
                                     const SetFp* b = nullptr);

// Collisions and image size of p1(b) + 1/(a + p2(b)).
struct PolyShiftResult {
    EnergyValue collisions;
    std::size_t image_size;
    Int skipped;
    Rat main_term;
    Rat error;
    BoundReport report;
};
PolyShiftResult poly_shift_count(const SetFp& a, const SetFp& b,
                                 const std::vector<uint32_t>& p1,
                                 const std::vector<uint32_t>& p2);

// Image of (a+b1)/(a b2 + b3) over P^1, determinant spectrum statistic and
// the coset escape report of the GL2 family.
struct Gl2ImageResult {
    std::size_t image_size;      // over P^1 (infinity bucket included)
    bool image_has_inf;
    Int det_pair_statistic;      // sum_z r^2_{B3 - B1 B2}(z), z != 0
    Int degenerate_tally;
    std::vector<BoundReport> rows;
};
Gl2ImageResult gl2_image(const SetFp& a, const SetFp& b1, const SetFp& b2, const SetFp& b3,
                         std::size_t escape_trials = 64);

// Frobenius-type spectral bound sum_x (F*f)(x) phi(x) <= 2p ||F||_2 ||phi||_2 ||f||_2.
enum class FrobeniusMode { Inequality, PowerIteration };
struct FrobeniusResult {
    Rat lhs;            // exact (inequality mode)
    double rhs;
    double lambda1 = 0; // power-iteration estimate
    Rat gram_trace;     // exact sum of squared singular values
    std::vector<BoundReport> rows;
};
FrobeniusResult frobenius_check(const GroupFn& F, const IntFn& f, const IntFn& phi,
                                FrobeniusMode mode);

}  // namespace sumprod
