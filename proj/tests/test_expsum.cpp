#include "doctest.h"
#include "sumprod/expsum.hpp"
#include "sumprod/oracle.hpp"

#include <random>

using namespace sumprod;

namespace {
SetFp rnd_set(const Field& f, std::size_t n, uint64_t seed) {
    SetSpec s;
    s.kind = SetSpec::Kind::Random;
    s.p = f->p();
    s.n = n;
    s.seed = seed;
    return gen_set(s, f);
}

SetFp full_set(const Field& f) {
    std::vector<uint32_t> v(f->p());
    for (uint32_t i = 0; i < f->p(); ++i) v[i] = i;
    return make_set(f, v);
}

std::vector<cdouble> pm_weights(std::size_t n, std::mt19937_64& rng) {
    std::vector<cdouble> w(n);
    for (auto& z : w) z = (rng() & 1) ? cdouble(1, 0) : cdouble(-1, 0);
    return w;
}
}  // namespace

TEST_CASE("trilinear sum: full-set identity and collapse consistency") {
    for (uint32_t p : {7u, 101u}) {
        auto f = make_field(p);
        SetFp full = full_set(f);
        CSum s = trilinear_sum(full, full, full);
        double expect = static_cast<double>(p) * (2.0 * p - 1.0);
        CHECK(std::abs(s.value - cdouble(expect, 0)) / expect < 1e-6);
    }

    auto f = make_field(101);
    SetFp x = rnd_set(f, 9, 1), y = rnd_set(f, 8, 2);
    SetFp z0 = make_set(f, {0});
    CSum s0 = trilinear_sum(x, y, z0);
    CHECK(std::abs(s0.value - cdouble(static_cast<double>(x.size() * y.size()), 0)) < 1e-9);

    std::mt19937_64 rng(17);
    SetFp z = rnd_set(f, 7, 3);
    auto wa = pm_weights(x.size(), rng), wb = pm_weights(y.size(), rng),
         wc = pm_weights(z.size(), rng);
    CSum fast = trilinear_sum(x, y, z, wa, wb, wc);
    cdouble direct = oracle::trilinear_sum(x, y, z, wa, wb, wc);
    CHECK(std::abs(fast.value - direct) /
              std::max(1.0, std::abs(direct)) < 1e-6);
    CHECK(std::abs(fast.value) <= fast.abs_bound() + fast.err_est());

    // Conjugation symmetry: negating every set conjugates the value.
    SetFp nx = negate_set(x), ny = negate_set(y), nz = negate_set(z);
    CSum plain = trilinear_sum(x, y, z);
    CSum reflected = trilinear_sum(nx, ny, nz);
    CHECK(std::abs(reflected.value - std::conj(plain.value)) < 1e-9);

    CSum again = trilinear_sum(x, y, z, wa, wb, wc);
    CHECK(again.value == fast.value);  // deterministic accumulation
}

TEST_CASE("bilinear-weighted trilinear sum") {
    auto f = make_field(31);
    SetFp x = rnd_set(f, 6, 4), y = rnd_set(f, 5, 5), z = rnd_set(f, 5, 6);

    BilinearWeights zero = unit_bilinear(f);
    for (auto& w : zero.w) w = cdouble(0, 0);
    CSum s0 = trilinear_bilinear_sum(x, y, z, zero, unit_bilinear(f), unit_bilinear(f));
    CHECK(std::abs(s0.value) < 1e-12);

    CSum unit = trilinear_bilinear_sum(x, y, z, unit_bilinear(f), unit_bilinear(f),
                                       unit_bilinear(f));
    CSum tri = trilinear_sum(x, y, z);
    CHECK(std::abs(unit.value - tri.value) < 1e-9);

    std::mt19937_64 rng(23);
    BilinearWeights rho = unit_bilinear(f), sig = unit_bilinear(f), tau = unit_bilinear(f);
    for (auto& w : rho.w) w = (rng() & 1) ? cdouble(1, 0) : cdouble(-1, 0);
    for (auto& w : sig.w) w = (rng() & 1) ? cdouble(1, 0) : cdouble(-1, 0);
    for (auto& w : tau.w) w = (rng() & 1) ? cdouble(1, 0) : cdouble(-1, 0);
    CSum s1 = trilinear_bilinear_sum(x, y, z, rho, sig, tau);
    CSum s2 = trilinear_bilinear_sum(x, y, z, rho, sig, tau);
    CHECK(std::abs(s1.value - s2.value) < 1e-9);
}

TEST_CASE("multilinear sums") {
    auto f = make_field(31);
    SetFp a1 = rnd_set(f, 5, 7), a2 = rnd_set(f, 4, 8), a3 = rnd_set(f, 4, 9);
    SetFp zero = make_set(f, {0});

    CSum sz = multilinear_sum({a1, zero, a3});
    CHECK(std::abs(sz.value - cdouble(static_cast<double>(a1.size() * a3.size()), 0)) < 1e-9);

    CSum tri = trilinear_sum(a1, a2, a3);
    CSum multi = multilinear_sum({a1, a2, a3});
    CHECK(std::abs(tri.value - multi.value) < 1e-6);

    SetFp a4 = rnd_set(f, 3, 10);
    CSum m4 = multilinear_sum({a1, a2, a3, a4});
    cdouble direct = oracle::multilinear_sum({a1, a2, a3, a4});
    CHECK(std::abs(m4.value - direct) / std::max(1.0, std::abs(direct)) < 1e-6);

    CHECK_THROWS_AS(multilinear_sum({a1, a2}), std::invalid_argument);
}

TEST_CASE("bound exponents") {
    auto three = bound_exponent(1.0, 3, ExponentVariant::ThreeSet);
    CHECK(three.exponent == doctest::Approx(1.0 / 28.0));  // log base 2

    auto four = bound_exponent(0.5, 4, ExponentVariant::FourSet);
    double n = std::ceil(0.5 * std::log2(400.0));
    CHECK(four.exponent == doctest::Approx(0.5 / (16.0 * n * n)));

    auto boundary = bound_exponent(8.0, 3, ExponentVariant::ThreeSet);
    CHECK(boundary.exponent == doctest::Approx(2.0));  // log term clamps to zero

    auto kfree = bound_exponent(1.0, 3, ExponentVariant::KFree);
    CHECK(kfree.k >= 1);
    CHECK(kfree.exponent == doctest::Approx(1.0 / (4.0 * std::ceil(2.0 * std::log2(8.0)))));

    CHECK_THROWS_AS(bound_exponent(0.0, 3, ExponentVariant::ThreeSet), std::invalid_argument);
}

namespace {
// Literal loops for the special sums, used as the test oracle.
cdouble direct_inv_shift_e(const IntFn& f, const IntFn& g, const SetFp& b) {
    const FieldCtx& F = *f.field;
    uint32_t p = F.p();
    const long double pi2 = 6.28318530717958647692528676655900577L;
    cdouble acc{0, 0};
    for (uint32_t x = 0; x < p; ++x) {
        if (f.values[x] == 0) continue;
        double fv = to_double(f.at(x));
        for (uint32_t y = 0; y < p; ++y) {
            if (g.values[y] == 0) continue;
            double gv = to_double(g.at(y));
            for (uint32_t b1 : b.elems) {
                if (F.add(x, b1) == 0) continue;
                uint32_t u = F.inv(F.add(x, b1));
                for (uint32_t b2 : b.elems) {
                    uint64_t e = static_cast<uint64_t>(y) * F.add(u, b2) % p;
                    long double th = pi2 * static_cast<long double>(e) / p;
                    acc += fv * gv *
                           cdouble(static_cast<double>(cosl(th)), static_cast<double>(sinl(th)));
                }
            }
        }
    }
    return acc;
}

cdouble direct_inv_shift_chi(const IntFn& f, const IntFn& g, const SetFp& b,
                             const CharTable& chi) {
    const FieldCtx& F = *f.field;
    uint32_t p = F.p();
    cdouble acc{0, 0};
    for (uint32_t x = 0; x < p; ++x) {
        if (f.values[x] == 0) continue;
        for (uint32_t y = 0; y < p; ++y) {
            if (g.values[y] == 0) continue;
            for (uint32_t b1 : b.elems) {
                if (F.add(x, b1) == 0) continue;
                uint32_t u = F.inv(F.add(x, b1));
                for (uint32_t b2 : b.elems)
                    acc += to_double(f.at(x)) * to_double(g.at(y)) *
                           chi.value(F.add(F.add(y, b2), u));
            }
        }
    }
    return acc;
}
}  // namespace

TEST_CASE("special sums against direct loops") {
    auto f = make_field(101);
    SetFp xs = rnd_set(f, 8, 11), ys = rnd_set(f, 7, 12), bs = rnd_set(f, 5, 13);
    IntFn ff = IntFn::indicator(xs), gg = IntFn::indicator(ys);

    SetFp bempty{f, {}};
    auto empty = special_sum(SpecialSumKind::InvShiftE, ff, gg, bempty);
    CHECK(std::abs(empty.sum.value) < 1e-12);

    auto e1 = special_sum(SpecialSumKind::InvShiftE, ff, gg, bs);
    cdouble d1 = direct_inv_shift_e(ff, gg, bs);
    CHECK(std::abs(e1.sum.value - d1) / std::max(1.0, std::abs(d1)) < 1e-6);

    auto chi = mul_char(f, 2);
    auto e2 = special_sum(SpecialSumKind::InvShiftChi, ff, gg, bs, &chi);
    cdouble d2 = direct_inv_shift_chi(ff, gg, bs, chi);
    CHECK(std::abs(e2.sum.value - d2) / std::max(1.0, std::abs(d2)) < 1e-6);

    // Single points, |B| = 1: a lone character value of modulus 1.
    IntFn fd = IntFn::delta(f, 4), gd = IntFn::delta(f, 9);
    SetFp b1 = make_set(f, {2});
    auto single = special_sum(SpecialSumKind::InvShiftE, fd, gd, b1);
    CHECK(std::abs(std::abs(single.sum.value) - 1.0) < 1e-9);

    // Rational kinds against a literal evaluation through poly_eval.
    PolyFrac r1{{0, 1}, {}};     // x
    PolyFrac r2{{0, 0, 1}, {}};  // x^2
    auto re = special_sum(SpecialSumKind::RationalE, ff, gg, bs, nullptr, &r1, &r2);
    {
        const FieldCtx& F = *f;
        uint32_t p = F.p();
        const long double pi2 = 6.28318530717958647692528676655900577L;
        cdouble acc{0, 0};
        Int skipped = 0;
        for (uint32_t x : xs.elems)
            for (uint32_t bv : bs.elems) {
                uint32_t p1v = bv, q1v = 1;
                uint32_t p2v = F.mul(bv, bv), q2v = 1;
                uint32_t A = F.mul(q1v, q2v), Bc = F.mul(p1v, q2v);
                uint32_t C = F.mul(p2v, q1v), D = F.add(F.mul(q1v, q2v), F.mul(p1v, p2v));
                uint32_t den = F.add(F.mul(C, x), D);
                if (den == 0) {
                    ++skipped;
                    continue;
                }
                uint32_t v = F.mul(F.add(F.mul(A, x), Bc), F.inv(den));
                for (uint32_t y : ys.elems) {
                    uint64_t e = static_cast<uint64_t>(y) * v % p;
                    long double th = pi2 * static_cast<long double>(e) / p;
                    acc += cdouble(static_cast<double>(cosl(th)), static_cast<double>(sinl(th)));
                }
            }
        CHECK(std::abs(re.sum.value - acc) / std::max(1.0, std::abs(acc)) < 1e-6);
        CHECK(re.skipped == skipped);
    }

    PolyFrac bad{{}, {}};
    CHECK_THROWS_AS(special_sum(SpecialSumKind::RationalE, ff, gg, bs, nullptr, &bad, &r2),
                    std::invalid_argument);
    CHECK_THROWS_AS(special_sum(SpecialSumKind::InvShiftChi, ff, gg, bs, nullptr),
                    std::invalid_argument);
}

TEST_CASE("rational-chi special sum against a literal loop") {
    auto f = make_field(101);
    SetFp xs = gen_set(parse_set_spec("random:p=101,n=7,seed=61"));
    SetFp ys = gen_set(parse_set_spec("random:p=101,n=6,seed=62"));
    SetFp bs = gen_set(parse_set_spec("random:p=101,n=4,seed=63"));
    IntFn ff = IntFn::indicator(xs), gg = IntFn::indicator(ys);
    auto chi = mul_char(f, 4);
    PolyFrac r1{{1, 2}, {}};     // 1 + 2x
    PolyFrac r2{{0, 0, 3}, {}};  // 3x^2
    auto res = special_sum(SpecialSumKind::RationalChi, ff, gg, bs, &chi, &r1, &r2);

    const FieldCtx& F = *f;
    cdouble acc{0, 0};
    Int skipped = 0;
    for (uint32_t x : xs.elems)
        for (uint32_t bv : bs.elems) {
            uint32_t p1v = poly_eval(r1.num, bv, F), q1v = 1;
            uint32_t p2v = poly_eval(r2.num, bv, F), q2v = 1;
            uint32_t A = F.mul(q1v, q2v), Bc = F.mul(p1v, q2v);
            uint32_t C = F.mul(p2v, q1v), D = F.add(F.mul(q1v, q2v), F.mul(p1v, p2v));
            uint32_t den = F.add(F.mul(C, x), D);
            if (den == 0) {
                ++skipped;
                continue;
            }
            uint32_t v = F.mul(F.add(F.mul(A, x), Bc), F.inv(den));
            for (uint32_t y : ys.elems) acc += chi.value(F.add(y, v));
        }
    CHECK(res.skipped == skipped);
    CHECK(std::abs(res.sum.value - acc) / std::max(1.0, std::abs(acc)) < 1e-6);
}
