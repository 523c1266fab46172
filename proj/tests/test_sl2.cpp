#include "doctest.h"
#include "sumprod/oracle.hpp"
#include "sumprod/sl2.hpp"

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
}  // namespace

TEST_CASE("group axioms and the projective action") {
    auto f5 = make_field(5);
    const FieldCtx& F = *f5;
    const SL2Enum& en = enumerate_sl2(f5);
    REQUIRE(en.size() == 120);  // p^3 - p

    for (const auto& g : en.elems) {
        SL2Elem gi = sl2_inv(F, g);
        CHECK(sl2_mul(F, g, gi) == sl2_identity());
        CHECK(sl2_mul(F, gi, g) == sl2_identity());
    }

    // The action is exact on P^1, exhaustively at p = 5.
    for (const auto& g : en.elems)
        for (const auto& h : en.elems)
            for (uint32_t z = 0; z <= 5; ++z) {
                ProjPoint lhs = act(F, sl2_mul(F, g, h), ProjPoint{z});
                ProjPoint rhs = act(F, g, act(F, h, ProjPoint{z}));
                if (lhs.v != rhs.v) {
                    REQUIRE(lhs.v == rhs.v);
                }
            }

    for (uint32_t z = 0; z <= 5; ++z)
        CHECK(act(F, sl2_identity(), ProjPoint{z}).v == z);

    SL2Elem w{0, F.neg(1), 1, 0};
    CHECK(act(F, w, proj_finite(0)).is_inf(F));
    CHECK(act(F, w, proj_inf(F)).v == 0);

    // Random associativity triples at p = 101.
    auto f101 = make_field(101);
    const FieldCtx& F1 = *f101;
    std::mt19937_64 rng(3);
    auto rand_el = [&]() {
        uint32_t a = static_cast<uint32_t>(rng() % 101);
        if (a == 0) a = 1;
        uint32_t b = static_cast<uint32_t>(rng() % 101);
        uint32_t c = static_cast<uint32_t>(rng() % 101);
        uint32_t d = F1.mul(F1.add(1, F1.mul(b, c)), F1.inv(a));
        return SL2Elem{a, b, c, d};
    };
    for (int t = 0; t < 10000; ++t) {
        SL2Elem g = rand_el(), h = rand_el();
        uint32_t z = static_cast<uint32_t>(rng() % 102);
        CHECK(act(F1, sl2_mul(F1, g, h), ProjPoint{z}).v ==
              act(F1, g, act(F1, h, ProjPoint{z})).v);
    }
}

TEST_CASE("matrix families") {
    auto f13 = make_field(13);
    SetFp b1 = rnd_set(f13, 4, 5), b2 = rnd_set(f13, 5, 6);
    MatrixFamily s = family_s(b1, b2);
    CHECK(s.size() == b1.size() * b2.size());
    const FieldCtx& F = *f13;
    for (const auto& m : s.elems)
        CHECK(F.sub(F.mul(m.a, m.d), F.mul(m.b, m.c)) == 1);

    MatrixFamily sp = family_sprime(b1);
    CHECK(sp.size() == b1.size());
    for (const auto& m : sp.elems) {
        CHECK(m.a == 0);
        CHECK(m.c == 1);
    }

    PolyFrac r1{{0, 1}, {}};     // x
    PolyFrac r2{{0, 0, 1}, {}};  // x^2
    MatrixFamily sr = family_srational(r1, r2, b1);
    CHECK(sr.poly_degree == 2);
    for (const auto& m : sr.elems) {
        CHECK(m.a == 1);
        CHECK(m.d == F.add(1, F.mul(m.b, m.c)));
    }

    // r1 = r2 makes {p1p2, p1q2, p2q1, q1q2} dependent.
    CHECK_THROWS_AS(family_srational(r1, r1, b1), std::invalid_argument);

    SetFp b3 = rnd_set(f13, 4, 7);
    MatrixFamily gl = family_gl2(b1, b2, b3);
    for (const auto& m : gl.gl2_elems) CHECK(m.det != 0);
    CHECK(gl.size() + gl.skipped == b1.size() * b2.size() * b3.size());
}

TEST_CASE("gconv: delta, uniform and pullback") {
    auto f5 = make_field(5);
    const FieldCtx& F = *f5;
    SetFp a = make_set(f5, {1, 3});
    IntFn fa = IntFn::indicator(a);

    auto id_conv = gconv(GroupFn::delta(f5, sl2_identity()), fa);
    for (uint32_t x = 0; x < 5; ++x) CHECK(id_conv[x] == fa.at(x));
    CHECK(id_conv[5] == 0);

    // Uniform weight on the full group averages over P^1 with the orbit factor.
    auto uni = gconv(GroupFn::uniform_on(f5, enumerate_sl2(f5).elems), fa);
    Rat expect = Rat(120, 6) * fa.sum() / Rat(120);  // (|SL2|/(p+1)) sum f / |SL2|
    for (uint32_t x = 0; x <= 5; ++x) CHECK(uni[x] == expect);

    SL2Elem g{2, 1, 1, 1};
    REQUIRE(F.sub(F.mul(g.a, g.d), F.mul(g.b, g.c)) == 1);
    auto pull = gconv(GroupFn::delta(f5, g), fa);
    for (uint32_t x = 0; x <= 5; ++x) {
        ProjPoint z = act(F, sl2_inv(F, g), ProjPoint{x});
        Rat expect_x = z.v == 5 ? Rat(0) : fa.at(z.v);
        CHECK(pull[x] == expect_x);
    }
}

TEST_CASE("group convolution: delta algebra, Haar idempotence, mass") {
    auto f5 = make_field(5);
    const FieldCtx& F = *f5;
    SL2Elem g{2, 1, 1, 1}, h{0, F.neg(1), 1, 3};
    auto dg = GroupFn::delta(f5, g), dh = GroupFn::delta(f5, h);
    auto prod = group_conv(dg, dh);
    REQUIRE(prod.num.size() == 1);
    CHECK(prod.num.begin()->second.first == sl2_mul(F, g, h));

    auto haar = GroupFn::haar(f5);
    auto hh = group_conv(haar, haar);
    CHECK(hh.mass() == 1);
    for (const auto& [k, v] : hh.num) CHECK(Rat(v.second, hh.den) == Rat(1, 120));

    auto f7 = make_field(7);
    std::mt19937_64 rng(9);
    std::vector<SL2Elem> support;
    const SL2Enum& en7 = enumerate_sl2(f7);
    for (int i = 0; i < 6; ++i) support.push_back(en7.elems[rng() % en7.size()]);
    auto mu = GroupFn::uniform_on(f7, support);
    CHECK(group_conv(mu, mu).mass() == 1);

    // Fast convolution equals the literal double loop.
    std::vector<SL2Elem> sup2;
    for (int i = 0; i < 5; ++i) sup2.push_back(en7.elems[rng() % en7.size()]);
    auto nu = GroupFn::uniform_on(f7, sup2);
    auto fast = group_conv(mu, nu);
    auto brute = oracle::group_conv(mu, nu);
    CHECK(fast.den == brute.den);
    CHECK(fast.num.size() == brute.num.size());
    for (const auto& [k, v] : fast.num) {
        auto it = brute.num.find(k);
        REQUIRE(it != brute.num.end());
        CHECK(it->second.second == v.second);
    }
}

TEST_CASE("flattening profile") {
    auto f5 = make_field(5);
    const FieldCtx& F = *f5;

    auto haar_profile = flatten_profile(GroupFn::haar(f5), 3);
    for (const auto& e : haar_profile) CHECK(e == 0);

    auto delta_profile = flatten_profile(GroupFn::delta(f5, sl2_identity()), 3);
    Rat expect = Rat(1) - Rat(1, 120);
    for (const auto& e : delta_profile) CHECK(e == expect);

    // A symmetric generating pair with inverses flattens quickly.
    SL2Elem u{1, 1, 0, 1}, v{1, 0, 1, 1};
    std::vector<SL2Elem> gens{u, sl2_inv(F, u), v, sl2_inv(F, v)};
    auto mu = GroupFn::uniform_on(f5, gens);
    auto profile = flatten_profile(mu, 5);
    for (std::size_t k = 1; k < profile.size(); ++k) CHECK(profile[k] <= profile[k - 1]);
    CHECK(profile[5] < Rat(1, 1000));
    CHECK(flattening_depth(profile, f5).has_value());

    // Asymmetric input is rejected.
    auto bad = GroupFn::uniform_on(f5, {u});
    CHECK_THROWS_AS(flatten_profile(bad, 2), std::invalid_argument);
}

TEST_CASE("tripling ratios") {
    auto f13 = make_field(13);
    const FieldCtx& F = *f13;

    std::vector<SL2Elem> unipotent;
    for (uint32_t q = 0; q < 13; ++q) unipotent.push_back(SL2Elem{1, q, 0, 1});
    auto closed = tripling(f13, unipotent);
    CHECK(closed.n_aaa == closed.n_a);
    CHECK(closed.exponent == doctest::Approx(0.0));

    auto id_only = tripling(f13, {sl2_identity()});
    CHECK(id_only.n_aaa == 1);

    std::mt19937_64 rng(17);
    const SL2Enum& en = enumerate_sl2(f13);
    std::vector<SL2Elem> sym;
    for (int i = 0; i < 10; ++i) {
        SL2Elem g = en.elems[rng() % en.size()];
        sym.push_back(g);
        sym.push_back(sl2_inv(F, g));
    }
    auto grown = tripling(f13, sym);
    CHECK(grown.exponent > 0.0);
}

TEST_CASE("coset escape bounds and the S' violation") {
    for (uint32_t p : {7u, 11u, 13u}) {
        auto f = make_field(p);
        SetFp b1 = rnd_set(f, 3, 1), b2 = rnd_set(f, 4, 2);
        auto esc = coset_escape(family_s(b1, b2), 16);
        for (const auto& row : esc.rows) CHECK(row.verdict);
        CHECK(esc.max_borel <= std::max(b1.size(), b2.size()));

        PolyFrac r1{{0, 1}, {}};     // x
        PolyFrac r2{{0, 0, 1}, {}};  // x^2
        SetFp b = rnd_set(f, std::min<std::size_t>(5, p - 2), 3);
        auto esc2 = coset_escape(family_srational(r1, r2, b), 16);
        for (const auto& row : esc2.rows) CHECK(row.verdict);

        SetFp bs = rnd_set(f, 5, 4);
        auto esc3 = coset_escape(family_sprime(bs), 16);
        REQUIRE(esc3.rows.size() == 1);
        CHECK(esc3.rows[0].verdict);  // the expected violation is found
        CHECK(esc3.violation.has_value());
        CHECK(esc3.max_borel == bs.size());  // the whole family in one coset
    }
}

TEST_CASE("continued fraction counts") {
    auto f7 = make_field(7);
    SetFp fullstar = make_set(f7, {1, 2, 3, 4, 5, 6});
    auto res = cf_count(fullstar, 1);
    for (uint32_t x = 1; x < 7; ++x) CHECK(res.counts[x] == 1);
    CHECK(res.counts[0] == 0);
    CHECK(res.counts[7] == 0);

    SetFp with_zero = make_set(f7, {0, 1});
    auto rz = cf_count(with_zero, 1);
    CHECK(rz.counts[7] == 1);  // the a = 0 tuple hits infinity

    std::mt19937_64 rng(23);
    for (uint32_t p : {11u, 31u}) {
        auto f = make_field(p);
        SetFp a = rnd_set(f, 4, rng());
        for (unsigned k = 1; k <= 3; ++k) {
            auto fast = cf_count(a, k);
            auto brute = oracle::cf_count(a, k);
            CHECK(fast.counts == brute);
            Int total = 0;
            for (const auto& c : fast.counts) total += c;
            CHECK(total == int_pow(Int(a.size()), k));
            CHECK(fast.report.verdict);
        }
    }
}

TEST_CASE("action counting lemma") {
    auto f101 = make_field(101);
    SetFp a = rnd_set(f101, 12, 31);

    MatrixFamily idfam;
    idfam.kind = MatrixFamily::Kind::S;
    idfam.field = f101;
    idfam.elems = {sl2_identity()};
    IntFn ia = IntFn::indicator(a);
    auto fixed = action_count(idfam, ia, ia);
    CHECK(fixed.sigma == Rat(a.size()));

    auto zero = action_count(idfam, IntFn::zero(f101), ia);
    CHECK(zero.sigma == 0);

    SetFp b = rnd_set(f101, 10, 32);
    MatrixFamily s = family_s(b, b);
    SetFp c = rnd_set(f101, 9, 33);
    auto res = action_count(s, IntFn::indicator(c), ia);
    CHECK(res.sigma == oracle::action_count(s, IntFn::indicator(c), ia));
    CHECK(!res.flattening_k.has_value());  // p > 13: not measured

    // Small p carries the measured flattening depth.
    auto f7 = make_field(7);
    SetFp sb = rnd_set(f7, 3, 34);
    MatrixFamily s7 = family_s(sb, sb);
    SetFp c7 = rnd_set(f7, 3, 35);
    auto res7 = action_count(s7, IntFn::indicator(c7), IntFn::indicator(c7));
    CHECK(res7.sigma == oracle::action_count(s7, IntFn::indicator(c7), IntFn::indicator(c7)));
}

TEST_CASE("inverse difference counts") {
    auto f7 = make_field(7);
    SetFp one = make_set(f7, {1});
    auto r0 = inverse_diff_count(one, one, 1);
    CHECK(r0.count == 0);

    SetFp star = make_set(f7, {1, 2, 3, 4, 5, 6});
    auto rs = inverse_diff_count(star, star, 1);
    CHECK(rs.count == Int(5));  // p - 2
    CHECK(rs.count == oracle::inverse_diff_count(star, star, 1));

    auto f101 = make_field(101);
    std::mt19937_64 rng(41);
    SetFp a1 = rnd_set(f101, 14, rng()), a2 = rnd_set(f101, 11, rng());
    uint32_t lam = 1 + static_cast<uint32_t>(rng() % 100);
    auto rr = inverse_diff_count(a1, a2, lam);
    CHECK(rr.count == oracle::inverse_diff_count(a1, a2, lam));
    CHECK_THROWS_AS(inverse_diff_count(a1, a2, 0), std::invalid_argument);
}

TEST_CASE("polynomial shift counts") {
    auto f11 = make_field(11);
    SetFp a1 = make_set(f11, {3}), b1 = make_set(f11, {4});
    std::vector<uint32_t> px{0, 1};  // x
    auto single = poly_shift_count(a1, b1, px, px);
    CHECK(single.collisions == Rat(1));
    CHECK(single.image_size == 1);

    SetFp full = make_set(f11, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    auto fr = poly_shift_count(full, full, px, px);
    CHECK(fr.collisions == Rat(oracle::poly_shift_collisions(full, full, px, px)));

    auto f101 = make_field(101);
    std::mt19937_64 rng(43);
    SetFp a = rnd_set(f101, 8, rng()), b = rnd_set(f101, 7, rng());
    std::vector<uint32_t> p2{0, 0, 1};  // x^2
    auto rr = poly_shift_count(a, b, px, p2);
    CHECK(rr.collisions == Rat(oracle::poly_shift_collisions(a, b, px, p2)));

    std::vector<uint32_t> constant{5};
    CHECK_THROWS_AS(poly_shift_count(a, b, constant, px), std::invalid_argument);
}

TEST_CASE("GL2 images") {
    auto f7 = make_field(7);
    SetFp one = make_set(f7, {1}), zero = make_set(f7, {0});
    auto r1 = gl2_image(zero, one, one, one);
    CHECK(r1.image_size == 1);

    // A full set under one nondegenerate Moebius map covers p points of P^1.
    SetFp full = make_set(f7, {0, 1, 2, 3, 4, 5, 6});
    SetFp b1 = make_set(f7, {2}), b2 = make_set(f7, {3}), b3 = make_set(f7, {1});
    auto r2 = gl2_image(full, b1, b2, b3);
    CHECK(r2.image_size == 7);
    CHECK(r2.image_size == oracle::gl2_image_size(full, b1, b2, b3));

    auto f101 = make_field(101);
    std::mt19937_64 rng(47);
    SetFp a = rnd_set(f101, 9, rng());
    SetFp c1 = rnd_set(f101, 4, rng()), c2 = rnd_set(f101, 4, rng()), c3 = rnd_set(f101, 4, rng());
    auto r3 = gl2_image(a, c1, c2, c3);
    CHECK(r3.image_size == oracle::gl2_image_size(a, c1, c2, c3));
    for (const auto& row : r3.rows)
        if (row.kind == BoundReport::Kind::Assert) CHECK(row.verdict);
}

TEST_CASE("Frobenius-type spectral bound") {
    auto f5 = make_field(5);
    std::mt19937_64 rng(53);
    const SL2Enum& en = enumerate_sl2(f5);

    // Zero function: both sides vanish.
    auto z = frobenius_check(GroupFn::delta(f5, sl2_identity()), IntFn::zero(f5),
                             IntFn::zero(f5), FrobeniusMode::Inequality);
    CHECK(z.rows[0].verdict);
    CHECK(z.lhs == 0);

    for (int trial = 0; trial < 50; ++trial) {
        SetFp a = rnd_set(f5, 1 + rng() % 4, rng());
        IntFn f = IntFn::balanced(a);
        GroupFn Fw;
        Fw.field = f5;
        Fw.den = 1;
        for (int i = 0; i < 8; ++i)
            Fw.add_weight(en.elems[rng() % en.size()],
                          Int(static_cast<int64_t>(rng() % 7) - 3));
        IntFn phi = IntFn::zero(f5);
        for (uint32_t x = 0; x < 5; ++x)
            phi.values[x] = Int(static_cast<int64_t>(rng() % 9) - 4);
        auto res = frobenius_check(Fw, f, phi, FrobeniusMode::Inequality);
        CHECK(res.rows[0].verdict);
    }

    SetFp a = rnd_set(f5, 2, 99);
    IntFn f = IntFn::balanced(a);
    auto pw = frobenius_check(GroupFn::haar(f5), f, f, FrobeniusMode::PowerIteration);
    REQUIRE(pw.rows.size() == 3);
    for (const auto& row : pw.rows) CHECK(row.verdict);
    CHECK(pw.gram_trace == Rat(120) * f.l2sq());

    IntFn nonzero_mean = IntFn::indicator(a);
    CHECK_THROWS_AS(
        frobenius_check(GroupFn::haar(f5), nonzero_mean, f, FrobeniusMode::Inequality),
        std::invalid_argument);
}

TEST_CASE("group multiplication associativity, sampled") {
    auto f5 = make_field(5);
    const FieldCtx& F = *f5;
    const SL2Enum& en = enumerate_sl2(f5);
    std::mt19937_64 rng(101);
    for (int t = 0; t < 100000; ++t) {
        const SL2Elem& g = en.elems[rng() % en.size()];
        const SL2Elem& h = en.elems[rng() % en.size()];
        const SL2Elem& k = en.elems[rng() % en.size()];
        if (!(sl2_mul(F, sl2_mul(F, g, h), k) == sl2_mul(F, g, sl2_mul(F, h, k)))) {
            REQUIRE(false);
        }
    }
}
