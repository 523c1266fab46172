#include "doctest.h"
#include "sumprod/transform.hpp"

#include <random>

using namespace sumprod;

namespace {
IntFn random_fn(const Field& f, std::mt19937_64& rng, int64_t lo, int64_t hi) {
    IntFn v = IntFn::zero(f);
    for (uint32_t x = 0; x < f->p(); ++x)
        v.values[x] = Int(static_cast<int64_t>(rng() % static_cast<uint64_t>(hi - lo + 1)) + lo);
    return v;
}
}  // namespace

TEST_CASE("dft basics") {
    auto f = make_field(11);
    auto delta = dft(IntFn::delta(f, 0));
    for (auto c : delta.coeffs) CHECK(std::abs(c - cdouble(1, 0)) < 1e-12);

    auto flat = dft(IntFn::constant(f, 1));
    CHECK(std::abs(flat.coeffs[0] - cdouble(11, 0)) < 1e-9);
    for (uint32_t xi = 1; xi < 11; ++xi) CHECK(std::abs(flat.coeffs[xi]) < 1e-9);

    SetFp a = gen_set(parse_set_spec("random:p=11,n=5,seed=3"), f);
    auto bal = dft(IntFn::balanced(a));
    CHECK(std::abs(bal.coeffs[0]) < 1e-9);
}

TEST_CASE("naive and chirp transforms agree") {
    std::mt19937_64 rng(7);
    for (uint32_t p : {101u, 613u}) {
        auto f = make_field(p);
        IntFn v = random_fn(f, rng, -50, 50);
        auto a = dft_naive(v);
        auto b = dft(v, ConvPath::Ntt);
        double scale = 0;
        for (auto c : a.coeffs) scale = std::max(scale, std::abs(c));
        for (uint32_t xi = 0; xi < p; ++xi)
            CHECK(std::abs(a.coeffs[xi] - b.coeffs[xi]) / std::max(1.0, scale) < 1e-8);
    }
}

TEST_CASE("add_conv matches hand enumeration") {
    auto f = make_field(5);
    SetFp a1 = make_set(f, {1}), b1 = make_set(f, {2});
    IntFn c = add_conv(IntFn::indicator(a1), IntFn::indicator(b1));
    CHECK(c.values == std::vector<Int>{0, 0, 0, 1, 0});

    SetFp a = make_set(f, {0, 1});
    IntFn c2 = add_conv(IntFn::indicator(a), IntFn::indicator(a));
    CHECK(c2.values == std::vector<Int>{1, 2, 1, 0, 0});

    std::mt19937_64 rng(5);
    auto f101 = make_field(101);
    IntFn g = random_fn(f101, rng, -9, 9);
    IntFn conv = add_conv(IntFn::delta(f101, 0), g);
    CHECK(conv.values == g.values);
}

TEST_CASE("add_corr identities") {
    auto f = make_field(101);
    SetFp a = gen_set(parse_set_spec("random:p=101,n=17,seed=11"), f);
    IntFn corr = add_corr(IntFn::indicator(a), IntFn::indicator(a));
    CHECK(corr.values[0] == Int(a.size()));

    SetFp b = gen_set(parse_set_spec("random:p=101,n=9,seed=12"), f);
    IntFn ab = add_corr(IntFn::indicator(a), IntFn::indicator(b));
    IntFn ba = add_corr(IntFn::indicator(b), IntFn::indicator(a));
    for (uint32_t x = 0; x < 101; ++x) CHECK(ab.values[x] == ba.values[(101 - x) % 101]);

    auto f5 = make_field(5);
    IntFn d = add_corr(IntFn::indicator(make_set(f5, {0, 2})),
                       IntFn::indicator(make_set(f5, {0, 2})));
    CHECK(d.values == std::vector<Int>{2, 0, 1, 1, 0});
}

TEST_CASE("mul_conv: subgroup closure, hand cases, zero policies") {
    auto f13 = make_field(13);
    SetFp gamma = subgroup(f13, 3);
    IntFn r = mul_conv(IntFn::indicator(gamma), IntFn::indicator(gamma));
    for (uint32_t x = 0; x < 13; ++x)
        CHECK(r.values[x] == (gamma.contains(x) ? Int(3) : Int(0)));

    auto f7 = make_field(7);
    IntFn s = mul_conv(IntFn::indicator(make_set(f7, {2})), IntFn::indicator(make_set(f7, {3})));
    CHECK(s.values == std::vector<Int>{0, 0, 0, 0, 0, 0, 1});

    auto f5 = make_field(5);
    SetFp z = make_set(f5, {0, 1});
    IntFn tr = mul_conv(IntFn::indicator(z), IntFn::indicator(z), ZeroPolicy::Track);
    CHECK(tr.values[0] == 3);
    CHECK(tr.values[1] == 1);
    IntFn ex = mul_conv(IntFn::indicator(z), IntFn::indicator(z), ZeroPolicy::Exclude);
    CHECK(ex.values[0] == 0);
    CHECK(ex.values[1] == 1);
}

TEST_CASE("convolution mass conservation") {
    std::mt19937_64 rng(21);
    auto f = make_field(101);
    SetFp a = gen_set(parse_set_spec("random:p=101,n=23,seed=1"), f);
    SetFp b = gen_set(parse_set_spec("random:p=101,n=11,seed=2"), f);
    IntFn sum = add_conv(IntFn::indicator(a), IntFn::indicator(b));
    CHECK(sum.value_sum() == Int(a.size()) * Int(b.size()));
    IntFn prod = mul_conv(IntFn::indicator(a), IntFn::indicator(b));
    CHECK(prod.value_sum() == Int(a.size()) * Int(b.size()));

    IntFn g1 = random_fn(f, rng, -20, 20), g2 = random_fn(f, rng, -20, 20);
    CHECK(add_conv(g1, g2).value_sum() == g1.value_sum() * g2.value_sum());
}

TEST_CASE("naive and NTT integer convolutions agree exactly") {
    std::mt19937_64 rng(31);
    for (uint32_t p : {101u, 613u, 1009u}) {
        auto f = make_field(p);
        IntFn g1 = random_fn(f, rng, -1000000, 1000000);
        IntFn g2 = random_fn(f, rng, -1000000, 1000000);
        IntFn naive = add_conv(g1, g2, ConvPath::Naive);
        IntFn ntt = add_conv(g1, g2, ConvPath::Ntt);
        CHECK(naive.values == ntt.values);
        IntFn mn = mul_conv(g1, g2, ZeroPolicy::Track, ConvPath::Naive);
        IntFn mt = mul_conv(g1, g2, ZeroPolicy::Track, ConvPath::Ntt);
        CHECK(mn.values == mt.values);
    }
}

TEST_CASE("NTT falls back when coefficients exceed the modulus budget") {
    auto f = make_field(17);
    IntFn g = IntFn::zero(f);
    Int huge = int_pow(Int(10), 50);
    for (uint32_t x = 0; x < 17; ++x) g.values[x] = huge + x;
    IntFn naive = add_conv(g, g, ConvPath::Naive);
    IntFn ntt = add_conv(g, g, ConvPath::Ntt);
    CHECK(naive.values == ntt.values);
}

TEST_CASE("identity suite holds on random input") {
    std::mt19937_64 rng(41);
    auto f = make_field(101);
    SetFp a = gen_set(parse_set_spec("random:p=101,n=20,seed=4"), f);
    IntFn g1 = IntFn::indicator(a);
    IntFn g2 = random_fn(f, rng, -5, 5);
    auto rows = identity_suite(g1, g2);
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) CHECK(r.verdict);

    auto f2 = make_field(257);
    IntFn d = IntFn::delta(f2, 0);
    auto rows2 = identity_suite(d, d);
    for (const auto& r : rows2) CHECK(r.verdict);

    // (svertka) with f = g = delta_0: both sides equal 1.
    IntFn conv = add_conv(d, d);
    CHECK(conv.l2sq() == Rat(1));
}

TEST_CASE("balanced functions have zero mean and denom p") {
    auto f = make_field(11);
    SetFp a = make_set(f, {1, 4, 9});
    IntFn bal = IntFn::balanced(a);
    CHECK(bal.denom == 11);
    CHECK(bal.value_sum() == 0);
    CHECK(bal.at(1) == Rat(Int(11) - 3, 11));
    CHECK(bal.at(2) == Rat(-3, 11));
}

TEST_CASE("report rows: formatting and exit semantics") {
    BoundReport ok = BoundReport::assert_row("s", "claim with, comma", true);
    ok.with_lhs(Rat(3, 7)).with_ratio(0.5);
    std::string csv = report_csv_row(ok);
    CHECK(csv.find("\"claim with, comma\"") != std::string::npos);
    CHECK(csv.find("3/7") != std::string::npos);
    CHECK(csv.find("ASSERT") != std::string::npos);

    BoundReport bad = BoundReport::assert_row("s", "x", false);
    BoundReport ratio;
    ratio.kind = BoundReport::Kind::Ratio;
    ratio.verdict = false;  // RATIO rows never affect the outcome
    CHECK(all_asserts_hold({ok}));
    CHECK(!all_asserts_hold({ok, bad}));
    CHECK(all_asserts_hold({ok, ratio}));

    std::string js = report_json_row(ok);
    CHECK(js.find("\"verdict\":true") != std::string::npos);
    CHECK(js.find("\"kind\":\"ASSERT\"") != std::string::npos);
}
