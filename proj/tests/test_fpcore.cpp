#include "doctest.h"
#include "sumprod/fpcore.hpp"

#include <complex>
#include <cstdio>
#include <fstream>

using namespace sumprod;

namespace {
std::vector<uint32_t> primes_upto(uint32_t n) {
    std::vector<uint32_t> ps;
    std::vector<uint8_t> sieve(n + 1, 1);
    for (uint32_t i = 2; i <= n; ++i) {
        if (!sieve[i]) continue;
        ps.push_back(i);
        for (uint64_t j = static_cast<uint64_t>(i) * i; j <= n; j += i) sieve[j] = 0;
    }
    return ps;
}
}  // namespace

TEST_CASE("make_field finds the least primitive root") {
    CHECK(make_field(5)->g() == 2);
    CHECK(make_field(7)->g() == 3);
    CHECK(make_field(41)->g() == 6);  // least root is composite here
    CHECK_THROWS_AS(make_field(4), std::invalid_argument);
    CHECK_THROWS_AS(make_field(2), std::invalid_argument);
    CHECK_THROWS_AS(make_field(91), std::invalid_argument);  // 7*13
    CHECK_THROWS_AS(make_field((1u << 20) + 7), std::invalid_argument);
}

TEST_CASE("dlog and exp tables invert each other") {
    auto f = make_field(101);
    CHECK(f->dlog(1) == 0);
    CHECK(f->dlog(f->g()) == 1);
    for (uint32_t x = 1; x < 101; ++x) {
        CHECK(f->pow(f->g(), f->dlog(x)) == x);
        CHECK(f->mul(x, f->inv(x)) == 1);
    }
}

TEST_CASE("primitive root order verified for every odd prime up to 2^13") {
    for (uint32_t p : primes_upto(1u << 13)) {
        if (p == 2) continue;
        auto f = make_field(p);
        for (uint32_t q : f->prime_factors_of_order())
            CHECK(f->pow(f->g(), (p - 1) / q) != 1);
    }
}

TEST_CASE("subgroup construction") {
    auto f7 = make_field(7);
    CHECK(subgroup(f7, 1).elems == std::vector<uint32_t>{1});
    CHECK(subgroup(f7, 3).elems == std::vector<uint32_t>{1, 2, 4});
    auto f5 = make_field(5);
    CHECK(subgroup(f5, 4).elems == std::vector<uint32_t>{1, 2, 3, 4});
    CHECK_THROWS_AS(subgroup(f7, 4), std::invalid_argument);
}

TEST_CASE("subgroups are closed under product and inverse") {
    struct Case {
        uint32_t p, t;
    };
    for (Case c : {Case{4099, 683}, Case{257, 16}, Case{13, 6}}) {
        auto f = make_field(c.p);
        SetFp g = subgroup(f, c.t);
        REQUIRE(g.size() == c.t);
        auto bm = g.bitmap();
        bool closed = true;
        for (uint32_t x : g.elems) {
            if (!bm[f->inv(x)]) closed = false;
            for (uint32_t y : g.elems)
                if (!bm[f->mul(x, y)]) closed = false;
        }
        CHECK(closed);
    }
}

TEST_CASE("gen_set: interval, explicit, random determinism") {
    auto spec = parse_set_spec("interval:p=11,lo=0,hi=3");
    CHECK(gen_set(spec).elems == std::vector<uint32_t>{0, 1, 2, 3});

    auto ex = parse_set_spec("explicit:p=11,{3,3,7}");
    CHECK(gen_set(ex).elems == std::vector<uint32_t>{3, 7});

    auto r1 = gen_set(parse_set_spec("random:p=11,n=4,seed=1"));
    auto r2 = gen_set(parse_set_spec("random:p=11,n=4,seed=1"));
    CHECK(r1.elems == r2.elems);
    CHECK(r1.size() == 4);
    auto r3 = gen_set(parse_set_spec("random:p=11,n=4,seed=2"));
    CHECK(r3.size() == 4);

    CHECK_THROWS_AS(gen_set(parse_set_spec("random:p=11,n=12,seed=1")),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_set_spec("banana:p=11"), std::invalid_argument);

    auto sh = gen_set(parse_set_spec("shifted-subgroup:p=13,t=3,shift=1"));
    CHECK(sh.elems == std::vector<uint32_t>{2, 4, 10});  // {1,3,9} + 1
}

TEST_CASE("set files round-trip and reject junk") {
    auto f = make_field(101);
    SetFp s = gen_set(parse_set_spec("random:p=101,n=20,seed=9"), f);
    std::string path = "test_set_io.txt";
    write_set_file(path, s);
    auto vals = read_set_file(path);
    CHECK(make_set(f, vals).elems == s.elems);
    std::remove(path.c_str());

    std::ofstream bad("test_set_bad.txt");
    bad << "12\nnot-a-number\n";
    bad.close();
    CHECK_THROWS_AS(read_set_file("test_set_bad.txt"), std::invalid_argument);
    std::remove("test_set_bad.txt");
}

TEST_CASE("legendre symbol matches the square table") {
    auto f = make_field(7);
    CHECK(f->legendre(0) == 0);
    CHECK(f->legendre(2) == 1);  // 2 = 3^2
    CHECK(f->legendre(3) == -1);
    for (uint32_t p : {11u, 29u, 101u}) {
        auto fp = make_field(p);
        std::vector<uint8_t> sq(p, 0);
        for (uint32_t y = 1; y < p; ++y) sq[fp->mul(y, y)] = 1;
        for (uint32_t x = 1; x < p; ++x) CHECK(fp->legendre(x) == (sq[x] ? 1 : -1));
    }
}

TEST_CASE("multiplicative characters") {
    auto f = make_field(7);
    auto chi2 = mul_char(f, 2);
    for (uint32_t x = 0; x < 7; ++x) {
        if (x == 0) CHECK(chi2.is_zero(x));
        else CHECK(chi2.sign_value(x) == f->legendre(x));
    }

    auto chi3 = mul_char(f, 3);
    CHECK(chi3.idx[1] == 0);
    uint32_t g3 = f->pow(f->g(), 3);
    CHECK(chi3.idx[g3] == 0);  // kernel is the index-3 subgroup

    // Multiplicativity and exact order.
    for (uint32_t x = 1; x < 7; ++x)
        for (uint32_t y = 1; y < 7; ++y)
            CHECK(chi3.idx[f->mul(x, y)] == (chi3.idx[x] + chi3.idx[y]) % 3);
    CHECK(chi3.idx[f->g()] == 1);

    // Orthogonality of any nontrivial character.
    for (uint32_t d : {2u, 3u, 6u}) {
        auto chi = mul_char(f, d);
        std::complex<double> s{0, 0};
        for (uint32_t x = 1; x < 7; ++x) s += chi.value(x);
        CHECK(std::abs(s) < 1e-12);
    }
    CHECK_THROWS_AS(mul_char(f, 4), std::invalid_argument);
    CHECK_THROWS_AS(mul_char(f, 1), std::invalid_argument);
}

TEST_CASE("set algebra helpers") {
    auto f = make_field(11);
    SetFp a = make_set(f, {1, 2, 5});
    SetFp b = make_set(f, {3, 7});
    CHECK(sumset(a, b).elems == std::vector<uint32_t>{1, 4, 5, 8, 9});
    CHECK(product_set(a, b).elems == std::vector<uint32_t>{2, 3, 4, 6, 7});
    CHECK(intersect(a, make_set(f, {2, 5, 9})).elems == std::vector<uint32_t>{2, 5});
    std::size_t dropped = 0;
    SetFp inv = inverse_set(make_set(f, {0, 2, 5}), &dropped);
    CHECK(dropped == 1);
    CHECK(inv.elems == std::vector<uint32_t>{6, 9});  // 1/2 = 6, 1/5 = 9 mod 11
}
