#include "sumprod/oracle.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace sumprod {
namespace oracle {

namespace {

void guard(double tuples, const char* who) {
    if (tuples > static_cast<double>(kTupleGuard))
        throw std::invalid_argument(std::string(who) + ": tuple count exceeds the guard");
}

// Odometer over k slots each running through the elements of A.
struct TupleWalker {
    const std::vector<uint32_t>& elems;
    std::vector<std::size_t> idx;
    bool done = false;

    TupleWalker(const std::vector<uint32_t>& e, unsigned k) : elems(e), idx(k, 0) {
        if (e.empty()) done = true;
    }
    uint32_t slot(unsigned i) const { return elems[idx[i]]; }
    void next() {
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (++idx[i] < elems.size()) return;
            idx[i] = 0;
        }
        done = true;
    }
};

}  // namespace

Int energy_add(const SetFp& a, const SetFp& b) {
    guard(std::pow(static_cast<double>(a.size()), 2) * std::pow(static_cast<double>(b.size()), 2),
          "oracle::energy_add");
    const FieldCtx& F = *a.field;
    Int count = 0;
    for (uint32_t a1 : a.elems)
        for (uint32_t a2 : a.elems)
            for (uint32_t b1 : b.elems)
                for (uint32_t b2 : b.elems)
                    if (F.add(a1, b1) == F.add(a2, b2)) ++count;
    return count;
}

Int energy_mul(const SetFp& a, const SetFp& b) {
    guard(std::pow(static_cast<double>(a.size()), 2) * std::pow(static_cast<double>(b.size()), 2),
          "oracle::energy_mul");
    const FieldCtx& F = *a.field;
    Int count = 0;
    for (uint32_t a1 : a.elems)
        for (uint32_t a2 : a.elems)
            for (uint32_t b1 : b.elems)
                for (uint32_t b2 : b.elems)
                    if (F.mul(a1, b1) == F.mul(a2, b2)) ++count;
    return count;
}

Int energy_k(const SetFp& a, unsigned k) {
    const FieldCtx& F = *a.field;
    uint32_t p = F.p();
    Int total = 0;
    for (uint32_t x = 0; x < p; ++x) {
        uint64_t r = 0;
        for (uint32_t a1 : a.elems)
            for (uint32_t a2 : a.elems)
                if (F.sub(a1, a2) == x) ++r;
        total += int_pow(Int(r), k);
    }
    return total;
}

Int tk(const SetFp& a, unsigned k) {
    guard(std::pow(static_cast<double>(a.size()), 2.0 * k), "oracle::tk");
    const FieldCtx& F = *a.field;
    Int count = 0;
    TupleWalker w(a.elems, 2 * k);
    while (!w.done) {
        uint32_t left = 0, right = 0;
        for (unsigned i = 0; i < k; ++i) left = F.add(left, w.slot(i));
        for (unsigned i = k; i < 2 * k; ++i) right = F.add(right, w.slot(i));
        if (left == right) ++count;
        w.next();
    }
    return count;
}

Int energy4(const SetFp& a, const SetFp& b) {
    const FieldCtx& F = *a.field;
    uint32_t p = F.p();
    guard(static_cast<double>(p) * a.size() * b.size(), "oracle::energy4");
    // E^+(A,A,B,B) = sum_{x,y,z} A(x) A(y) B(x+z) B(y+z)
    Int count = 0;
    for (uint32_t x : a.elems)
        for (uint32_t y : a.elems)
            for (uint32_t z = 0; z < p; ++z)
                if (b.contains(F.add(x, z)) && b.contains(F.add(y, z))) ++count;
    return count;
}

Int dtimes_k(const SetFp& a, unsigned k) {
    guard(std::pow(static_cast<double>(a.size()), 4.0 * k), "oracle::dtimes_k");
    const FieldCtx& F = *a.field;
    Int count = 0;
    TupleWalker w(a.elems, 4 * k);
    while (!w.done) {
        uint32_t left = 1, right = 1;
        for (unsigned i = 0; i < k; ++i)
            left = F.mul(left, F.sub(w.slot(2 * i), w.slot(2 * i + 1)));
        for (unsigned i = k; i < 2 * k; ++i)
            right = F.mul(right, F.sub(w.slot(2 * i), w.slot(2 * i + 1)));
        if (left == right) ++count;
        w.next();
    }
    return count;
}

Int dprime_k(const SetFp& a, unsigned k) {
    guard(std::pow(static_cast<double>(a.size()), 4.0 * k), "oracle::dprime_k");
    const FieldCtx& F = *a.field;
    Int count = 0;
    TupleWalker w(a.elems, 4 * k);
    while (!w.done) {
        uint32_t left = 0, right = 0;
        for (unsigned i = 0; i < k; ++i)
            left = F.add(left, F.mul(w.slot(2 * i), w.slot(2 * i + 1)));
        for (unsigned i = k; i < 2 * k; ++i)
            right = F.add(right, F.mul(w.slot(2 * i), w.slot(2 * i + 1)));
        if (left == right) ++count;
        w.next();
    }
    return count;
}

Int n_quantity(const SetFp& a, const SetFp& b, const SetFp& c) {
    guard(std::pow(static_cast<double>(a.size()) * b.size() * c.size(), 2),
          "oracle::n_quantity");
    const FieldCtx& F = *a.field;
    Int count = 0;
    for (uint32_t a1 : a.elems)
        for (uint32_t b1 : b.elems)
            for (uint32_t c1 : c.elems) {
                uint32_t left = F.mul(a1, F.sub(b1, c1));
                for (uint32_t a2 : a.elems)
                    for (uint32_t b2 : b.elems)
                        for (uint32_t c2 : c.elems)
                            if (left == F.mul(a2, F.sub(b2, c2))) ++count;
            }
    return count;
}

Int nprime(const SetFp& a) {
    guard(std::pow(static_cast<double>(a.size()), 6), "oracle::nprime");
    const FieldCtx& F = *a.field;
    Int count = 0;
    TupleWalker w(a.elems, 6);
    while (!w.done) {
        uint32_t left = F.add(F.mul(w.slot(0), w.slot(1)), w.slot(2));
        uint32_t right = F.add(F.mul(w.slot(3), w.slot(4)), w.slot(5));
        if (left == right) ++count;
        w.next();
    }
    return count;
}

Int sigma_p(const SetFp& a, const SetFp& pset) {
    const FieldCtx& F = *a.field;
    Int count = 0;
    for (uint32_t x : pset.elems)
        for (uint32_t a1 : a.elems)
            for (uint32_t a2 : a.elems)
                if (F.sub(a1, a2) == x) ++count;
    return count;
}

namespace {

struct Pt {
    uint32_t x, y;
};

// All points of S x S for a set S.
std::vector<Pt> grid(const SetFp& s) {
    std::vector<Pt> g;
    g.reserve(s.size() * s.size());
    for (uint32_t x : s.elems)
        for (uint32_t y : s.elems) g.push_back(Pt{x, y});
    return g;
}

bool collinear3(const FieldCtx& F, Pt p1, Pt p2, Pt p3) {
    // det(p2-p1, p3-p1) = 0
    uint32_t ax = F.sub(p2.x, p1.x), ay = F.sub(p2.y, p1.y);
    uint32_t bx = F.sub(p3.x, p1.x), by = F.sub(p3.y, p1.y);
    return F.sub(F.mul(ax, by), F.mul(ay, bx)) == 0;
}

bool collinear4(const FieldCtx& F, Pt p1, Pt p2, Pt p3, Pt p4) {
    // all difference vectors pairwise parallel: a common line exists iff
    // the three vectors from p1 are pairwise parallel AND parallel to a
    // single nonzero direction; handle the all-equal case directly.
    Pt d2{F.sub(p2.x, p1.x), F.sub(p2.y, p1.y)};
    Pt d3{F.sub(p3.x, p1.x), F.sub(p3.y, p1.y)};
    Pt d4{F.sub(p4.x, p1.x), F.sub(p4.y, p1.y)};
    auto para = [&](Pt u, Pt v) { return F.sub(F.mul(u.x, v.y), F.mul(u.y, v.x)) == 0; };
    // Find a nonzero reference among the three; zero vectors lie on any line.
    Pt ref{0, 0};
    bool have = false;
    for (Pt d : {d2, d3, d4}) {
        if (d.x != 0 || d.y != 0) {
            ref = d;
            have = true;
            break;
        }
    }
    if (!have) return true;  // all four points coincide
    return para(ref, d2) && para(ref, d3) && para(ref, d4);
}

}  // namespace

Int collinear_triples(const SetFp& a) {
    auto g = grid(a);
    guard(std::pow(static_cast<double>(g.size()), 3), "oracle::collinear_triples");
    const FieldCtx& F = *a.field;
    Int count = 0;
    for (const Pt& p1 : g)
        for (const Pt& p2 : g)
            for (const Pt& p3 : g)
                if (collinear3(F, p1, p2, p3)) ++count;
    return count;
}

Int collinear_quadruples(const SetFp& a, const SetFp& b, const SetFp& c, const SetFp& d) {
    auto ga = grid(a), gb = grid(b), gc = grid(c), gd = grid(d);
    guard(static_cast<double>(ga.size()) * gb.size() * gc.size() * gd.size(),
          "oracle::collinear_quadruples");
    const FieldCtx& F = *a.field;
    Int count = 0;
    for (const Pt& p1 : ga)
        for (const Pt& p2 : gb)
            for (const Pt& p3 : gc)
                for (const Pt& p4 : gd)
                    if (collinear4(F, p1, p2, p3, p4)) ++count;
    return count;
}

std::vector<int64_t> q_table(const SetFp& a, const SetFp& b, const SetFp& c, const SetFp& d) {
    const FieldCtx& F = *a.field;
    uint32_t p = F.p();
    std::vector<int64_t> table(static_cast<std::size_t>(p) * p, 0);
    for (uint32_t av : a.elems)
        for (uint32_t bv : b.elems)
            for (uint32_t cv : c.elems)
                for (uint32_t dv : d.elems) {
                    if (cv == av) continue;
                    uint32_t inv = F.inv(F.sub(cv, av));
                    uint32_t x = F.mul(F.sub(bv, av), inv);
                    uint32_t y = F.mul(F.sub(dv, av), inv);
                    ++table[static_cast<std::size_t>(x) * p + y];
                }
    return table;
}

Int point_plane_incidences(const PointSet3& pts, const PlaneSet& planes) {
    const FieldCtx& F = *pts.field;
    Int count = 0;
    for (const auto& pt : pts.points)
        for (const auto& pl : planes.planes) {
            uint64_t dot = static_cast<uint64_t>(pl.u) * pt.x +
                           static_cast<uint64_t>(pl.v) * pt.y +
                           static_cast<uint64_t>(pl.w) * pt.z;
            if (dot % F.p() == pl.c) ++count;
        }
    return count;
}

Int point_line_incidences(const SetFp& a, const SetFp& b, const LineSet& lines) {
    const FieldCtx& F = *a.field;
    Int count = 0;
    for (uint32_t x : a.elems)
        for (uint32_t y : b.elems)
            for (const auto& l : lines.lines) {
                bool on = l.vertical ? (x == l.b) : (y == F.add(F.mul(l.m, x), l.b));
                if (on) ++count;
            }
    return count;
}

cdouble trilinear_sum(const SetFp& x, const SetFp& y, const SetFp& z,
                      const std::vector<cdouble>& alpha, const std::vector<cdouble>& beta,
                      const std::vector<cdouble>& gamma) {
    const FieldCtx& F = *x.field;
    uint32_t p = F.p();
    const long double pi2 = 6.28318530717958647692528676655900577L;
    auto wa = alpha.empty() ? std::vector<cdouble>(x.size(), {1, 0}) : alpha;
    auto wb = beta.empty() ? std::vector<cdouble>(y.size(), {1, 0}) : beta;
    auto wc = gamma.empty() ? std::vector<cdouble>(z.size(), {1, 0}) : gamma;
    cdouble acc{0, 0};
    for (std::size_t i = 0; i < x.elems.size(); ++i)
        for (std::size_t j = 0; j < y.elems.size(); ++j)
            for (std::size_t l = 0; l < z.elems.size(); ++l) {
                uint64_t e = static_cast<uint64_t>(F.mul(x.elems[i], y.elems[j])) * z.elems[l] % p;
                long double th = pi2 * static_cast<long double>(e) / p;
                acc += wa[i] * wb[j] * wc[l] *
                       cdouble(static_cast<double>(cosl(th)), static_cast<double>(sinl(th)));
            }
    return acc;
}

cdouble multilinear_sum(const std::vector<SetFp>& sets) {
    const FieldCtx& F = *sets[0].field;
    uint32_t p = F.p();
    const long double pi2 = 6.28318530717958647692528676655900577L;
    double total = 1;
    for (const auto& s : sets) total *= static_cast<double>(s.size());
    guard(total, "oracle::multilinear_sum");
    cdouble acc{0, 0};
    std::vector<std::size_t> idx(sets.size(), 0);
    bool done = sets.empty();
    for (const auto& s : sets)
        if (s.size() == 0) done = true;
    while (!done) {
        uint32_t prod = 1;
        for (std::size_t i = 0; i < sets.size(); ++i) prod = F.mul(prod, sets[i].elems[idx[i]]);
        long double th = pi2 * static_cast<long double>(prod) / p;
        acc += cdouble(static_cast<double>(cosl(th)), static_cast<double>(sinl(th)));
        std::size_t i = 0;
        for (; i < idx.size(); ++i) {
            if (++idx[i] < sets[i].elems.size()) break;
            idx[i] = 0;
        }
        if (i == idx.size()) done = true;
    }
    return acc;
}

std::vector<Int> cf_count(const SetFp& a, unsigned k) {
    const FieldCtx& F = *a.field;
    uint32_t p = F.p();
    guard(std::pow(static_cast<double>(a.size()), static_cast<double>(k)), "oracle::cf_count");
    std::vector<Int> counts(p + 1, Int(0));
    std::vector<std::size_t> idx(k, 0);
    bool done = a.size() == 0;
    while (!done) {
        // [a_1, ..., a_k] evaluated from the innermost term.
        uint32_t z = 0;
        bool inf = false;
        for (std::size_t i = k; i-- > 0;) {
            uint32_t ai = a.elems[idx[i]];
            if (inf) {
                z = 0;  // 1/(a + inf) = 0
                inf = false;
                continue;
            }
            uint32_t den = F.add(ai, z);
            if (den == 0)
                inf = true;
            else
                z = F.inv(den);
        }
        ++counts[inf ? p : z];
        std::size_t i = 0;
        for (; i < k; ++i) {
            if (++idx[i] < a.elems.size()) break;
            idx[i] = 0;
        }
        if (i == k) done = true;
    }
    return counts;
}

Int inverse_diff_count(const SetFp& a1, const SetFp& a2, uint32_t lambda) {
    const FieldCtx& F = *a1.field;
    Int count = 0;
    for (uint32_t x : a1.elems) {
        if (x == 0) continue;
        for (uint32_t y : a2.elems) {
            if (y == 0) continue;
            if (F.sub(F.inv(x), F.inv(y)) == lambda % F.p()) ++count;
        }
    }
    return count;
}

Int poly_shift_collisions(const SetFp& a, const SetFp& b, const std::vector<uint32_t>& p1,
                          const std::vector<uint32_t>& p2) {
    const FieldCtx& F = *a.field;
    guard(std::pow(static_cast<double>(a.size()) * b.size(), 2), "oracle::poly_shift");
    auto value = [&](uint32_t av, uint32_t bv, bool& bad) {
        uint32_t den = F.add(av, poly_eval(p2, bv, F));
        if (den == 0) {
            bad = true;
            return 0u;
        }
        bad = false;
        return F.add(poly_eval(p1, bv, F), F.inv(den));
    };
    Int count = 0;
    for (uint32_t av : a.elems)
        for (uint32_t bv : b.elems) {
            bool bad1 = false;
            uint32_t v1 = value(av, bv, bad1);
            if (bad1) continue;
            for (uint32_t av2 : a.elems)
                for (uint32_t bv2 : b.elems) {
                    bool bad2 = false;
                    uint32_t v2 = value(av2, bv2, bad2);
                    if (!bad2 && v1 == v2) ++count;
                }
        }
    return count;
}

std::size_t gl2_image_size(const SetFp& a, const SetFp& b1, const SetFp& b2, const SetFp& b3) {
    const FieldCtx& F = *a.field;
    std::set<int64_t> image;
    for (uint32_t x1 : b1.elems)
        for (uint32_t x2 : b2.elems)
            for (uint32_t x3 : b3.elems)
                for (uint32_t av : a.elems) {
                    uint32_t num = F.add(av, x1);
                    uint32_t den = F.add(F.mul(av, x2), x3);
                    if (den == 0) {
                        if (num != 0) image.insert(-1);  // infinity bucket
                        continue;
                    }
                    image.insert(F.mul(num, F.inv(den)));
                }
    return image.size();
}

Rat action_count(const MatrixFamily& s, const IntFn& f1, const IntFn& f2) {
    const FieldCtx& F = *s.field;
    uint32_t p = F.p();
    Rat acc = 0;
    for (const auto& m : s.elems) {
        for (uint32_t x = 0; x < p; ++x) {
            // s a_1 = a_2 with Moebius action, infinity dropped.
            uint32_t den = F.add(F.mul(m.c, x), m.d);
            if (den == 0) continue;
            uint32_t y = F.mul(F.add(F.mul(m.a, x), m.b), F.inv(den));
            acc += f1.at(x) * f2.at(y);
        }
    }
    return acc;
}

GroupFn group_conv(const GroupFn& mu, const GroupFn& nu) {
    const FieldCtx& F = *mu.field;
    GroupFn out;
    out.field = mu.field;
    out.den = mu.den * nu.den;
    // (mu*nu)(g) = sum_h mu(h) nu(h^-1 g), literal double loop over g and h.
    const SL2Enum& en = enumerate_sl2(mu.field);
    for (const auto& g : en.elems) {
        Int acc = 0;
        for (const auto& [hk, hv] : mu.num) {
            SL2Elem hinvg = sl2_mul(F, sl2_inv(F, hv.first), g);
            auto it = nu.num.find(sl2_key(F, hinvg));
            if (it != nu.num.end()) acc += hv.second * it->second.second;
        }
        if (acc != 0) out.add_weight(g, acc);
    }
    return out;
}

}  // namespace oracle
}  // namespace sumprod
