#include "sumprod/expsum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sumprod {

namespace {

std::vector<cdouble> unit_or(const std::vector<cdouble>& w, std::size_t n, const char* who) {
    if (w.empty()) return std::vector<cdouble>(n, cdouble(1.0, 0.0));
    if (w.size() != n)
        throw std::invalid_argument(std::string(who) + ": weight/set size mismatch");
    for (const auto& z : w)
        if (std::abs(z) > 1.0 + 1e-9)
            throw std::invalid_argument(std::string(who) + ": weights must be bounded by one");
    return w;
}

// G[t] = sum_z gamma_z e(t z), all t, compensated and in fixed order.
std::vector<cdouble> char_sum_table(const SetFp& z, const std::vector<cdouble>& gamma) {
    const Field& f = z.field;
    uint32_t p = f->p();
    const auto& roots = unit_root_table(f);
    std::vector<cdouble> table(p);
    parallel_chunks(p, [&](std::size_t lo, std::size_t hi, std::size_t) {
        for (std::size_t t = lo; t < hi; ++t) {
            KahanCSum acc;
            for (std::size_t i = 0; i < z.elems.size(); ++i) {
                uint32_t k = static_cast<uint32_t>(static_cast<uint64_t>(t) * z.elems[i] % p);
                acc.add(gamma[i] * roots[k]);
            }
            table[t] = acc.value();
        }
    });
    return table;
}

}  // namespace

CSum trilinear_sum(const SetFp& x, const SetFp& y, const SetFp& z,
                   const std::vector<cdouble>& alpha, const std::vector<cdouble>& beta,
                   const std::vector<cdouble>& gamma) {
    const Field& f = x.field;
    uint32_t p = f->p();
    auto wa = unit_or(alpha, x.size(), "trilinear_sum");
    auto wb = unit_or(beta, y.size(), "trilinear_sum");
    auto wc = unit_or(gamma, z.size(), "trilinear_sum");

    // Collapse over xy = t, then one weighted character sum per t.
    std::vector<cdouble> w(p, cdouble(0, 0));
    for (std::size_t i = 0; i < x.elems.size(); ++i)
        for (std::size_t j = 0; j < y.elems.size(); ++j)
            w[f->mul(x.elems[i], y.elems[j])] += wa[i] * wb[j];

    auto table = char_sum_table(z, wc);
    KahanCSum acc;
    for (uint32_t t = 0; t < p; ++t)
        if (w[t] != cdouble(0, 0)) acc.add(w[t] * table[t]);

    CSum s;
    s.value = acc.value();
    s.term_count = Int(x.size()) * Int(y.size()) * Int(z.size());
    return s;
}

CSum trilinear_sum_direct(const SetFp& x, const SetFp& y, const SetFp& z,
                          const std::vector<cdouble>& alpha, const std::vector<cdouble>& beta,
                          const std::vector<cdouble>& gamma) {
    const Field& f = x.field;
    uint32_t p = f->p();
    auto wa = unit_or(alpha, x.size(), "trilinear_sum_direct");
    auto wb = unit_or(beta, y.size(), "trilinear_sum_direct");
    auto wc = unit_or(gamma, z.size(), "trilinear_sum_direct");
    const auto& roots = unit_root_table(f);

    KahanCSum acc;
    for (std::size_t i = 0; i < x.elems.size(); ++i)
        for (std::size_t j = 0; j < y.elems.size(); ++j) {
            uint32_t xy = f->mul(x.elems[i], y.elems[j]);
            for (std::size_t l = 0; l < z.elems.size(); ++l) {
                uint32_t k = static_cast<uint32_t>(static_cast<uint64_t>(xy) * z.elems[l] % p);
                acc.add(wa[i] * wb[j] * wc[l] * roots[k]);
            }
        }
    CSum s;
    s.value = acc.value();
    s.term_count = Int(x.size()) * Int(y.size()) * Int(z.size());
    return s;
}

BilinearWeights unit_bilinear(const Field& f) {
    BilinearWeights w;
    w.field = f;
    w.w.assign(static_cast<std::size_t>(f->p()) * f->p(), cdouble(1.0, 0.0));
    return w;
}

CSum trilinear_bilinear_sum(const SetFp& x, const SetFp& y, const SetFp& z,
                            const BilinearWeights& rho, const BilinearWeights& sigma,
                            const BilinearWeights& tau) {
    const Field& f = x.field;
    uint32_t p = f->p();
    const auto& roots = unit_root_table(f);
    KahanCSum acc;
    for (uint32_t xv : x.elems)
        for (uint32_t yv : y.elems) {
            cdouble rxy = rho.at(xv, yv);
            uint32_t xy = f->mul(xv, yv);
            for (uint32_t zv : z.elems) {
                uint32_t k = static_cast<uint32_t>(static_cast<uint64_t>(xy) * zv % p);
                acc.add(rxy * sigma.at(xv, zv) * tau.at(yv, zv) * roots[k]);
            }
        }
    CSum s;
    s.value = acc.value();
    s.term_count = Int(x.size()) * Int(y.size()) * Int(z.size());
    return s;
}

CSum multilinear_sum(const std::vector<SetFp>& sets) {
    if (sets.size() < 3 || sets.size() > 5)
        throw std::invalid_argument("multilinear_sum: 3 <= r <= 5");
    const Field& f = sets[0].field;
    uint32_t p = f->p();

    // Exact distribution of a_1 ... a_{r-1}, then one character sum.
    IntFn dist = IntFn::indicator(sets[0]);
    for (std::size_t j = 1; j + 1 < sets.size(); ++j)
        dist = mul_conv(dist, IntFn::indicator(sets[j]), ZeroPolicy::Track);

    const SetFp& last = sets.back();
    const auto& roots = unit_root_table(f);
    KahanCSum acc;
    for (uint32_t t = 0; t < p; ++t) {
        if (dist.values[t] == 0) continue;
        KahanCSum inner;
        for (uint32_t a : last.elems) {
            uint32_t k = static_cast<uint32_t>(static_cast<uint64_t>(t) * a % p);
            inner.add(roots[k]);
        }
        acc.add(to_double(dist.values[t]) * inner.value());
    }
    CSum s;
    s.value = acc.value();
    s.term_count = 1;
    for (const auto& set : sets) s.term_count *= Int(set.size());
    return s;
}

ExponentSpec bound_exponent(double delta, unsigned r, ExponentVariant variant) {
    if (delta <= 0) throw std::invalid_argument("bound_exponent: delta must be positive");
    ExponentSpec spec;
    spec.delta = delta;
    spec.r = r;
    switch (variant) {
        case ExponentVariant::ThreeSet: {
            double lg = std::max(0.0, std::log2(8.0 / delta));
            spec.exponent = delta / (8.0 * lg + 4.0);
            break;
        }
        case ExponentVariant::FourSet: {
            double n = std::ceil(0.5 * std::log2(200.0 / delta));
            if (n < 1) n = 1;
            spec.exponent = delta / (16.0 * n * n);
            spec.k = static_cast<unsigned>(n);
            break;
        }
        case ExponentVariant::KFree: {
            double l = std::ceil(2.0 * std::log2(8.0 / delta));
            if (l < 1) l = 1;
            spec.exponent = delta / (4.0 * l);
            spec.k = static_cast<unsigned>(std::ceil(std::log2(l)));
            break;
        }
    }
    return spec;
}

uint32_t poly_eval(const std::vector<uint32_t>& coeffs, uint32_t x, const FieldCtx& F) {
    uint32_t acc = 0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
        acc = F.add(F.mul(acc, x), *it % F.p());
    return acc;
}

namespace {

struct MoebiusCoeffs {
    uint32_t a, b, c, d;  // (a x + b) / (c x + d)
};

// Moebius image coefficients for (f:new_exp_sums_*_a):
// (q1 q2 x + p1 q2) / (p2 q1 x + q1 q2 + p1 p2), all evaluated at b.
MoebiusCoeffs rational_coeffs(const PolyFrac& r1, const PolyFrac& r2, uint32_t b,
                              const FieldCtx& F) {
    std::vector<uint32_t> one{1};
    const auto& p1 = r1.num;
    const auto& q1 = r1.den.empty() ? one : r1.den;
    const auto& p2 = r2.num;
    const auto& q2 = r2.den.empty() ? one : r2.den;
    uint32_t p1v = poly_eval(p1, b, F), q1v = poly_eval(q1, b, F);
    uint32_t p2v = poly_eval(p2, b, F), q2v = poly_eval(q2, b, F);
    MoebiusCoeffs m;
    m.a = F.mul(q1v, q2v);
    m.b = F.mul(p1v, q2v);
    m.c = F.mul(p2v, q1v);
    m.d = F.add(F.mul(q1v, q2v), F.mul(p1v, p2v));
    return m;
}

}  // namespace

SpecialSumResult special_sum(SpecialSumKind kind, const IntFn& f, const IntFn& g,
                             const SetFp& b, const CharTable* chi, const PolyFrac* r1,
                             const PolyFrac* r2, double flattening_delta) {
    const Field& fld = f.field;
    const FieldCtx& F = *fld;
    uint32_t p = F.p();
    bool needs_chi = (kind == SpecialSumKind::InvShiftChi || kind == SpecialSumKind::RationalChi);
    bool needs_rational =
        (kind == SpecialSumKind::RationalE || kind == SpecialSumKind::RationalChi);
    if (needs_chi && !chi) throw std::invalid_argument("special_sum: character required");
    if (needs_rational && (!r1 || !r2))
        throw std::invalid_argument("special_sum: rational specs required");
    if (needs_rational && (r1->num.empty() || r2->num.empty()))
        throw std::invalid_argument("special_sum: malformed rational spec");

    double fden = to_double(f.denom), gden = to_double(g.denom);
    auto fval = [&](uint32_t x) { return to_double(f.values[x]) / fden; };
    auto gval = [&](uint32_t y) { return to_double(g.values[y]) / gden; };

    // c[v] = sum over (x, b-parameters) of f(x) with image v; skips tallied.
    std::vector<cdouble> c(p, cdouble(0, 0));
    Int skipped = 0;

    if (kind == SpecialSumKind::InvShiftE || kind == SpecialSumKind::InvShiftChi) {
        // image 1/(x + b1), second shift b2 handled in the outer collapse
        for (uint32_t x = 0; x < p; ++x) {
            if (f.values[x] == 0) continue;
            for (uint32_t b1 : b.elems) {
                uint32_t den = F.add(x, b1);
                if (den == 0) {
                    ++skipped;
                    continue;
                }
                c[F.inv(den)] += fval(x);
            }
        }
    } else {
        for (uint32_t bv : b.elems) {
            MoebiusCoeffs m = rational_coeffs(*r1, *r2, bv, F);
            for (uint32_t x = 0; x < p; ++x) {
                if (f.values[x] == 0) continue;
                uint32_t den = F.add(F.mul(m.c, x), m.d);
                if (den == 0) {
                    ++skipped;
                    continue;
                }
                uint32_t v = F.mul(F.add(F.mul(m.a, x), m.b), F.inv(den));
                c[v] += fval(x);
            }
        }
    }

    KahanCSum acc;
    const auto& roots = unit_root_table(fld);
    switch (kind) {
        case SpecialSumKind::InvShiftE: {
            // sum_{v,y,b2} c[v] g(y) e(y (v + b2))
            for (uint32_t v = 0; v < p; ++v) {
                if (c[v] == cdouble(0, 0)) continue;
                KahanCSum inner;
                for (uint32_t y = 0; y < p; ++y) {
                    if (g.values[y] == 0) continue;
                    for (uint32_t b2 : b.elems) {
                        uint32_t t = F.add(v, b2);
                        uint32_t k = static_cast<uint32_t>(static_cast<uint64_t>(y) * t % p);
                        inner.add(gval(y) * roots[k]);
                    }
                }
                acc.add(c[v] * inner.value());
            }
            break;
        }
        case SpecialSumKind::InvShiftChi: {
            for (uint32_t v = 0; v < p; ++v) {
                if (c[v] == cdouble(0, 0)) continue;
                KahanCSum inner;
                for (uint32_t y = 0; y < p; ++y) {
                    if (g.values[y] == 0) continue;
                    for (uint32_t b2 : b.elems)
                        inner.add(gval(y) * chi->value(F.add(F.add(y, b2), v)));
                }
                acc.add(c[v] * inner.value());
            }
            break;
        }
        case SpecialSumKind::RationalE: {
            auto table = [&] {
                std::vector<cdouble> t(p, cdouble(0, 0));
                for (uint32_t v = 0; v < p; ++v) {
                    if (c[v] == cdouble(0, 0)) continue;
                    for (uint32_t y = 0; y < p; ++y) {
                        if (g.values[y] == 0) continue;
                        uint32_t k = static_cast<uint32_t>(static_cast<uint64_t>(y) * v % p);
                        t[v] += gval(y) * roots[k];
                    }
                }
                return t;
            }();
            for (uint32_t v = 0; v < p; ++v)
                if (c[v] != cdouble(0, 0)) acc.add(c[v] * table[v]);
            break;
        }
        case SpecialSumKind::RationalChi: {
            for (uint32_t v = 0; v < p; ++v) {
                if (c[v] == cdouble(0, 0)) continue;
                KahanCSum inner;
                for (uint32_t y = 0; y < p; ++y) {
                    if (g.values[y] == 0) continue;
                    inner.add(gval(y) * chi->value(F.add(y, v)));
                }
                acc.add(c[v] * inner.value());
            }
            break;
        }
    }

    SpecialSumResult res;
    res.sum.value = acc.value();
    Int b_factor = (kind == SpecialSumKind::InvShiftE || kind == SpecialSumKind::InvShiftChi)
                       ? Int(b.size()) * Int(b.size())
                       : Int(b.size());
    Int fsupp = 0;
    for (const Int& v : f.values)
        if (v != 0) ++fsupp;
    Int gsupp = 0;
    for (const Int& v : g.values)
        if (v != 0) ++gsupp;
    res.sum.term_count = fsupp * gsupp * b_factor;
    res.skipped = skipped;

    double l2f = std::sqrt(to_double(f.l2sq()));
    double l2g = std::sqrt(to_double(g.l2sq()));
    double rhs = l2f * l2g * std::sqrt(static_cast<double>(p)) * to_double(b_factor) *
                 std::pow(static_cast<double>(p), -flattening_delta);
    BoundReport row;
    row.suite = "expsum";
    row.claim_ref = "(f:new_exp_sums)";
    row.kind = BoundReport::Kind::Ratio;
    row.with_lhs(std::abs(res.sum.value)).with_rhs(rhs);
    if (rhs > 0) row.with_ratio(std::abs(res.sum.value) / rhs);
    row.with_note("skipped=" + res.skipped.str() +
                  ", delta=" + flt_str(flattening_delta));
    res.report = row;
    return res;
}

}  // namespace sumprod
