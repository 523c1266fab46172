#include "sumprod/sl2.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace sumprod {

SL2Elem sl2_make(const FieldCtx& F, uint32_t a, uint32_t b, uint32_t c, uint32_t d) {
    a %= F.p();
    b %= F.p();
    c %= F.p();
    d %= F.p();
    if (F.sub(F.mul(a, d), F.mul(b, c)) != 1)
        throw std::invalid_argument("sl2_make: determinant is not 1");
    return SL2Elem{a, b, c, d};
}

SL2Elem sl2_identity() { return SL2Elem{1, 0, 0, 1}; }

SL2Elem sl2_mul(const FieldCtx& F, const SL2Elem& g, const SL2Elem& h) {
    return SL2Elem{F.add(F.mul(g.a, h.a), F.mul(g.b, h.c)),
                   F.add(F.mul(g.a, h.b), F.mul(g.b, h.d)),
                   F.add(F.mul(g.c, h.a), F.mul(g.d, h.c)),
                   F.add(F.mul(g.c, h.b), F.mul(g.d, h.d))};
}

SL2Elem sl2_inv(const FieldCtx& F, const SL2Elem& g) {
    return SL2Elem{g.d, F.neg(g.b), F.neg(g.c), g.a};
}

uint64_t sl2_key(const FieldCtx& F, const SL2Elem& g) {
    uint64_t p = F.p();
    return ((static_cast<uint64_t>(g.a) * p + g.b) * p + g.c) * p + g.d;
}

ProjPoint act(const FieldCtx& F, const SL2Elem& g, ProjPoint z) {
    if (z.is_inf(F)) {
        if (g.c == 0) return proj_inf(F);
        return proj_finite(F.mul(g.a, F.inv(g.c)));
    }
    uint32_t den = F.add(F.mul(g.c, z.v), g.d);
    if (den == 0) return proj_inf(F);
    uint32_t num = F.add(F.mul(g.a, z.v), g.b);
    return proj_finite(F.mul(num, F.inv(den)));
}

ProjPoint act_gl2(const FieldCtx& F, const GL2Elem& g, ProjPoint z) {
    if (z.is_inf(F)) {
        if (g.c == 0) return proj_inf(F);
        return proj_finite(F.mul(g.a, F.inv(g.c)));
    }
    uint32_t den = F.add(F.mul(g.c, z.v), g.d);
    if (den == 0) return proj_inf(F);
    uint32_t num = F.add(F.mul(g.a, z.v), g.b);
    return proj_finite(F.mul(num, F.inv(den)));
}

const SL2Enum& enumerate_sl2(const Field& f) {
    static std::mutex mu;
    static std::map<uint32_t, SL2Enum> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(f->p());
    if (it != cache.end()) return it->second;

    uint32_t p = f->p();
    if (p > 31) throw std::invalid_argument("enumerate_sl2: dense enumeration gated to p <= 31");
    SL2Enum en;
    en.field = f;
    const FieldCtx& F = *f;
    for (uint32_t a = 0; a < p; ++a) {
        for (uint32_t b = 0; b < p; ++b) {
            for (uint32_t c = 0; c < p; ++c) {
                if (a != 0) {
                    uint32_t d = F.mul(F.add(1, F.mul(b, c)), F.inv(a));
                    en.elems.push_back(SL2Elem{a, b, c, d});
                } else {
                    // a = 0 forces bc = -1; every d works.
                    if (b == 0 || F.mul(b, c) != F.p() - 1) continue;
                    for (uint32_t d = 0; d < p; ++d) en.elems.push_back(SL2Elem{a, b, c, d});
                }
            }
        }
    }
    en.index.reserve(en.elems.size() * 2);
    for (uint32_t i = 0; i < en.elems.size(); ++i)
        en.index.emplace(sl2_key(F, en.elems[i]), i);
    return cache.emplace(p, std::move(en)).first->second;
}

Rat GroupFn::mass() const {
    Int s = 0;
    for (const auto& [k, v] : num) s += v.second;
    return Rat(s, den);
}

Rat GroupFn::l2sq() const {
    Int s = 0;
    for (const auto& [k, v] : num) s += v.second * v.second;
    return Rat(s, den * den);
}

bool GroupFn::is_symmetric() const {
    const FieldCtx& F = *field;
    for (const auto& [k, v] : num) {
        uint64_t ik = sl2_key(F, sl2_inv(F, v.first));
        auto it = num.find(ik);
        if (it == num.end() || it->second.second != v.second) return false;
    }
    return true;
}

bool GroupFn::is_probability() const {
    if (den <= 0) return false;
    for (const auto& [k, v] : num)
        if (v.second < 0) return false;
    return mass() == 1;
}

void GroupFn::add_weight(const SL2Elem& g, const Int& w) {
    uint64_t k = sl2_key(*field, g);
    auto it = num.find(k);
    if (it == num.end())
        num.emplace(k, std::make_pair(g, w));
    else
        it->second.second += w;
}

GroupFn GroupFn::delta(const Field& f, const SL2Elem& g) {
    GroupFn d;
    d.field = f;
    d.den = 1;
    d.add_weight(g, 1);
    return d;
}

GroupFn GroupFn::uniform_on(const Field& f, const std::vector<SL2Elem>& support) {
    if (support.empty()) throw std::invalid_argument("uniform_on: empty support");
    GroupFn d;
    d.field = f;
    for (const auto& g : support) d.add_weight(g, 1);
    Int total = 0;
    for (const auto& [k, v] : d.num) total += v.second;
    d.den = total;
    return d;
}

GroupFn GroupFn::haar(const Field& f) {
    const SL2Enum& en = enumerate_sl2(f);
    GroupFn d;
    d.field = f;
    d.den = Int(en.size());
    for (const auto& g : en.elems) d.add_weight(g, 1);
    return d;
}

GroupFn group_conv(const GroupFn& mu, const GroupFn& nu) {
    if (mu.field->p() != nu.field->p())
        throw std::invalid_argument("group_conv: field mismatch");
    const FieldCtx& F = *mu.field;
    uint32_t p = F.p();

    GroupFn out;
    out.field = mu.field;
    out.den = mu.den * nu.den;

    if (p <= 13) {
        // Dense path over the full enumeration.
        const SL2Enum& en = enumerate_sl2(mu.field);
        std::vector<Int> dense(en.size(), Int(0));
        for (const auto& [k1, v1] : mu.num) {
            // (mu*nu)(g) = sum_h mu(h) nu(h^-1 g)  <=>  g = h * x
            for (const auto& [k2, v2] : nu.num) {
                SL2Elem g = sl2_mul(F, v1.first, v2.first);
                dense[en.idx(g)] += v1.second * v2.second;
            }
        }
        for (uint32_t i = 0; i < dense.size(); ++i)
            if (dense[i] != 0) out.num.emplace(sl2_key(F, en.elems[i]),
                                               std::make_pair(en.elems[i], dense[i]));
        return out;
    }

    if (mu.num.size() * nu.num.size() > 50'000'000ull)
        throw std::invalid_argument("group_conv: support product exceeds the sparse guard");
    for (const auto& [k1, v1] : mu.num)
        for (const auto& [k2, v2] : nu.num)
            out.add_weight(sl2_mul(F, v1.first, v2.first), v1.second * v2.second);
    return out;
}

std::vector<Rat> gconv(const GroupFn& F_fn, const IntFn& f) {
    uint32_t p = f.p();
    std::vector<Rat> f_p1(p + 1, Rat(0));
    for (uint32_t x = 0; x < p; ++x) f_p1[x] = f.at(x);
    return gconv(F_fn, f_p1);
}

std::vector<Rat> gconv(const GroupFn& F_fn, const std::vector<Rat>& f_on_p1) {
    const FieldCtx& F = *F_fn.field;
    uint32_t p = F.p();
    if (f_on_p1.size() != p + 1) throw std::invalid_argument("gconv: expected p+1 values");
    std::vector<Rat> out(p + 1, Rat(0));
    for (const auto& [k, gv] : F_fn.num) {
        SL2Elem gi = sl2_inv(F, gv.first);
        Rat w(gv.second, F_fn.den);
        for (uint32_t x = 0; x <= p; ++x) {
            ProjPoint z = act(F, gi, ProjPoint{x});
            const Rat& fv = f_on_p1[z.v];
            if (fv != 0) out[x] += w * fv;
        }
    }
    return out;
}

namespace {

std::vector<uint32_t> poly_mul_fp(const std::vector<uint32_t>& a,
                                  const std::vector<uint32_t>& b, const FieldCtx& F) {
    if (a.empty() || b.empty()) return {};
    std::vector<uint32_t> out(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            out[i + j] = F.add(out[i + j], F.mul(a[i] % F.p(), b[j] % F.p()));
    return out;
}

unsigned poly_degree(const std::vector<uint32_t>& a, const FieldCtx& F) {
    for (std::size_t i = a.size(); i-- > 0;)
        if (a[i] % F.p() != 0) return static_cast<unsigned>(i);
    return 0;
}

// Rank test with dependency extraction: returns empty on independence,
// otherwise the coefficients of a vanishing combination.
std::vector<uint32_t> find_dependency(std::vector<std::vector<uint32_t>> rows,
                                      const FieldCtx& F) {
    std::size_t n = rows.size();
    std::size_t width = 0;
    for (auto& r : rows) width = std::max(width, r.size());
    for (auto& r : rows) r.resize(width, 0);

    // Track the combination of original rows forming each working row.
    std::vector<std::vector<uint32_t>> comb(n, std::vector<uint32_t>(n, 0));
    for (std::size_t i = 0; i < n; ++i) comb[i][i] = 1;

    std::size_t rank = 0;
    for (std::size_t col = 0; col < width && rank < n; ++col) {
        std::size_t pivot = n;
        for (std::size_t r = rank; r < n; ++r)
            if (rows[r][col] % F.p() != 0) {
                pivot = r;
                break;
            }
        if (pivot == n) continue;
        std::swap(rows[pivot], rows[rank]);
        std::swap(comb[pivot], comb[rank]);
        uint32_t inv = F.inv(rows[rank][col] % F.p());
        for (std::size_t r = rank + 1; r < n; ++r) {
            uint32_t factor = F.mul(rows[r][col] % F.p(), inv);
            if (factor == 0) continue;
            for (std::size_t c = 0; c < width; ++c)
                rows[r][c] = F.sub(rows[r][c] % F.p(), F.mul(factor, rows[rank][c] % F.p()));
            for (std::size_t c = 0; c < n; ++c)
                comb[r][c] = F.sub(comb[r][c], F.mul(factor, comb[rank][c]));
        }
        ++rank;
    }
    for (std::size_t r = rank; r < n; ++r) {
        bool zero = true;
        for (uint32_t v : rows[r])
            if (v % F.p() != 0) zero = false;
        if (zero) return comb[r];
    }
    if (rank < n) return comb[rank];
    return {};
}

std::string comb_to_string(const std::vector<uint32_t>& comb,
                           const std::vector<std::string>& names) {
    std::string s;
    for (std::size_t i = 0; i < comb.size(); ++i) {
        if (comb[i] == 0) continue;
        if (!s.empty()) s += " + ";
        s += std::to_string(comb[i]) + "*" + names[i];
    }
    return s.empty() ? "0" : s;
}

}  // namespace

MatrixFamily family_sprime(const SetFp& b) {
    MatrixFamily fam;
    fam.kind = MatrixFamily::Kind::Sprime;
    fam.field = b.field;
    fam.b1 = b.size();
    const FieldCtx& F = *b.field;
    std::set<uint64_t> seen;
    for (uint32_t a : b.elems) {
        SL2Elem s{0, F.neg(1), 1, a};
        if (seen.insert(sl2_key(F, s)).second) fam.elems.push_back(s);
    }
    return fam;
}

MatrixFamily family_s(const SetFp& b1, const SetFp& b2) {
    MatrixFamily fam;
    fam.kind = MatrixFamily::Kind::S;
    fam.field = b1.field;
    fam.b1 = b1.size();
    fam.b2 = b2.size();
    const FieldCtx& F = *b1.field;
    std::set<uint64_t> seen;
    for (uint32_t a : b1.elems) {
        for (uint32_t b : b2.elems) {
            SL2Elem s{b, F.sub(F.mul(a, b), 1), 1, a};
            if (seen.insert(sl2_key(F, s)).second) fam.elems.push_back(s);
        }
    }
    return fam;
}

MatrixFamily family_srational(const PolyFrac& r1, const PolyFrac& r2, const SetFp& b) {
    const Field& fld = b.field;
    const FieldCtx& F = *fld;
    std::vector<uint32_t> one{1};
    std::vector<uint32_t> p1 = r1.num, q1 = r1.den.empty() ? one : r1.den;
    std::vector<uint32_t> p2 = r2.num, q2 = r2.den.empty() ? one : r2.den;
    if (p1.empty() || p2.empty())
        throw std::invalid_argument("family_srational: empty numerator");

    {
        std::vector<std::vector<uint32_t>> quad{
            poly_mul_fp(p1, p2, F), poly_mul_fp(p1, q2, F), poly_mul_fp(p2, q1, F),
            poly_mul_fp(q1, q2, F)};
        auto dep = find_dependency(quad, F);
        if (!dep.empty())
            throw std::invalid_argument(
                "family_srational: {p1p2, p1q2, p2q1, q1q2} dependent: " +
                comb_to_string(dep, {"p1p2", "p1q2", "p2q1", "q1q2"}) + " = 0");
        std::vector<std::vector<uint32_t>> quint{
            poly_mul_fp(p1, poly_mul_fp(q1, q2, F), F), poly_mul_fp(p1, poly_mul_fp(p2, q1, F), F),
            poly_mul_fp(p1, poly_mul_fp(p1, p2, F), F), poly_mul_fp(q1, poly_mul_fp(q1, q2, F), F),
            poly_mul_fp(q1, poly_mul_fp(q1, p2, F), F)};
        auto dep5 = find_dependency(quint, F);
        if (!dep5.empty())
            throw std::invalid_argument(
                "family_srational: {p1q1q2, p1p2q1, p1^2p2, q1^2q2, q1^2p2} dependent: " +
                comb_to_string(dep5, {"p1q1q2", "p1p2q1", "p1^2p2", "q1^2q2", "q1^2p2"}) + " = 0");
    }

    MatrixFamily fam;
    fam.kind = MatrixFamily::Kind::Srational;
    fam.field = fld;
    fam.b1 = b.size();
    fam.poly_degree = std::max(std::max(poly_degree(p1, F), poly_degree(q1, F)),
                               std::max(poly_degree(p2, F), poly_degree(q2, F)));
    std::set<uint64_t> seen;
    for (uint32_t bv : b.elems) {
        uint32_t q1v = poly_eval(q1, bv, F), q2v = poly_eval(q2, bv, F);
        if (q1v == 0 || q2v == 0) {
            ++fam.skipped;
            continue;
        }
        uint32_t r1v = F.mul(poly_eval(p1, bv, F), F.inv(q1v));
        uint32_t r2v = F.mul(poly_eval(p2, bv, F), F.inv(q2v));
        SL2Elem s{1, r1v, r2v, F.add(1, F.mul(r1v, r2v))};
        if (seen.insert(sl2_key(F, s)).second) fam.elems.push_back(s);
    }
    return fam;
}

MatrixFamily family_gl2(const SetFp& b1, const SetFp& b2, const SetFp& b3) {
    MatrixFamily fam;
    fam.kind = MatrixFamily::Kind::GL2;
    fam.field = b1.field;
    fam.b1 = b1.size();
    fam.b2 = b2.size();
    fam.b3 = b3.size();
    const FieldCtx& F = *b1.field;
    for (uint32_t x1 : b1.elems)
        for (uint32_t x2 : b2.elems)
            for (uint32_t x3 : b3.elems) {
                uint32_t det = F.sub(x3, F.mul(x1, x2));
                if (det == 0) {
                    ++fam.skipped;
                    continue;
                }
                fam.gl2_elems.push_back(GL2Elem{1, x1, x2, x3, det});
            }
    return fam;
}

std::vector<Rat> flatten_profile(const GroupFn& mu, unsigned k_max) {
    if (!mu.is_probability())
        throw std::invalid_argument("flatten_profile: mu must be a probability measure");
    if (!mu.is_symmetric())
        throw std::invalid_argument("flatten_profile: mu must be symmetric");
    if (mu.field->p() > 13)
        throw std::invalid_argument("flatten_profile: dense iteration gated to p <= 13");

    uint32_t p = mu.field->p();
    Rat haar = Rat(1, Int(p) * p * p - p);
    std::vector<Rat> profile;
    GroupFn nu = mu;
    for (unsigned k = 0; k <= k_max; ++k) {
        Rat e = nu.l2sq() - haar;
        if (e < 0) throw std::logic_error("flatten_profile: negative excess");
        if (!profile.empty() && e > profile.back())
            throw std::logic_error("flatten_profile: monotonicity violated");
        profile.push_back(e);
        if (k < k_max) nu = group_conv(nu, nu);
    }
    return profile;
}

std::optional<unsigned> flattening_depth(const std::vector<Rat>& profile, const Field& f) {
    uint32_t p = f->p();
    Rat threshold = Rat(2, Int(p) * p * p - p);
    for (unsigned k = 0; k < profile.size(); ++k)
        if (profile[k] < threshold) return k;
    return std::nullopt;
}

TriplingResult tripling(const Field& f, const std::vector<SL2Elem>& a, std::size_t guard) {
    if (a.empty()) throw std::invalid_argument("tripling: empty set");
    if (a.size() > guard)
        throw std::invalid_argument("tripling: |A| exceeds the product-enumeration guard; "
                                    "use a smaller set");
    const FieldCtx& F = *f;
    std::unordered_set<uint64_t> aa;
    std::vector<SL2Elem> aa_elems;
    for (const auto& g : a)
        for (const auto& h : a) {
            SL2Elem gh = sl2_mul(F, g, h);
            if (aa.insert(sl2_key(F, gh)).second) aa_elems.push_back(gh);
        }
    std::unordered_set<uint64_t> aaa;
    for (const auto& g : aa_elems)
        for (const auto& h : a) aaa.insert(sl2_key(F, sl2_mul(F, g, h)));

    TriplingResult res;
    res.n_a = a.size();
    res.n_aa = aa.size();
    res.n_aaa = aaa.size();
    res.exponent = a.size() > 1 ? std::log(static_cast<double>(res.n_aaa)) /
                                          std::log(static_cast<double>(res.n_a)) -
                                      1.0
                                : 0.0;
    return res;
}

namespace {

// Coset representatives: SL2/B by first column, B\SL2 by bottom row.
std::vector<SL2Elem> left_borel_reps(const FieldCtx& F) {
    std::vector<SL2Elem> reps{sl2_identity()};
    for (uint32_t t = 0; t < F.p(); ++t) reps.push_back(SL2Elem{t, F.neg(1), 1, 0});
    return reps;
}

std::vector<SL2Elem> right_borel_reps(const FieldCtx& F) {
    std::vector<SL2Elem> reps{sl2_identity()};
    for (uint32_t t = 0; t < F.p(); ++t) reps.push_back(SL2Elem{0, F.neg(1), 1, t});
    return reps;
}

SL2Elem random_sl2(const FieldCtx& F, std::mt19937_64& rng) {
    uint32_t p = F.p();
    uint32_t a = static_cast<uint32_t>(rng() % p);
    if (a != 0) {
        uint32_t b = static_cast<uint32_t>(rng() % p);
        uint32_t c = static_cast<uint32_t>(rng() % p);
        uint32_t d = F.mul(F.add(1, F.mul(b, c)), F.inv(a));
        return SL2Elem{a, b, c, d};
    }
    uint32_t b = 1 + static_cast<uint32_t>(rng() % (p - 1));
    uint32_t c = F.neg(F.inv(b));
    uint32_t d = static_cast<uint32_t>(rng() % p);
    return SL2Elem{0, b, c, d};
}

bool in_borel_coset(const FieldCtx& F, const SL2Elem& g1i, const SL2Elem& s,
                    const SL2Elem& g2i) {
    SL2Elem m = sl2_mul(F, sl2_mul(F, g1i, s), g2i);
    return m.c == 0;
}

// Dihedral subgroup from the norm-1 torus of x^2 - eps y^2 with eps a
// non-residue, extended by the order-4 element w.
std::vector<SL2Elem> dihedral_subgroup(const FieldCtx& F, uint32_t eps) {
    std::vector<SL2Elem> torus;
    for (uint32_t beta = 0; beta < F.p(); ++beta) {
        uint32_t rhs = F.add(1, F.mul(eps, F.mul(beta, beta)));
        if (rhs == 0) {
            torus.push_back(SL2Elem{0, F.mul(eps, beta), beta, 0});
            continue;
        }
        if (F.legendre(rhs) != 1) continue;
        uint32_t alpha = F.exp(F.dlog(rhs) / 2);
        torus.push_back(SL2Elem{alpha, F.mul(eps, beta), beta, alpha});
        torus.push_back(SL2Elem{F.neg(alpha), F.mul(eps, beta), beta, F.neg(alpha)});
    }
    SL2Elem w{0, F.neg(1), 1, 0};
    std::vector<SL2Elem> dih = torus;
    for (const auto& t : torus) dih.push_back(sl2_mul(F, w, t));
    return dih;
}

}  // namespace

CosetEscapeResult coset_escape(const MatrixFamily& s, std::size_t trials, uint64_t seed) {
    const Field& fld = s.field;
    const FieldCtx& F = *fld;
    uint32_t p = F.p();
    if (trials < 1) throw std::invalid_argument("coset_escape: trials >= 1 required");

    CosetEscapeResult res;
    bool exhaustive = p <= 13;
    std::mt19937_64 rng(seed);

    std::vector<std::pair<SL2Elem, SL2Elem>> borel_pairs;
    if (exhaustive) {
        for (const auto& g1 : left_borel_reps(F))
            for (const auto& g2 : right_borel_reps(F)) borel_pairs.emplace_back(g1, g2);
    } else {
        borel_pairs.emplace_back(SL2Elem{0, F.neg(1), 1, 0}, sl2_identity());
        for (std::size_t t = 0; t < trials; ++t)
            borel_pairs.emplace_back(random_sl2(F, rng), random_sl2(F, rng));
    }

    // Dihedral sweep: every non-residue for small p, a sample otherwise.
    std::vector<uint32_t> eps_list;
    for (uint32_t e = 2; e < p && eps_list.size() < (exhaustive ? p : 3); ++e)
        if (F.legendre(e) == -1) eps_list.push_back(e);
    std::vector<std::pair<SL2Elem, SL2Elem>> dih_pairs;
    dih_pairs.emplace_back(sl2_identity(), sl2_identity());
    for (std::size_t t = 0; t < std::min<std::size_t>(trials, 64); ++t)
        dih_pairs.emplace_back(random_sl2(F, rng), random_sl2(F, rng));

    if (s.kind != MatrixFamily::Kind::GL2) {
        std::size_t max_borel = 0;
        std::pair<SL2Elem, SL2Elem> argmax{sl2_identity(), sl2_identity()};
        for (const auto& [g1, g2] : borel_pairs) {
            SL2Elem g1i = sl2_inv(F, g1), g2i = sl2_inv(F, g2);
            std::size_t cnt = 0;
            for (const auto& m : s.elems)
                if (in_borel_coset(F, g1i, m, g2i)) ++cnt;
            if (cnt > max_borel) {
                max_borel = cnt;
                argmax = {g1, g2};
            }
        }
        res.max_borel = max_borel;

        std::size_t max_dih = 0;
        for (uint32_t eps : eps_list) {
            auto dih = dihedral_subgroup(F, eps);
            std::unordered_set<uint64_t> dset;
            for (const auto& d : dih) dset.insert(sl2_key(F, d));
            for (const auto& [g1, g2] : dih_pairs) {
                SL2Elem g1i = sl2_inv(F, g1), g2i = sl2_inv(F, g2);
                std::size_t cnt = 0;
                for (const auto& m : s.elems) {
                    SL2Elem x = sl2_mul(F, sl2_mul(F, g1i, m), g2i);
                    if (dset.count(sl2_key(F, x))) ++cnt;
                }
                max_dih = std::max(max_dih, cnt);
            }
        }
        res.max_dihedral = max_dih;

        switch (s.kind) {
            case MatrixFamily::Kind::S: {
                std::size_t bound = std::max(s.b1, s.b2);
                auto row = BoundReport::assert_row("escape", "(f:intersection)",
                                                   max_borel <= bound);
                row.with_lhs(Rat(max_borel)).with_rhs(Rat(bound));
                res.rows.push_back(row);
                auto row2 = BoundReport::assert_row("escape", "(f:intersection+)",
                                                    max_dih <= 8 * bound);
                row2.with_lhs(Rat(max_dih)).with_rhs(Rat(8 * bound));
                res.rows.push_back(row2);
                break;
            }
            case MatrixFamily::Kind::Srational: {
                std::size_t m = s.poly_degree;
                auto row = BoundReport::assert_row("escape", "(f*:intersection-)",
                                                   max_borel <= 2 * m);
                row.with_lhs(Rat(max_borel)).with_rhs(Rat(2 * m));
                res.rows.push_back(row);
                auto row2 = BoundReport::assert_row("escape", "(f*:intersection+)",
                                                    max_dih <= 12 * m);
                row2.with_lhs(Rat(max_dih)).with_rhs(Rat(12 * m));
                res.rows.push_back(row2);
                break;
            }
            case MatrixFamily::Kind::Sprime: {
                // The escape bound fails for S': the family is a single-
                // parameter degree-1 image and sits inside one Borel coset.
                bool violated = max_borel > 2;
                auto row = BoundReport::assert_row("escape", "S' Borel violation found",
                                                   violated);
                row.with_lhs(Rat(max_borel)).with_rhs(Rat(2));
                row.with_note("witness g1=(" + std::to_string(argmax.first.a) + "," +
                              std::to_string(argmax.first.b) + ";" +
                              std::to_string(argmax.first.c) + "," +
                              std::to_string(argmax.first.d) + "), g2=identity-class");
                if (violated) res.violation = argmax;
                res.rows.push_back(row);
                break;
            }
            default: break;
        }
        return res;
    }

    // GL2 family: weighted escape over pairs with equal determinants,
    // sigma_{coset}(G) = #{(g,h) : det g = det h, g^-1 h in coset}.
    const auto& gl = s.gl2_elems;
    if (gl.size() > 3000)
        throw std::invalid_argument("coset_escape: GL2 family exceeds the pair guard");
    std::map<uint32_t, std::vector<uint32_t>> by_det;
    for (uint32_t i = 0; i < gl.size(); ++i) by_det[gl[i].det].push_back(i);

    std::vector<SL2Elem> quotients;
    for (const auto& [det, idxs] : by_det)
        for (uint32_t i : idxs)
            for (uint32_t j : idxs) {
                const GL2Elem& g = gl[i];
                const GL2Elem& h = gl[j];
                uint32_t di = F.inv(g.det);
                // g^-1 h with det 1
                uint32_t a = F.mul(di, F.add(F.mul(g.d, h.a), F.neg(F.mul(g.b, h.c))));
                uint32_t b = F.mul(di, F.add(F.mul(g.d, h.b), F.neg(F.mul(g.b, h.d))));
                uint32_t c = F.mul(di, F.add(F.mul(g.a, h.c), F.neg(F.mul(g.c, h.a))));
                uint32_t d = F.mul(di, F.add(F.mul(g.a, h.d), F.neg(F.mul(g.c, h.b))));
                quotients.push_back(SL2Elem{a, b, c, d});
            }

    std::size_t max_borel = 0;
    for (const auto& [g1, g2] : borel_pairs) {
        SL2Elem g1i = sl2_inv(F, g1), g2i = sl2_inv(F, g2);
        std::size_t cnt = 0;
        for (const auto& m : quotients)
            if (in_borel_coset(F, g1i, m, g2i)) ++cnt;
        max_borel = std::max(max_borel, cnt);
    }
    res.max_borel = max_borel;

    std::size_t max_dih = 0;
    for (uint32_t eps : eps_list) {
        auto dih = dihedral_subgroup(F, eps);
        std::unordered_set<uint64_t> dset;
        for (const auto& d : dih) dset.insert(sl2_key(F, d));
        for (const auto& [g1, g2] : dih_pairs) {
            SL2Elem g1i = sl2_inv(F, g1), g2i = sl2_inv(F, g2);
            std::size_t cnt = 0;
            for (const auto& m : quotients) {
                SL2Elem x = sl2_mul(F, sl2_mul(F, g1i, m), g2i);
                if (dset.count(sl2_key(F, x))) ++cnt;
            }
            max_dih = std::max(max_dih, cnt);
        }
    }
    res.max_dihedral = max_dih;

    std::size_t msz = std::max(std::max(s.b1, s.b2), s.b3);
    Int bound = 100 * int_pow(Int(msz), 4);
    auto row = BoundReport::assert_row("escape", "(f:GL2-)", Int(max_borel) <= bound);
    row.with_lhs(Rat(max_borel)).with_rhs(Rat(bound));
    res.rows.push_back(row);
    auto row2 = BoundReport::assert_row("escape", "(f:GL2+)", Int(max_dih) <= bound);
    row2.with_lhs(Rat(max_dih)).with_rhs(Rat(bound));
    res.rows.push_back(row2);
    return res;
}

CfResult cf_count(const SetFp& a, unsigned k) {
    const Field& fld = a.field;
    const FieldCtx& F = *fld;
    uint32_t p = F.p();
    if (k < 1) throw std::invalid_argument("cf_count: k >= 1");
    {
        double logn = k * std::log2(std::max<double>(2.0, static_cast<double>(a.size())));
        if (k > 8 && logn > 30.0)
            throw std::invalid_argument("cf_count: k too large for the pushforward guard");
    }

    std::vector<Int> cur(p + 1, Int(0)), next(p + 1, Int(0));
    cur[0] = 1;  // empty tail
    for (unsigned step = 0; step < k; ++step) {
        std::fill(next.begin(), next.end(), Int(0));
        for (uint32_t z = 0; z <= p; ++z) {
            if (cur[z] == 0) continue;
            if (z == p) {
                // 1/(a + inf) = 0 for every a
                next[0] += cur[z] * Int(a.size());
                continue;
            }
            for (uint32_t av : a.elems) {
                uint32_t den = F.add(av, z);
                if (den == 0)
                    next[p] += cur[z];
                else
                    next[F.inv(den)] += cur[z];
            }
        }
        std::swap(cur, next);
    }

    CfResult res;
    res.counts = cur;
    res.total = int_pow(Int(a.size()), k);
    Rat mean = Rat(res.total, p);
    double dmean = to_double(mean);
    double maxdev = 0;
    for (uint32_t x = 0; x < p; ++x)
        maxdev = std::max(maxdev, std::abs(to_double(Rat(cur[x]) - mean)));
    res.max_rel_dev = dmean > 0 ? maxdev / dmean : 0.0;

    Int total_check = 0;
    for (const Int& v : cur) total_check += v;
    BoundReport row = BoundReport::assert_row("cf", "mass conservation sum N = |A|^k",
                                              total_check == res.total);
    row.with_lhs(Rat(total_check)).with_rhs(Rat(res.total)).with_ratio(res.max_rel_dev);
    row.with_note("max relative deviation from |A|^k/p");
    res.report = row;
    return res;
}

ActionCountResult action_count(const MatrixFamily& s, const IntFn& f1, const IntFn& f2,
                               bool measure_flattening) {
    if (s.kind == MatrixFamily::Kind::GL2)
        throw std::invalid_argument("action_count: SL2 families only");
    const Field& fld = s.field;
    const FieldCtx& F = *fld;
    uint32_t p = F.p();

    Int num = 0;
    for (const auto& m : s.elems) {
        for (uint32_t x = 0; x < p; ++x) {
            if (f1.values[x] == 0) continue;
            ProjPoint y = act(F, m, ProjPoint{x});
            if (y.v == p) continue;  // f2(inf) = 0
            num += f1.values[x] * f2.values[y.v];
        }
    }

    ActionCountResult res;
    res.sigma = Rat(num, f1.denom * f2.denom);
    res.main_term = Rat(Int(s.elems.size())) * f1.sum() * f2.sum() / Rat(p);
    res.error = res.sigma - res.main_term;

    if (measure_flattening && p <= 13 && !s.elems.empty()) {
        GroupFn mu;
        mu.field = fld;
        mu.den = Int(s.elems.size()) * Int(s.elems.size());
        for (const auto& g : s.elems) {
            SL2Elem gi = sl2_inv(F, g);
            for (const auto& h : s.elems) mu.add_weight(sl2_mul(F, gi, h), 1);
        }
        auto profile = flatten_profile(mu, 6);
        res.flattening_k = flattening_depth(profile, fld);
    }

    BoundReport row;
    row.suite = "action";
    row.claim_ref = "(f:counting)";
    row.kind = BoundReport::Kind::Ratio;
    row.with_lhs(res.sigma).with_main(res.main_term).with_error(res.error);
    double l2 = std::sqrt(to_double(f1.l2sq()) * to_double(f2.l2sq()));
    if (res.flattening_k) {
        double rhs = 2.0 * l2 * static_cast<double>(s.elems.size()) *
                     std::pow(static_cast<double>(p),
                              -1.0 / std::pow(2.0, static_cast<double>(*res.flattening_k) + 2.0));
        row.with_rhs(rhs);
        if (rhs > 0) row.with_ratio(std::abs(to_double(res.error)) / rhs);
        row.with_note("k=" + std::to_string(*res.flattening_k) + " from measured flattening");
    } else {
        double rhs = 2.0 * l2 * static_cast<double>(s.elems.size());
        row.with_rhs(rhs);
        if (rhs > 0) row.with_ratio(std::abs(to_double(res.error)) / rhs);
        row.with_note(measure_flattening && p <= 13 ? "no flattening depth within k_max"
                                                    : "flattening depth not measured");
    }
    res.report = row;
    return res;
}

InverseDiffResult inverse_diff_count(const SetFp& a1, const SetFp& a2, uint32_t lambda,
                                     const SetFp* b) {
    const Field& fld = a1.field;
    const FieldCtx& F = *fld;
    if (lambda % F.p() == 0)
        throw std::invalid_argument("inverse_diff_count: lambda must be nonzero");
    lambda %= F.p();

    InverseDiffResult res;
    res.skipped_zeros = 0;
    if (a1.contains(0)) res.skipped_zeros += Int(a2.size());
    if (a2.contains(0)) res.skipped_zeros += Int(a1.size());
    if (a1.contains(0) && a2.contains(0)) res.skipped_zeros -= 1;

    Int count = 0;
    for (uint32_t x : a1.elems) {
        if (x == 0) continue;
        uint32_t u = F.sub(F.inv(x), lambda);
        if (u == 0) continue;
        uint32_t y = F.inv(u);
        if (y != 0 && a2.contains(y)) ++count;
    }
    res.count = count;

    const SetFp& bref = b ? *b : a2;
    res.k1 = Rat(Int(sumset(a1, bref).size()), a1.size());
    res.k2 = Rat(Int(sumset(a2, bref).size()), a2.size());

    SetFp inv1 = inverse_set(a1), inv2 = inverse_set(a2);
    res.inv_energy = energy_add(inv1, inv2);

    Rat main = res.k1 * res.k2 * Rat(Int(a1.size()) * Int(a2.size()), F.p());
    {
        BoundReport row;
        row.suite = "inverse-diff";
        row.claim_ref = "(f:1/A_2)";
        row.kind = BoundReport::Kind::Ratio;
        row.with_lhs(Rat(count)).with_main(main).with_error(Rat(Rat(count) - main));
        double second = 2.0 * std::sqrt(to_double(res.k1 * res.k2) *
                                        static_cast<double>(a1.size()) *
                                        static_cast<double>(a2.size()));
        row.with_rhs(second);
        if (second > 0)
            row.with_ratio(std::abs(to_double(Rat(Rat(count) - main))) / second);
        res.rows.push_back(row);
    }
    {
        // Energy lemma with A = A1, B = A2, K = |A1 + A2| / |A1|.
        Rat k = Rat(Int(sumset(a1, a2).size()), a1.size());
        Rat main_e = k * k * Rat(int_pow(Int(a1.size()), 2) * int_pow(Int(a2.size()), 2), F.p());
        Rat err = res.inv_energy - main_e;
        double kd = to_double(k);
        double rhs = std::pow(kd, 1.25) * std::pow(static_cast<double>(a1.size()), 1.25) *
                         std::pow(static_cast<double>(a2.size()), 1.5) +
                     kd * kd * static_cast<double>(a1.size()) * static_cast<double>(a1.size());
        BoundReport row;
        row.suite = "inverse-diff";
        row.claim_ref = "(f:1/A_energy)";
        row.kind = BoundReport::Kind::Ratio;
        row.with_lhs(res.inv_energy).with_main(main_e).with_error(err).with_rhs(rhs);
        if (rhs > 0) row.with_ratio(std::abs(to_double(err)) / rhs);
        res.rows.push_back(row);
    }
    return res;
}

PolyShiftResult poly_shift_count(const SetFp& a, const SetFp& b,
                                 const std::vector<uint32_t>& p1,
                                 const std::vector<uint32_t>& p2) {
    const Field& fld = a.field;
    const FieldCtx& F = *fld;
    uint32_t p = F.p();
    auto degree_ok = [&](const std::vector<uint32_t>& c) {
        for (std::size_t i = 1; i < c.size(); ++i)
            if (c[i] % p != 0) return true;
        return false;
    };
    if (!degree_ok(p1) || !degree_ok(p2))
        throw std::invalid_argument("poly_shift_count: p1 and p2 must be non-constant");

    std::vector<Int> hist(p, Int(0));
    Int skipped = 0;
    for (uint32_t bv : b.elems) {
        uint32_t v1 = poly_eval(p1, bv, F), v2 = poly_eval(p2, bv, F);
        for (uint32_t av : a.elems) {
            uint32_t den = F.add(av, v2);
            if (den == 0) {
                ++skipped;
                continue;
            }
            ++hist[F.add(v1, F.inv(den))];
        }
    }
    PolyShiftResult res;
    Int coll = 0;
    std::size_t image = 0;
    for (const Int& h : hist) {
        coll += h * h;
        if (h != 0) ++image;
    }
    res.collisions = Rat(coll);
    res.image_size = image;
    res.skipped = skipped;
    res.main_term = Rat(int_pow(Int(a.size()), 2) * int_pow(Int(b.size()), 2), p);
    res.error = res.collisions - res.main_term;

    BoundReport row;
    row.suite = "poly-shift";
    row.claim_ref = "(f:pol)";
    row.kind = BoundReport::Kind::Ratio;
    row.with_lhs(res.collisions).with_main(res.main_term).with_error(res.error);
    double rhs = 2.0 * static_cast<double>(a.size()) * static_cast<double>(b.size()) *
                 static_cast<double>(b.size());
    row.with_rhs(rhs);
    if (rhs > 0) row.with_ratio(std::abs(to_double(res.error)) / rhs);
    row.with_note("image=" + std::to_string(image) + ", skipped=" + skipped.str());
    res.report = row;
    return res;
}

Gl2ImageResult gl2_image(const SetFp& a, const SetFp& b1, const SetFp& b2, const SetFp& b3,
                         std::size_t escape_trials) {
    const Field& fld = a.field;
    const FieldCtx& F = *fld;
    uint32_t p = F.p();

    // Image over all tuples: x/0 = inf for x != 0; only 0/0 is skipped.
    // Degenerate matrices are tallied (they are excluded from the escape
    // statistics) but their well-defined values still belong to the image.
    Gl2ImageResult res;
    std::vector<uint8_t> hit(p + 1, 0);
    Int degenerate = 0;
    for (uint32_t x1 : b1.elems)
        for (uint32_t x2 : b2.elems)
            for (uint32_t x3 : b3.elems) {
                if (F.sub(x3, F.mul(x1, x2)) == 0) ++degenerate;
                for (uint32_t av : a.elems) {
                    uint32_t num = F.add(av, x1);
                    uint32_t den = F.add(F.mul(av, x2), x3);
                    if (den == 0) {
                        if (num != 0) hit[p] = 1;
                        continue;
                    }
                    hit[F.mul(num, F.inv(den))] = 1;
                }
            }
    res.degenerate_tally = degenerate;
    res.image_has_inf = hit[p] != 0;
    res.image_size = 0;
    for (uint8_t h : hit) res.image_size += h;

    // Determinant collision statistic sum_z r^2_{B3 - B1 B2}(z), z != 0.
    std::vector<Int> det_hist(p, Int(0));
    for (uint32_t x1 : b1.elems)
        for (uint32_t x2 : b2.elems) {
            uint32_t prod = F.mul(x1, x2);
            for (uint32_t x3 : b3.elems) ++det_hist[F.sub(x3, prod)];
        }
    Int stat = 0;
    for (uint32_t z = 1; z < p; ++z) stat += det_hist[z] * det_hist[z];
    res.det_pair_statistic = stat;

    {
        BoundReport row;
        row.suite = "gl2-image";
        row.claim_ref = "(f:r_BB-B)";
        row.kind = BoundReport::Kind::Ratio;
        double b4 = std::pow(static_cast<double>(std::max({b1.size(), b2.size(), b3.size()})), 4.0);
        row.with_lhs(Rat(stat)).with_rhs(b4);
        if (b4 > 0) row.with_ratio(to_double(Rat(stat)) / b4);
        row.with_note("degenerate=" + degenerate.str());
        res.rows.push_back(row);
    }
    {
        BoundReport row;
        row.suite = "gl2-image";
        row.claim_ref = "(f:GL2_rational)";
        row.kind = BoundReport::Kind::Ratio;
        double floor_shape = std::min(static_cast<double>(p), static_cast<double>(a.size()));
        row.with_lhs(Rat(res.image_size)).with_rhs(floor_shape);
        if (floor_shape > 0) row.with_ratio(static_cast<double>(res.image_size) / floor_shape);
        res.rows.push_back(row);
    }
    MatrixFamily fam = family_gl2(b1, b2, b3);
    if (fam.size() > 0 && fam.size() <= 3000) {
        auto esc = coset_escape(fam, escape_trials);
        for (auto& r : esc.rows) res.rows.push_back(r);
    }
    return res;
}

FrobeniusResult frobenius_check(const GroupFn& Ffn, const IntFn& f, const IntFn& phi,
                                FrobeniusMode mode) {
    const Field& fld = f.field;
    const FieldCtx& F = *fld;
    uint32_t p = F.p();
    if (f.sum() != 0)
        throw std::invalid_argument("frobenius_check: f must have zero mean");

    FrobeniusResult res;
    double fl2 = std::sqrt(to_double(f.l2sq()));
    double phil2 = std::sqrt(to_double(phi.l2sq()));
    double Fl2 = std::sqrt(to_double(Ffn.l2sq()));

    {
        auto conv = gconv(Ffn, f);
        Rat lhs = 0;
        for (uint32_t x = 0; x < p; ++x)
            if (phi.values[x] != 0) lhs += conv[x] * phi.at(x);
        res.lhs = lhs;
        res.rhs = 2.0 * p * Fl2 * phil2 * fl2;
        auto row = BoundReport::assert_row(
            "frobenius", "(f:Frobenious)",
            to_double(lhs) <= res.rhs * (1 + 1e-9) + 1e-12);
        row.with_lhs(lhs).with_rhs(res.rhs);
        if (res.rhs > 0) row.with_ratio(to_double(lhs) / res.rhs);
        // P^1 convention: stabilizers have size |SL2|/(p+1) here, not the
        // |SL2|/p of the F_p-action phrasing.
        row.with_note("P^1 action, f(inf)=0");
        res.rows.push_back(row);
    }

    if (mode == FrobeniusMode::PowerIteration) {
        if (p > 13)
            throw std::invalid_argument("frobenius_check: power iteration gated to p <= 13");
        const SL2Enum& en = enumerate_sl2(fld);
        std::size_t n = p + 1;
        // Gram operator T = M^* M over P^1 columns, f(inf) = 0.
        std::vector<double> T(n * n, 0.0);
        Rat trace = 0;
        Rat fden2 = Rat(f.denom * f.denom);
        std::vector<double> row_vals(n);
        std::vector<Int> row_nums(n);
        for (const auto& g : en.elems) {
            SL2Elem gi = sl2_inv(F, g);
            for (uint32_t x = 0; x <= p; ++x) {
                ProjPoint z = act(F, gi, ProjPoint{x});
                row_nums[x] = z.v == p ? Int(0) : f.values[z.v];
                row_vals[x] = to_double(row_nums[x]);
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (row_nums[i] == 0) continue;
                trace += Rat(row_nums[i] * row_nums[i]) / fden2;
                for (std::size_t j = 0; j < n; ++j) T[i * n + j] += row_vals[i] * row_vals[j];
            }
        }
        double scale = to_double(f.denom);
        for (auto& t : T) t /= scale * scale;
        res.gram_trace = trace;

        std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n))), w(n);
        double lam = 0;
        for (int it = 0; it < 300; ++it) {
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0;
                for (std::size_t j = 0; j < n; ++j) acc += T[i * n + j] * v[j];
                w[i] = acc;
            }
            double norm = 0;
            for (double x : w) norm += x * x;
            norm = std::sqrt(norm);
            if (norm == 0) break;
            for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
            lam = norm;
        }
        res.lambda1 = std::sqrt(lam);

        double bound = 2.0 * p * fl2;
        auto row = BoundReport::assert_row("frobenius", "lambda_1 <= 2p||f||_2",
                                           res.lambda1 <= bound * (1 + 1e-6));
        row.with_lhs(res.lambda1).with_rhs(bound);
        if (bound > 0) row.with_ratio(res.lambda1 / bound);
        res.rows.push_back(row);

        Int s = Int(p) * p * p - p;
        Rat expect = Rat(s) * f.l2sq();
        auto row2 = BoundReport::assert_row("frobenius", "Gram trace = (p^3-p)||f||_2^2",
                                            trace == expect);
        row2.with_lhs(trace).with_rhs(expect);
        res.rows.push_back(row2);
    }
    return res;
}

}  // namespace sumprod
