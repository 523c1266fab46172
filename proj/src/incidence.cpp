#include "sumprod/incidence.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace sumprod {

namespace {

// Per-slope counts n_{m,b} = #{(a2,a1) in A x A : a1 - m a2 = b}, then the
// vertical family.  moment = 3 for triples, 4 for quadruples.
Int line_moment_sum(const std::vector<const SetFp*>& grids, unsigned moment) {
    const Field& f = grids[0]->field;
    uint32_t p = f->p();
    std::size_t gcount = grids.size();

    std::vector<Int> per_slope(p, Int(0));
    parallel_chunks(p, [&](std::size_t lo, std::size_t hi, std::size_t) {
        std::vector<std::vector<uint32_t>> buckets(gcount, std::vector<uint32_t>(p));
        for (std::size_t m = lo; m < hi; ++m) {
            for (std::size_t gi = 0; gi < gcount; ++gi) {
                auto& bucket = buckets[gi];
                std::fill(bucket.begin(), bucket.end(), 0u);
                const auto& el = grids[gi]->elems;
                for (uint32_t a2 : el) {
                    uint32_t t = f->mul(static_cast<uint32_t>(m), a2);
                    for (uint32_t a1 : el) ++bucket[f->sub(a1, t)];
                }
            }
            unsigned __int128 acc = 0;
            for (uint32_t b = 0; b < p; ++b) {
                unsigned __int128 prod = 1;
                bool zero = false;
                for (std::size_t gi = 0; gi < gcount; ++gi) {
                    uint32_t n = buckets[gi][b];
                    if (n == 0) {
                        zero = true;
                        break;
                    }
                    prod *= n;
                }
                if (zero) continue;
                if (gcount == 1) {
                    unsigned __int128 q = prod;
                    for (unsigned e = 1; e < moment; ++e) q *= prod;
                    acc += q;
                } else {
                    acc += prod;
                }
            }
            per_slope[m] = Int(static_cast<uint64_t>(acc >> 64)) * (Int(1) << 64) +
                           Int(static_cast<uint64_t>(acc));
        }
    });

    Int total = 0;
    for (const Int& v : per_slope) total += v;

    // Vertical lines x = c: n = |S| when c lies in S.
    if (gcount == 1) {
        total += Int(grids[0]->size()) * int_pow(Int(grids[0]->size()), moment - 1) *
                 Int(grids[0]->size());
    } else {
        SetFp common = *grids[0];
        Int prod_sizes = 1;
        for (std::size_t gi = 0; gi < gcount; ++gi) {
            if (gi) common = intersect(common, *grids[gi]);
            prod_sizes *= Int(grids[gi]->size());
        }
        total += Int(common.size()) * prod_sizes;
    }
    return total;
}

}  // namespace

EnergyValue collinear_triples(const SetFp& a) {
    uint32_t p = a.field->p();
    std::vector<const SetFp*> grids{&a};
    Int moments = line_moment_sum(grids, 3);
    // A fully coincident triple lies on p+1 lines but counts once.
    Int result = moments - Int(p) * Int(a.size()) * Int(a.size());
    return Rat(result);
}

EnergyValue collinear_quadruples(const SetFp& a, const SetFp& b, const SetFp& c,
                                 const SetFp& d) {
    uint32_t p = a.field->p();
    std::vector<const SetFp*> grids{&a, &b, &c, &d};
    Int moments = line_moment_sum(grids, 4);
    SetFp common = intersect(intersect(a, b), intersect(c, d));
    Int result = moments - Int(p) * Int(common.size()) * Int(common.size());
    return Rat(result);
}

namespace {
Int int128_to_int(unsigned __int128 v) {
    return Int(static_cast<uint64_t>(v >> 64)) * (Int(1) << 64) + Int(static_cast<uint64_t>(v));
}
}  // namespace

QFunction q_function(const SetFp& a, const SetFp& b, const SetFp& c, const SetFp& d) {
    const Field& f = a.field;
    uint32_t p = f->p();
    if (p > 2048) throw std::invalid_argument("q_function: dense table gated to p <= 2048");

    QFunction q;
    q.field = f;
    q.table.assign(static_cast<std::size_t>(p) * p, 0);
    q.total_tuples = Int(a.size()) * Int(b.size()) * Int(c.size()) * Int(d.size());

    for (uint32_t av : a.elems) {
        for (uint32_t cv : c.elems) {
            if (cv == av) continue;
            uint32_t inv = f->inv(f->sub(cv, av));
            for (uint32_t bv : b.elems) {
                uint32_t x = f->mul(f->sub(bv, av), inv);
                int64_t* row = &q.table[static_cast<std::size_t>(x) * p];
                for (uint32_t dv : d.elems) {
                    uint32_t y = f->mul(f->sub(dv, av), inv);
                    ++row[y];
                }
            }
        }
    }

    SetFp ac = intersect(a, c);
    SetFp all = intersect(intersect(a, b), intersect(c, d));
    q.same_abscissa_tuples = Int(ac.size()) * Int(b.size()) * Int(d.size());
    q.full_degenerate = Int(all.size());

    Int sum_sq = 0;
    for (int64_t v : q.table) sum_sq += Int(v) * Int(v);
    q.sum_sq = sum_sq;

    // Pairs of tuples where both denominators vanish: collinearity reduces
    // to (b-a, d-a) being parallel, zero vectors parallel to everything.
    std::unordered_map<uint64_t, uint64_t> dir_count;
    uint64_t zero_vectors = 0;
    for (uint32_t av : ac.elems) {
        for (uint32_t bv : b.elems) {
            uint32_t u = f->sub(bv, av);
            for (uint32_t dv : d.elems) {
                uint32_t v = f->sub(dv, av);
                if (u == 0 && v == 0) {
                    ++zero_vectors;
                    continue;
                }
                uint64_t key;
                if (u != 0)
                    key = f->mul(v, f->inv(u));  // slope v/u
                else
                    key = p;  // vertical direction
                ++dir_count[key];
            }
        }
    }
    unsigned __int128 parallel_pairs = 0;
    for (const auto& [key, n] : dir_count)
        parallel_pairs += static_cast<unsigned __int128>(n) * n;
    Int t2 = q.same_abscissa_tuples;
    Int z(zero_vectors);
    Int both_zero_pairs = int128_to_int(parallel_pairs) + 2 * z * t2 - z * z;

    // Cross pairs: one denominator vanishes, the other does not; collinear
    // exactly when the degenerate tuple has b = c = d = a.
    Int cross_pairs = 2 * q.full_degenerate * (q.total_tuples - q.same_abscissa_tuples);

    q.degenerate_pairs = both_zero_pairs + cross_pairs;
    return q;
}

Int QFunction::reconstructed_quadruples() const { return sum_sq + degenerate_pairs; }

PointSet3 make_point_set3(const Field& f, std::vector<Point3> pts) {
    for (auto& pt : pts) {
        pt.x %= f->p();
        pt.y %= f->p();
        pt.z %= f->p();
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return PointSet3{f, std::move(pts)};
}

PlaneSet make_plane_set(const Field& f, std::vector<std::array<uint32_t, 4>> raw) {
    std::vector<Plane> planes;
    for (auto& r : raw) {
        uint32_t u = r[0] % f->p(), v = r[1] % f->p(), w = r[2] % f->p(), c = r[3] % f->p();
        if (u == 0 && v == 0 && w == 0)
            throw std::invalid_argument("make_plane_set: zero normal vector");
        uint32_t lead = u != 0 ? u : (v != 0 ? v : w);
        uint32_t s = f->inv(lead);
        planes.push_back(Plane{f->mul(u, s), f->mul(v, s), f->mul(w, s), f->mul(c, s)});
    }
    std::sort(planes.begin(), planes.end());
    planes.erase(std::unique(planes.begin(), planes.end()), planes.end());
    return PlaneSet{f, std::move(planes)};
}

LineSet make_line_set(const Field& f, std::vector<Line2> lines) {
    for (auto& l : lines) {
        l.m %= f->p();
        l.b %= f->p();
        if (l.vertical) l.m = 0;
    }
    std::sort(lines.begin(), lines.end());
    lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
    return LineSet{f, std::move(lines)};
}

namespace {

// Maximum number of collinear points, by counting points per canonical line.
std::size_t max_collinearity(const PointSet3& pts) {
    const Field& f = pts.field;
    if (pts.points.size() < 2) return pts.points.size();
    std::map<std::array<uint32_t, 6>, std::set<std::size_t>> per_line;
    auto canon_dir = [&](int64_t dx, int64_t dy, int64_t dz) {
        uint32_t p = f->p();
        auto m = [&](int64_t t) { return static_cast<uint32_t>(((t % p) + p) % p); };
        std::array<uint32_t, 3> d{m(dx), m(dy), m(dz)};
        uint32_t lead = d[0] != 0 ? d[0] : (d[1] != 0 ? d[1] : d[2]);
        uint32_t s = f->inv(lead);
        return std::array<uint32_t, 3>{f->mul(d[0], s), f->mul(d[1], s), f->mul(d[2], s)};
    };
    for (std::size_t i = 0; i < pts.points.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.points.size(); ++j) {
            const Point3& pi = pts.points[i];
            const Point3& pj = pts.points[j];
            auto d = canon_dir(static_cast<int64_t>(pj.x) - pi.x,
                               static_cast<int64_t>(pj.y) - pi.y,
                               static_cast<int64_t>(pj.z) - pi.z);
            // Base point: subtract the multiple of d that zeroes the leading
            // coordinate of the line parametrization.
            uint32_t t;
            if (d[0] != 0) t = f->mul(pi.x, f->inv(d[0]));
            else if (d[1] != 0) t = f->mul(pi.y, f->inv(d[1]));
            else t = f->mul(pi.z, f->inv(d[2]));
            std::array<uint32_t, 3> base{f->sub(pi.x, f->mul(t, d[0])),
                                         f->sub(pi.y, f->mul(t, d[1])),
                                         f->sub(pi.z, f->mul(t, d[2]))};
            std::array<uint32_t, 6> key{base[0], base[1], base[2], d[0], d[1], d[2]};
            per_line[key].insert(i);
            per_line[key].insert(j);
        }
    }
    std::size_t best = 2;
    for (const auto& [key, members] : per_line) best = std::max(best, members.size());
    return best;
}

}  // namespace

PointPlaneResult point_plane_incidences(const PointSet3& pts, const PlaneSet& planes,
                                        const std::vector<Rat>* alpha,
                                        const std::vector<Rat>* beta) {
    const Field& f = pts.field;
    if (alpha && alpha->size() != pts.points.size())
        throw std::invalid_argument("point_plane_incidences: alpha size mismatch");
    if (beta && beta->size() != planes.planes.size())
        throw std::invalid_argument("point_plane_incidences: beta size mismatch");

    // Group planes by normal so each point evaluates one dot product per
    // distinct normal.
    std::map<std::array<uint32_t, 3>, std::unordered_map<uint32_t, std::pair<Int, Rat>>> groups;
    for (std::size_t j = 0; j < planes.planes.size(); ++j) {
        const Plane& pl = planes.planes[j];
        auto& slot = groups[{pl.u, pl.v, pl.w}][pl.c];
        slot.first += 1;
        slot.second += beta ? (*beta)[j] : Rat(1);
    }

    Int count = 0;
    Rat weighted = 0;
    for (std::size_t i = 0; i < pts.points.size(); ++i) {
        const Point3& pt = pts.points[i];
        Rat av = alpha ? (*alpha)[i] : Rat(1);
        for (const auto& [normal, cmap] : groups) {
            uint64_t dot = static_cast<uint64_t>(normal[0]) * pt.x +
                           static_cast<uint64_t>(normal[1]) * pt.y +
                           static_cast<uint64_t>(normal[2]) * pt.z;
            uint32_t c = static_cast<uint32_t>(dot % f->p());
            auto it = cmap.find(c);
            if (it == cmap.end()) continue;
            count += it->second.first;
            weighted += av * it->second.second;
        }
    }

    PointPlaneResult res;
    res.incidences = count;
    res.weighted = weighted;
    res.max_collinear = max_collinearity(pts);

    double np = static_cast<double>(pts.points.size());
    double npl = static_cast<double>(planes.planes.size());
    Rat main = Rat(Int(pts.points.size()) * Int(planes.planes.size()), f->p());
    double rhs = std::sqrt(np) * npl + static_cast<double>(res.max_collinear) * np;
    BoundReport row;
    row.suite = "incidence";
    row.claim_ref = "(f:Misha+)";
    row.kind = BoundReport::Kind::Ratio;
    row.with_lhs(Rat(count)).with_main(main).with_error(Rat(Rat(count) - main)).with_rhs(rhs);
    double err = std::abs(to_double(Rat(Rat(count) - main)));
    if (rhs > 0) row.with_ratio(err / rhs);
    row.with_note("k=" + std::to_string(res.max_collinear));
    res.report = row;
    return res;
}

std::size_t design_space_size(uint32_t q) {
    return static_cast<std::size_t>(q) * q * q + static_cast<std::size_t>(q) * q + q + 1;
}

namespace {

// Points (= hyperplanes, by duality) of PG(3,q): nonzero 4-vectors with the
// first nonzero coordinate normalized to 1.
std::vector<std::array<uint32_t, 4>> pg3_points(uint32_t q) {
    std::vector<std::array<uint32_t, 4>> pts;
    auto emit_with_prefix_one = [&](unsigned lead) {
        std::array<uint32_t, 4> v{0, 0, 0, 0};
        v[lead] = 1;
        std::size_t free_coords = 3 - lead;
        std::size_t total = 1;
        for (std::size_t i = 0; i < free_coords; ++i) total *= q;
        for (std::size_t code = 0; code < total; ++code) {
            std::size_t c = code;
            for (std::size_t i = lead + 1; i < 4; ++i) {
                v[i] = static_cast<uint32_t>(c % q);
                c /= q;
            }
            pts.push_back(v);
        }
    };
    for (unsigned lead = 0; lead < 4; ++lead) emit_with_prefix_one(lead);
    return pts;
}

}  // namespace

std::vector<BoundReport> design_bound_check(uint32_t q, const std::vector<double>& alpha,
                                            const std::vector<double>& beta) {
    if (q > 7) throw std::invalid_argument("design_bound_check: q <= 7 required");
    bool prime = q >= 2;
    for (uint32_t d = 2; d * d <= q; ++d)
        if (q % d == 0) prime = false;
    if (!prime) throw std::invalid_argument("design_bound_check: q must be prime");

    auto pts = pg3_points(q);
    std::size_t n = pts.size();
    if (alpha.size() != n || beta.size() != n)
        throw std::invalid_argument("design_bound_check: weights must have size " +
                                    std::to_string(n));

    KahanSum sa, sb;
    for (double v : alpha) sa.add(v);
    for (double v : beta) sb.add(v);
    if (std::abs(sa.value()) > 1e-9 && std::abs(sb.value()) > 1e-9)
        throw std::invalid_argument("design_bound_check: one weight family must be mean-zero");

    // Incidence matrix over point/hyperplane duality: dot = 0.
    std::vector<uint8_t> inc(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            uint64_t dot = 0;
            for (int k = 0; k < 4; ++k) dot += static_cast<uint64_t>(pts[i][k]) * pts[j][k];
            inc[i * n + j] = (dot % q) == 0;
        }
    }

    // I^T I = q^2 I + (q+1) J, exactly.
    bool identity_ok = true;
    for (std::size_t i = 0; i < n && identity_ok; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            uint64_t dot = 0;
            for (std::size_t k = 0; k < n; ++k)
                dot += static_cast<uint64_t>(inc[k * n + i]) * inc[k * n + j];
            uint64_t expect = (i == j ? static_cast<uint64_t>(q) * q : 0) + q + 1;
            if (dot != expect) {
                identity_ok = false;
                break;
            }
        }
    }
    auto row1 = BoundReport::assert_row("design", "I^T I = q^2 I + (q+1) J", identity_ok);
    row1.with_rhs(Rat(Int(q) * Int(q)))
        .with_note("off-diagonal " + std::to_string(q + 1) + ", n=" + std::to_string(n));

    // |sum I alpha beta| <= q ||alpha|| ||beta||.
    KahanSum total;
    for (std::size_t i = 0; i < n; ++i) {
        KahanSum rowsum;
        for (std::size_t j = 0; j < n; ++j)
            if (inc[i * n + j]) rowsum.add(beta[j]);
        total.add(alpha[i] * rowsum.value());
    }
    double na = 0, nb = 0;
    for (double v : alpha) na += v * v;
    for (double v : beta) nb += v * v;
    double rhs = q * std::sqrt(na) * std::sqrt(nb);
    double lhs = std::abs(total.value());
    auto row2 =
        BoundReport::assert_row("design", "(f:Vinh)", lhs <= rhs * (1 + 1e-9) + 1e-9);
    row2.with_lhs(lhs).with_rhs(rhs);
    if (rhs > 0) row2.with_ratio(lhs / rhs);

    return {row1, row2};
}

PointLineResult point_line_incidences(const SetFp& a, const SetFp& b, const LineSet& lines) {
    const Field& f = a.field;
    auto bbm = b.bitmap();
    Int count = 0;
    for (const Line2& l : lines.lines) {
        if (l.vertical) {
            if (a.contains(l.b)) count += Int(b.size());
            continue;
        }
        uint64_t c = 0;
        for (uint32_t x : a.elems) {
            uint32_t y = f->add(f->mul(l.m, x), l.b);
            c += bbm[y];
        }
        count += Int(c);
    }

    PointLineResult res;
    res.incidences = count;
    res.main_term = Rat(Int(a.size()) * Int(b.size()) * Int(lines.lines.size()), f->p());
    res.error = Rat(count) - res.main_term;

    double smin = static_cast<double>(std::min(a.size(), b.size()));
    double smax = static_cast<double>(std::max(a.size(), b.size()));
    double nl = static_cast<double>(lines.lines.size());
    double rhs = std::pow(smin, 0.75) * std::sqrt(smax) * std::pow(nl, 0.75) + nl + smin * smax;
    BoundReport row;
    row.suite = "incidence";
    row.claim_ref = "(f:line/point_as)";
    row.kind = BoundReport::Kind::Ratio;
    row.with_lhs(Rat(count)).with_main(res.main_term).with_error(res.error).with_rhs(rhs);
    if (rhs > 0) row.with_ratio(std::abs(to_double(res.error)) / rhs);
    res.report = row;
    return res;
}

}  // namespace sumprod
