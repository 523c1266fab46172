#include "sumprod/transform.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace sumprod {

namespace {

constexpr std::size_t kNttThreshold = 512;

std::atomic<int> g_default_path{static_cast<int>(ConvPath::Auto)};
constexpr long double kPi = 3.14159265358979323846264338327950288L;

// NTT primes with deep power-of-two roots, ascending 2-adic depth:
// 998244353 = 119*2^23+1 (g=3), 754974721 = 45*2^24+1 (g=11),
// 167772161 = 5*2^25+1 (g=3), 469762049 = 7*2^26+1 (g=3).
struct NttPrime {
    uint64_t mod;
    uint64_t root;
    unsigned max_log;
};
constexpr NttPrime kNttPrimes[] = {
    {998244353ull, 3ull, 23},
    {754974721ull, 11ull, 24},
    {167772161ull, 3ull, 25},
    {469762049ull, 3ull, 26},
};
constexpr int kNumNttPrimes = 4;

uint64_t mulmod(uint64_t a, uint64_t b, uint64_t m) {
    return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

uint64_t powmod(uint64_t a, uint64_t e, uint64_t m) {
    uint64_t r = 1;
    a %= m;
    while (e) {
        if (e & 1u) r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1u;
    }
    return r;
}

void ntt_inplace(std::vector<uint64_t>& a, const NttPrime& pr, bool invert) {
    std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        uint64_t w = powmod(pr.root, (pr.mod - 1) / len, pr.mod);
        if (invert) w = powmod(w, pr.mod - 2, pr.mod);
        for (std::size_t i = 0; i < n; i += len) {
            uint64_t cur = 1;
            for (std::size_t j = 0; j < len / 2; ++j) {
                uint64_t u = a[i + j];
                uint64_t v = mulmod(a[i + j + len / 2], cur, pr.mod);
                a[i + j] = u + v < pr.mod ? u + v : u + v - pr.mod;
                a[i + j + len / 2] = u >= v ? u - v : u + pr.mod - v;
                cur = mulmod(cur, w, pr.mod);
            }
        }
    }
    if (invert) {
        uint64_t ninv = powmod(n % pr.mod, pr.mod - 2, pr.mod);
        for (auto& x : a) x = mulmod(x, ninv, pr.mod);
    }
}

// Linear convolution of residue vectors modulo one NTT prime.
std::vector<uint64_t> ntt_linear_conv(const std::vector<uint64_t>& a,
                                      const std::vector<uint64_t>& b, const NttPrime& pr) {
    std::size_t need = a.size() + b.size() - 1;
    std::size_t n = 1;
    while (n < need) n <<= 1;
    std::vector<uint64_t> fa(a.begin(), a.end()), fb(b.begin(), b.end());
    fa.resize(n, 0);
    fb.resize(n, 0);
    ntt_inplace(fa, pr, false);
    ntt_inplace(fb, pr, false);
    for (std::size_t i = 0; i < n; ++i) fa[i] = mulmod(fa[i], fb[i], pr.mod);
    ntt_inplace(fa, pr, true);
    fa.resize(need);
    return fa;
}

std::size_t bits_of(const Int& v) {
    if (v == 0) return 0;
    return boost::multiprecision::msb(v) + 1;
}

// CRT combination of per-prime residues into a signed integer in
// (-M/2, M/2], M = product of the used primes.
struct CrtCtx {
    int count;
    Int partial_prod[kNumNttPrimes + 1];  // partial_prod[i] = m_0..m_{i-1}
    uint64_t inv_prev[kNumNttPrimes];     // inverse of partial product mod m_i
    Int full;

    explicit CrtCtx(int cnt) : count(cnt) {
        partial_prod[0] = 1;
        for (int i = 0; i < cnt; ++i) {
            uint64_t mi = kNttPrimes[i].mod;
            uint64_t prev = static_cast<uint64_t>(partial_prod[i] % mi);
            inv_prev[i] = powmod(prev, mi - 2, mi);
            partial_prod[i + 1] = partial_prod[i] * Int(mi);
        }
        full = partial_prod[cnt];
    }

    Int combine(const uint64_t* res) const {
        // Garner: x = x_prev + partial_prod * t, t = (r_i - x_prev) * inv mod m_i.
        Int x = res[0];
        for (int i = 1; i < count; ++i) {
            uint64_t mi = kNttPrimes[i].mod;
            uint64_t xm = static_cast<uint64_t>(x % mi);
            uint64_t diff = res[i] >= xm ? res[i] - xm : res[i] + mi - xm;
            uint64_t t = mulmod(diff, inv_prev[i], mi);
            x += partial_prod[i] * Int(t);
        }
        if (x * 2 > full) x -= full;
        return x;
    }
};

std::vector<Int> linear_int_conv_ntt(const std::vector<Int>& a, const std::vector<Int>& b,
                                     const Int& bound) {
    int cnt = 1;
    Int prod(kNttPrimes[0].mod);
    while (cnt < kNumNttPrimes && prod <= 2 * bound) {
        prod *= Int(kNttPrimes[cnt].mod);
        ++cnt;
    }
    if (prod <= 2 * bound) return {};  // caller falls back to the direct path

    std::size_t need = a.size() + b.size() - 1;
    std::vector<std::vector<uint64_t>> per(cnt);
    for (int i = 0; i < cnt; ++i) {
        uint64_t m = kNttPrimes[i].mod;
        std::vector<uint64_t> ra(a.size()), rb(b.size());
        for (std::size_t j = 0; j < a.size(); ++j) {
            Int r = a[j] % Int(m);
            if (r < 0) r += Int(m);
            ra[j] = static_cast<uint64_t>(r);
        }
        for (std::size_t j = 0; j < b.size(); ++j) {
            Int r = b[j] % Int(m);
            if (r < 0) r += Int(m);
            rb[j] = static_cast<uint64_t>(r);
        }
        per[i] = ntt_linear_conv(ra, rb, kNttPrimes[i]);
    }
    CrtCtx crt(cnt);
    std::vector<Int> out(need);
    uint64_t res[kNumNttPrimes];
    for (std::size_t j = 0; j < need; ++j) {
        for (int i = 0; i < cnt; ++i) res[i] = per[i][j];
        out[j] = crt.combine(res);
    }
    return out;
}

std::vector<Int> linear_int_conv_naive(const std::vector<Int>& a, const std::vector<Int>& b) {
    std::vector<Int> out(a.size() + b.size() - 1, Int(0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (b[j] == 0) continue;
            out[i + j] += a[i] * b[j];
        }
    }
    return out;
}

Int max_abs(const std::vector<Int>& v) {
    Int m = 0;
    for (const Int& x : v) {
        Int a = abs(x);
        if (a > m) m = a;
    }
    return m;
}

std::vector<Int> linear_int_conv(const std::vector<Int>& a, const std::vector<Int>& b,
                                 ConvPath path) {
    if (a.empty() || b.empty()) return {};
    if (path == ConvPath::Auto) {
        ConvPath global = static_cast<ConvPath>(g_default_path.load());
        if (global != ConvPath::Auto) path = global;
    }
    bool want_ntt = false;
    switch (path) {
        case ConvPath::Naive: want_ntt = false; break;
        case ConvPath::Ntt: want_ntt = true; break;
        case ConvPath::Auto: want_ntt = std::min(a.size(), b.size()) >= kNttThreshold; break;
    }
    if (want_ntt) {
        std::size_t shorter = std::min(a.size(), b.size());
        Int bound = Int(shorter) * max_abs(a) * max_abs(b);
        if (bits_of(bound) <= 116 && a.size() + b.size() - 1 <= (1u << kNttPrimes[0].max_log)) {
            auto out = linear_int_conv_ntt(a, b, bound);
            if (!out.empty()) return out;
        }
    }
    return linear_int_conv_naive(a, b);
}

}  // namespace

void set_default_conv_path(ConvPath path) { g_default_path.store(static_cast<int>(path)); }
ConvPath default_conv_path() { return static_cast<ConvPath>(g_default_path.load()); }

std::vector<Int> cyclic_int_conv(const std::vector<Int>& a, const std::vector<Int>& b,
                                 ConvPath path) {
    if (a.size() != b.size()) throw std::invalid_argument("cyclic_int_conv: length mismatch");
    std::size_t n = a.size();
    auto lin = linear_int_conv(a, b, path);
    std::vector<Int> out(n, Int(0));
    for (std::size_t i = 0; i < lin.size(); ++i) out[i % n] += lin[i];
    return out;
}

Int IntFn::value_sum() const {
    Int s = 0;
    for (const Int& v : values) s += v;
    return s;
}

Rat IntFn::sum() const { return Rat(value_sum(), denom); }

Rat IntFn::l1() const {
    Int s = 0;
    for (const Int& v : values) s += abs(v);
    return Rat(s, denom);
}

Rat IntFn::l2sq() const {
    Int s = 0;
    for (const Int& v : values) s += v * v;
    return Rat(s, denom * denom);
}

Int IntFn::max_abs_value() const { return max_abs(values); }

bool IntFn::is_zero() const {
    for (const Int& v : values)
        if (v != 0) return false;
    return true;
}

IntFn IntFn::zero(const Field& f) { return IntFn{f, std::vector<Int>(f->p(), Int(0)), 1}; }

IntFn IntFn::delta(const Field& f, uint32_t x) {
    IntFn d = zero(f);
    d.values[x % f->p()] = 1;
    return d;
}

IntFn IntFn::constant(const Field& f, const Int& c) {
    return IntFn{f, std::vector<Int>(f->p(), c), 1};
}

IntFn IntFn::indicator(const SetFp& a) {
    IntFn d = zero(a.field);
    for (uint32_t e : a.elems) d.values[e] = 1;
    return d;
}

IntFn IntFn::balanced(const SetFp& a) {
    uint32_t p = a.field->p();
    IntFn d{a.field, std::vector<Int>(p, Int(-static_cast<int64_t>(a.size()))), Int(p)};
    for (uint32_t e : a.elems) d.values[e] += p;
    return d;
}

namespace {
void check_same_field(const IntFn& f, const IntFn& g, const char* who) {
    if (f.field->p() != g.field->p())
        throw std::invalid_argument(std::string(who) + ": field mismatch");
}
}  // namespace

IntFn add_fn(const IntFn& f, const IntFn& g) {
    check_same_field(f, g, "add_fn");
    IntFn out = IntFn::zero(f.field);
    out.denom = f.denom * g.denom;
    for (uint32_t x = 0; x < f.p(); ++x)
        out.values[x] = f.values[x] * g.denom + g.values[x] * f.denom;
    return out;
}

IntFn sub_fn(const IntFn& f, const IntFn& g) {
    check_same_field(f, g, "sub_fn");
    IntFn out = IntFn::zero(f.field);
    out.denom = f.denom * g.denom;
    for (uint32_t x = 0; x < f.p(); ++x)
        out.values[x] = f.values[x] * g.denom - g.values[x] * f.denom;
    return out;
}

IntFn scale_fn(const IntFn& f, const Int& c) {
    IntFn out = f;
    for (auto& v : out.values) v *= c;
    return out;
}

IntFn pow_fn(const IntFn& f, unsigned k) {
    IntFn out = f;
    out.denom = int_pow(f.denom, k);
    for (uint32_t x = 0; x < f.p(); ++x) out.values[x] = int_pow(f.values[x], k);
    return out;
}

IntFn reflect_fn(const IntFn& f) {
    IntFn out = f;
    for (uint32_t x = 1; x < f.p(); ++x) out.values[f.p() - x] = f.values[x];
    out.values[0] = f.values[0];
    return out;
}

const std::vector<cdouble>& unit_root_table(const Field& f) {
    static std::mutex mu;
    static std::map<uint32_t, std::vector<cdouble>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(f->p());
    if (it != cache.end()) return it->second;
    uint32_t p = f->p();
    std::vector<cdouble> tab(p);
    for (uint32_t k = 0; k < p; ++k) {
        long double theta = 2.0L * kPi * static_cast<long double>(k) / static_cast<long double>(p);
        tab[k] = {static_cast<double>(cosl(theta)), static_cast<double>(sinl(theta))};
    }
    return cache.emplace(p, std::move(tab)).first->second;
}

namespace {

void fft_inplace(std::vector<cdouble>& a, bool invert) {
    std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        long double ang = 2.0L * kPi / static_cast<long double>(len) * (invert ? 1 : -1);
        cdouble wl(static_cast<double>(cosl(ang)), static_cast<double>(sinl(ang)));
        for (std::size_t i = 0; i < n; i += len) {
            cdouble w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                cdouble u = a[i + j];
                cdouble v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (invert)
        for (auto& x : a) x /= static_cast<double>(n);
}

// Chirp factors exp(-i pi k^2 / p) with k^2 reduced mod 2p so the argument
// stays small.
cdouble chirp(uint64_t k, uint32_t p, bool conjugate) {
    uint64_t ksq = (k % (2ull * p)) * (k % (2ull * p)) % (2ull * p);
    long double theta = kPi * static_cast<long double>(ksq) / static_cast<long double>(p);
    if (!conjugate) theta = -theta;
    return {static_cast<double>(cosl(theta)), static_cast<double>(sinl(theta))};
}

// out[xi] = sum_x vals[x] exp(-2 pi i x xi / p) by Bluestein's reduction.
std::vector<cdouble> cdft_bluestein(const std::vector<cdouble>& vals, uint32_t p) {
    std::vector<cdouble> a(p), b(2 * p - 1);
    for (uint32_t x = 0; x < p; ++x) a[x] = chirp(x, p, false) * vals[x];
    // b[k] = exp(+i pi (k-(p-1))^2 / p), so the linear convolution at
    // offset xi+(p-1) assembles exp(-i pi (x^2 + xi^2 - (xi-x)^2)/p) terms.
    for (std::size_t k = 0; k < 2 * p - 1; ++k) {
        int64_t d = static_cast<int64_t>(k) - static_cast<int64_t>(p - 1);
        b[k] = chirp(static_cast<uint64_t>(d < 0 ? -d : d), p, true);
    }
    std::size_t n = 1;
    while (n < 3 * p - 2) n <<= 1;
    a.resize(n, {0, 0});
    b.resize(n, {0, 0});
    fft_inplace(a, false);
    fft_inplace(b, false);
    for (std::size_t i = 0; i < n; ++i) a[i] *= b[i];
    fft_inplace(a, true);

    std::vector<cdouble> out(p);
    for (uint32_t xi = 0; xi < p; ++xi) out[xi] = chirp(xi, p, false) * a[xi + p - 1];
    return out;
}

Spectrum dft_bluestein(const IntFn& f) {
    uint32_t p = f.p();
    double dden = to_double(f.denom);
    std::vector<cdouble> vals(p);
    for (uint32_t x = 0; x < p; ++x) vals[x] = to_double(f.values[x]) / dden;
    return Spectrum{f.field, cdft_bluestein(vals, p)};
}

}  // namespace

Spectrum dft_naive(const IntFn& f) {
    uint32_t p = f.p();
    const auto& roots = unit_root_table(f.field);
    std::vector<double> vals(p);
    double dden = to_double(f.denom);
    for (uint32_t x = 0; x < p; ++x) vals[x] = to_double(f.values[x]) / dden;

    Spectrum s{f.field, std::vector<cdouble>(p)};
    parallel_chunks(p, [&](std::size_t lo, std::size_t hi, std::size_t) {
        for (std::size_t xi = lo; xi < hi; ++xi) {
            KahanCSum acc;
            for (uint32_t x = 0; x < p; ++x) {
                // e(-xi x) = conj(e(xi x))
                uint32_t k = static_cast<uint32_t>(static_cast<uint64_t>(xi) * x % p);
                acc.add(std::conj(roots[k]) * vals[x]);
            }
            s.coeffs[xi] = acc.value();
        }
    });
    return s;
}

Spectrum dft(const IntFn& f, ConvPath path) {
    if (path == ConvPath::Auto) {
        ConvPath global = default_conv_path();
        if (global != ConvPath::Auto) path = global;
    }
    switch (path) {
        case ConvPath::Naive: return dft_naive(f);
        case ConvPath::Ntt: return dft_bluestein(f);
        case ConvPath::Auto: return f.p() >= kNttThreshold ? dft_bluestein(f) : dft_naive(f);
    }
    return dft_naive(f);
}

IntFn add_conv(const IntFn& f, const IntFn& g, ConvPath path) {
    check_same_field(f, g, "add_conv");
    IntFn out = IntFn::zero(f.field);
    out.denom = f.denom * g.denom;
    out.values = cyclic_int_conv(f.values, g.values, path);
    return out;
}

IntFn add_corr(const IntFn& f, const IntFn& g, ConvPath path) {
    // (f.g)(x) = sum_y f(y) g(y+x) = (reflect(f) * g)(x)
    return add_conv(reflect_fn(f), g, path);
}

IntFn mul_conv(const IntFn& f, const IntFn& g, ZeroPolicy zp, ConvPath path) {
    check_same_field(f, g, "mul_conv");
    uint32_t p = f.p();
    const FieldCtx& F = *f.field;
    std::vector<Int> fa(p - 1), ga(p - 1);
    for (uint32_t k = 0; k < p - 1; ++k) {
        fa[k] = f.values[F.exp(k)];
        ga[k] = g.values[F.exp(k)];
    }
    auto conv = cyclic_int_conv(fa, ga, path);
    IntFn out = IntFn::zero(f.field);
    out.denom = f.denom * g.denom;
    for (uint32_t k = 0; k < p - 1; ++k) out.values[F.exp(k)] = conv[k];
    if (zp == ZeroPolicy::Track)
        out.values[0] =
            f.values[0] * g.value_sum() + g.values[0] * f.value_sum() - f.values[0] * g.values[0];
    return out;
}

namespace {
double rel_residual(double diff, double scale) {
    return scale > 0 ? diff / scale : diff;
}
}  // namespace

std::vector<BoundReport> identity_suite(const IntFn& f, const IntFn& g, double tol) {
    check_same_field(f, g, "identity_suite");
    uint32_t p = f.p();
    Spectrum fh = dft(f), gh = dft(g);

    std::vector<BoundReport> rows;

    {  // Plancherel: sum f conj(g) = (1/p) sum fh conj(gh)
        Rat exact = Rat(0);
        for (uint32_t x = 0; x < p; ++x) exact += f.at(x) * g.at(x);
        KahanCSum spec;
        for (uint32_t xi = 0; xi < p; ++xi) spec.add(fh.coeffs[xi] * std::conj(gh.coeffs[xi]));
        cdouble rhs = spec.value() / static_cast<double>(p);
        double scale = std::max(1.0, std::abs(to_double(exact)));
        double resid = rel_residual(std::abs(rhs - cdouble(to_double(exact), 0.0)), scale);
        auto row = BoundReport::assert_row("identities", "(F_Par)", resid < tol);
        row.with_lhs(exact).with_rhs(std::abs(rhs)).with_error(resid);
        rows.push_back(row);
    }

    {  // Convolution Parseval: sum_y |(f*g)(y)|^2 = (1/p) sum |fh|^2 |gh|^2
        IntFn conv = add_conv(f, g);
        Rat exact = conv.l2sq();
        KahanSum spec;
        for (uint32_t xi = 0; xi < p; ++xi)
            spec.add(std::norm(fh.coeffs[xi]) * std::norm(gh.coeffs[xi]));
        double rhs = spec.value() / static_cast<double>(p);
        double scale = std::max(1.0, to_double(exact));
        double resid = rel_residual(std::abs(rhs - to_double(exact)), scale);
        auto row = BoundReport::assert_row("identities", "(svertka)", resid < tol);
        row.with_lhs(exact).with_rhs(rhs).with_error(resid);
        rows.push_back(row);
    }

    {  // Inversion: f(x) = (1/p) sum fh(xi) e(xi x) = (1/p) conj(DFT(conj(fh)))(x)
        double maxresid = 0.0, scale = std::max(1.0, to_double(f.l1()));
        if (p >= kNttThreshold) {
            std::vector<cdouble> conj_spec(p);
            for (uint32_t xi = 0; xi < p; ++xi) conj_spec[xi] = std::conj(fh.coeffs[xi]);
            auto back = cdft_bluestein(conj_spec, p);
            for (uint32_t x = 0; x < p; ++x) {
                cdouble rec = std::conj(back[x]) / static_cast<double>(p);
                maxresid = std::max(maxresid, std::abs(rec - cdouble(to_double(f.at(x)), 0.0)));
            }
        } else {
            const auto& roots = unit_root_table(f.field);
            for (uint32_t x = 0; x < p; ++x) {
                KahanCSum acc;
                for (uint32_t xi = 0; xi < p; ++xi) {
                    uint32_t k = static_cast<uint32_t>(static_cast<uint64_t>(xi) * x % p);
                    acc.add(fh.coeffs[xi] * roots[k]);
                }
                cdouble rec = acc.value() / static_cast<double>(p);
                maxresid = std::max(maxresid, std::abs(rec - cdouble(to_double(f.at(x)), 0.0)));
            }
        }
        double resid = rel_residual(maxresid, scale);
        auto row = BoundReport::assert_row("identities", "(f:inverse)", resid < tol);
        row.with_lhs(Rat(0)).with_error(resid);
        rows.push_back(row);
    }

    {  // Product formulas: hat(f*g) = fh gh and hat(f.g) = conj(fh) gh
        Spectrum ch = dft(add_conv(f, g));
        Spectrum oh = dft(add_corr(f, g));
        double m1 = 0.0, m2 = 0.0, scale = 0.0;
        for (uint32_t xi = 0; xi < p; ++xi) {
            m1 = std::max(m1, std::abs(ch.coeffs[xi] - fh.coeffs[xi] * gh.coeffs[xi]));
            m2 = std::max(m2, std::abs(oh.coeffs[xi] - std::conj(fh.coeffs[xi]) * gh.coeffs[xi]));
            scale = std::max(scale, std::abs(fh.coeffs[xi] * gh.coeffs[xi]));
        }
        double resid = rel_residual(std::max(m1, m2), std::max(1.0, scale));
        auto row = BoundReport::assert_row("identities", "(f:F_svertka)", resid < tol);
        row.with_error(resid);
        rows.push_back(row);
    }

    return rows;
}

}  // namespace sumprod
