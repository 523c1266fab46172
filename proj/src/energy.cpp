#include "sumprod/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sumprod {

namespace {

Rat sum_of_squares(const IntFn& f) {
    Int s = 0;
    for (const Int& v : f.values) s += v * v;
    return Rat(s, f.denom * f.denom);
}

Rat sum_pointwise_product(const IntFn& f, const IntFn& g) {
    Int s = 0;
    for (uint32_t x = 0; x < f.p(); ++x) s += f.values[x] * g.values[x];
    return Rat(s, f.denom * g.denom);
}

void check_k(unsigned k, unsigned cap, const char* who) {
    if (k < 1) throw std::invalid_argument(std::string(who) + ": k must be >= 1");
    if (k > cap)
        throw std::invalid_argument(std::string(who) + ": k = " + std::to_string(k) +
                                    " exceeds the cap " + std::to_string(cap) +
                                    " (raise it explicitly if intended)");
}

IntFn kfold_add_conv(const IntFn& f, unsigned k) {
    IntFn acc = f;
    for (unsigned i = 1; i < k; ++i) acc = add_conv(acc, f);
    return acc;
}

}  // namespace

IntFn rep_fn(RepKind kind, const SetFp& a, const SetFp& b, unsigned k, ZeroPolicy zp) {
    IntFn ia = IntFn::indicator(a);
    switch (kind) {
        case RepKind::Sum:
            return add_conv(ia, IntFn::indicator(b));
        case RepKind::Diff:
            // r_{A-B}(x) = #{a - b = x} = (B . A)(x)
            return add_corr(IntFn::indicator(b), ia);
        case RepKind::Product:
            return mul_conv(ia, IntFn::indicator(b), zp);
        case RepKind::Quotient: {
            std::size_t dropped = 0;
            SetFp binv = inverse_set(b, &dropped);
            return mul_conv(ia, IntFn::indicator(binv), zp);
        }
        case RepKind::KFoldSum: {
            check_k(k, kDefaultKCap, "rep_fn");
            return kfold_add_conv(ia, k);
        }
    }
    throw std::logic_error("rep_fn: unreachable");
}

EnergyValue energy_add(const SetFp& a, const SetFp& b) {
    return sum_of_squares(add_conv(IntFn::indicator(a), IntFn::indicator(b)));
}

EnergyValue energy_mul(const SetFp& a, const SetFp& b) {
    return sum_of_squares(mul_conv(IntFn::indicator(a), IntFn::indicator(b), ZeroPolicy::Track));
}

EnergyValue energy_add(const IntFn& f, const IntFn& g) {
    return sum_of_squares(add_conv(f, g));
}

EnergyValue energy_mul(const IntFn& f, const IntFn& g) {
    return sum_of_squares(mul_conv(f, g, ZeroPolicy::Track));
}

EnergyValue energy_k(const IntFn& f, unsigned k, unsigned k_cap) {
    check_k(k, k_cap, "energy_k");
    IntFn corr = add_corr(f, f);
    Int num = 0;
    for (const Int& v : corr.values) num += int_pow(v, k);
    return Rat(num, int_pow(corr.denom, k));
}

EnergyValue energy_k(const SetFp& a, unsigned k, unsigned k_cap) {
    return energy_k(IntFn::indicator(a), k, k_cap);
}

EnergyValue tk(const IntFn& f, unsigned k, unsigned k_cap) {
    check_k(k, k_cap, "tk");
    return sum_of_squares(kfold_add_conv(f, k));
}

EnergyValue tk(const SetFp& a, unsigned k, unsigned k_cap) {
    return tk(IntFn::indicator(a), k, k_cap);
}

EnergyValue energy4(const IntFn& f1, const IntFn& f2, const IntFn& f3, const IntFn& f4) {
    return sum_pointwise_product(add_corr(f1, f3), add_corr(f2, f4));
}

namespace {

// k-fold multiplicative convolution (on F_p^*) of the difference function
// r_{alpha-beta}, plus the mass that fell onto zero products.
struct DtimesParts {
    std::vector<Int> rk;  // indexed by residue, rk[0] unused
    Int nonzero_mass;
    Int total_mass;       // (||alpha||_1 ||beta||_1)^k for integer weights
    Int denom;
};

DtimesParts dtimes_parts(const IntFn& alpha, const IntFn& beta, unsigned k) {
    const Field& f = alpha.field;
    // r(x) = #{a - b = x}, alpha-weighted a, beta-weighted b.
    IntFn diff = add_corr(beta, alpha);
    IntFn restricted = diff;
    restricted.values[0] = 0;

    IntFn acc = restricted;
    for (unsigned i = 1; i < k; ++i) acc = mul_conv(acc, restricted, ZeroPolicy::Exclude);

    DtimesParts parts;
    parts.rk.assign(f->p(), Int(0));
    parts.nonzero_mass = 0;
    for (uint32_t x = 1; x < f->p(); ++x) {
        parts.rk[x] = acc.values[x];
        parts.nonzero_mass += acc.values[x];
    }
    parts.total_mass = int_pow(diff.value_sum(), k);
    parts.denom = acc.denom;
    return parts;
}

}  // namespace

EnergyValue dtimes_k(const IntFn& alpha, const IntFn& beta, unsigned k, ZeroPolicy zp,
                     unsigned k_cap) {
    check_k(k, k_cap, "dtimes_k");
    if (alpha.denom != 1 || beta.denom != 1)
        throw std::invalid_argument("dtimes_k: integer-valued weights required");
    auto parts = dtimes_parts(alpha, beta, k);
    Int sum_sq = 0;
    for (const Int& v : parts.rk) sum_sq += v * v;
    if (zp == ZeroPolicy::Exclude) return Rat(sum_sq);
    Int zero_mass = parts.total_mass - parts.nonzero_mass;
    return Rat(sum_sq + zero_mass * zero_mass);
}

EnergyValue dtimes_k(const SetFp& a, unsigned k, ZeroPolicy zp, unsigned k_cap) {
    IntFn ia = IntFn::indicator(a);
    return dtimes_k(ia, ia, k, zp, k_cap);
}

EnergyValue dprime_k(const SetFp& a, unsigned k, unsigned k_cap) {
    check_k(k, k_cap, "dprime_k");
    IntFn raa = mul_conv(IntFn::indicator(a), IntFn::indicator(a), ZeroPolicy::Track);
    return tk(raa, k);
}

EnergyValue n_quantity(const SetFp& a, const SetFp& b, const SetFp& c) {
    IntFn rbc = rep_fn(RepKind::Diff, b, c);
    IntFn s = mul_conv(IntFn::indicator(a), rbc, ZeroPolicy::Track);
    return sum_of_squares(s);
}

EnergyValue nprime(const SetFp& a) {
    IntFn ia = IntFn::indicator(a);
    IntFn raa = mul_conv(ia, ia, ZeroPolicy::Track);
    return sum_of_squares(add_conv(raa, ia));
}

EnergyValue sigma_p(const SetFp& a, const SetFp& pset) {
    IntFn raa = rep_fn(RepKind::Diff, a, a);
    Int s = 0;
    for (uint32_t x : pset.elems) s += raa.values[x];
    return Rat(s, raa.denom);
}

BoundReport change_qg_check(const IntFn& f, const SetFp& pset, unsigned k) {
    if (pset.contains(0))
        throw std::invalid_argument("change_qg_check: P must avoid zero");
    check_k(k, kDefaultKCap, "change_qg_check");

    IntFn corr = add_corr(f, f);
    Rat lhs_base = 0;
    for (uint32_t x : pset.elems) lhs_base += rat_pow(corr.at(x), k);
    Rat lhs = rat_pow(lhs_base, 4);

    Rat l2sq = f.l2sq();
    Rat rhs = rat_pow(l2sq, 2 * k) * energy_k(f, 2 * k) * energy_add(pset, pset);

    auto row = BoundReport::assert_row("change_qg", "(f:change_QG)", lhs <= rhs);
    row.with_lhs(lhs).with_rhs(rhs);
    if (rhs > 0) row.with_ratio(to_double(lhs) / to_double(rhs));
    return row;
}

bool is_gamma_invariant(const SetFp& gamma, const IntFn& f,
                        std::pair<uint32_t, uint32_t>* witness) {
    const FieldCtx& F = *f.field;
    for (uint32_t x = 1; x < F.p(); ++x) {
        for (uint32_t g : gamma.elems) {
            uint32_t y = F.mul(x, g);
            if (f.values[x] != f.values[y]) {
                if (witness) *witness = {x, g};
                return false;
            }
        }
    }
    return true;
}

namespace {

Rat legendre_energy_exact(const Field& f, unsigned k) {
    // E^+_k(chi) for the Legendre symbol, computed from the exact
    // correlation (chi . chi).
    IntFn chi = IntFn::zero(f);
    for (uint32_t x = 1; x < f->p(); ++x) chi.values[x] = f->legendre(x);
    return energy_k(chi, k);
}

}  // namespace

GammaReport gamma_suite(const SetFp& gamma, const IntFn& f, unsigned k_max) {
    const Field& fld = f.field;
    uint32_t p = fld->p();
    GammaReport rep;
    rep.gamma = gamma;

    std::pair<uint32_t, uint32_t> witness;
    if (!is_gamma_invariant(gamma, f, &witness))
        throw std::invalid_argument("gamma_suite: f is not Gamma-invariant, witness x=" +
                                    std::to_string(witness.first) + " gamma=" +
                                    std::to_string(witness.second));
    if (f.sum() != 0) throw std::invalid_argument("gamma_suite: f must have zero mean");
    if (k_max < 1) k_max = 1;

    double logp = std::log2(static_cast<double>(p));
    Rat l1 = f.l1();
    Rat l2sq = f.l2sq();
    double l1d = to_double(l1), l2d = std::sqrt(to_double(l2sq));

    // (a) exact subgroup lower bound T_{2^k}(Gamma) >= |Gamma|^{2^{k+1}}/p.
    for (unsigned k = 1; (1u << k) <= kDefaultKCap && k <= k_max; ++k) {
        unsigned m = 1u << k;
        Rat t = tk(gamma, m);
        Rat main = Rat(int_pow(Int(gamma.size()), 2 * m), p);
        auto row =
            BoundReport::assert_row("gamma", "(f:T_k_G_intr) lower k=" + std::to_string(k),
                                    t >= main);
        row.with_lhs(t).with_main(main).with_error(Rat(t - main));
        rep.rows.push_back(row);
    }

    // (b) measured ratio of T_{2^k}(f) against the (f:T_k_G) shape, C_* = 1.
    Rat t2 = tk(f, 2);
    for (unsigned k = 2; (1u << k) <= kDefaultKCap && k <= k_max; ++k) {
        Rat lhs = tk(f, 1u << k);
        double rhs = std::pow(2.0, 3.0 * k * k) *
                     std::pow(std::pow(logp, 4.0), static_cast<double>(k - 1)) *
                     std::pow(l1d, static_cast<double>((1u << (k + 1)) - 4)) *
                     std::pow(static_cast<double>(gamma.size()), (1.0 - k) / 2.0) *
                     to_double(t2);
        BoundReport row;
        row.suite = "gamma";
        row.claim_ref = "(f:T_k_G) k=" + std::to_string(k);
        row.kind = BoundReport::Kind::Ratio;
        row.with_lhs(lhs).with_rhs(rhs);
        if (rhs > 0) row.with_ratio(to_double(lhs) / rhs);
        rep.rows.push_back(row);
    }

    // (c) max |f_hat| against the exponential-sum shape (f:exp_sums).
    {
        Spectrum sp = dft(f);
        double mx = 0;
        for (uint32_t xi = 1; xi < p; ++xi) mx = std::max(mx, std::abs(sp.coeffs[xi]));
        double delta = std::log2(static_cast<double>(gamma.size())) / logp;
        double rhs = l1d * std::pow(static_cast<double>(p),
                                    -5.0 * delta / std::pow(2.0, 7.0 + 2.0 / delta));
        BoundReport row;
        row.suite = "gamma";
        row.claim_ref = "(f:exp_sums)";
        row.kind = BoundReport::Kind::Ratio;
        row.with_lhs(mx).with_rhs(rhs);
        if (rhs > 0) row.with_ratio(mx / rhs);
        rep.rows.push_back(row);
    }

    // (d) shift-energy dichotomy of the Q-shift theorem: the constant-free
    // branch E_{2^{k+1}}(f) <= 2 ||f||_2^{2^{k+2}} is exact; otherwise the
    // measured C_* that the first branch needs is reported.
    std::optional<unsigned> premise_k;
    for (unsigned k = 2; (1u << (k + 1)) <= kDefaultKCap && k <= k_max; ++k) {
        unsigned m = 1u << (k + 1);
        Rat lhs = energy_k(f, m);
        Rat branch2 = Rat(2) * rat_pow(l2sq, 1u << (k + 1));
        bool b2 = lhs <= branch2;
        if (b2 && !premise_k) premise_k = k;
        BoundReport row;
        row.suite = "gamma";
        row.claim_ref = "t:Q_shift k=" + std::to_string(k);
        row.kind = BoundReport::Kind::Assert;
        row.verdict = true;  // dichotomy: one branch always describable
        row.with_lhs(lhs).with_rhs(branch2);
        if (b2) {
            row.with_note("branch2 exact");
        } else {
            Rat prev = energy_k(f, 1u << k);
            double denom_b1 = 32.0 * (1.0 + std::max(0.0, std::log2(l1d / l2d))) *
                              std::pow(to_double(l2sq), static_cast<double>(1u << k)) *
                              to_double(prev) *
                              std::pow(static_cast<double>(gamma.size()), -1.0 / 8.0);
            double measured_c = denom_b1 > 0 ? std::pow(to_double(lhs) / denom_b1, 4.0) : 0.0;
            row.with_note("branch1, measured C_*^{1/4} base");
            row.with_ratio(measured_c);
        }
        rep.rows.push_back(row);
    }

    // (e) sigma-moment inequality (f:E_k_sigma+) with B = Gamma, g = f,
    // behind the verified branch-2 premise; compared in integer powers.
    {
        BoundReport row;
        row.suite = "gamma";
        row.claim_ref = "(f:E_k_sigma+)";
        row.kind = BoundReport::Kind::Assert;
        if (!premise_k) {
            row.verdict = true;
            row.with_note("premise E_{2^{k+1}}(f) <= 2||f||^{2^{k+2}} unmet for k <= k_max; vacuous");
        } else {
            unsigned k = *premise_k;
            IntFn corr = add_corr(f, f);  // (f . f), used as (g . f) with g = f
            bool all_ok = true;
            Rat worst_lhs = 0, worst_rhs = 0;
            for (unsigned s = 1; s <= 2 && s <= (1u << k); ++s) {
                Rat acc = 0;
                for (uint32_t x : gamma.elems) acc += rat_pow(corr.at(x), s);
                Rat lhs_pow = rat_pow(rat_abs(acc), 1u << (k + 2));
                Rat eb = energy_add(gamma, gamma);
                Rat rhs_pow = rat_pow(Rat(gamma.size()), 1u << (k + 2)) *
                              rat_pow(l2sq, s * (1u << (k + 2))) * rat_pow(Rat(2) * eb, s) /
                              rat_pow(Rat(int_pow(Int(gamma.size()), 4)), s);
                if (lhs_pow > rhs_pow) all_ok = false;
                worst_lhs = std::max(worst_lhs, lhs_pow);
                worst_rhs = rhs_pow;
            }
            row.verdict = all_ok;
            row.with_lhs(worst_lhs).with_rhs(worst_rhs);
            row.with_note("k=" + std::to_string(k) + ", s<=2, B=Gamma, powered by 2^{k+2}");
        }
        rep.rows.push_back(row);
    }

    // (f) exact Legendre-energy identity E^+_k(chi) = (p-1)^k + (p-1)(-1)^k.
    for (unsigned k = 2; k <= std::min(k_max, 4u); ++k) {
        Rat lhs = legendre_energy_exact(fld, k);
        Int expect = int_pow(Int(p - 1), k) + Int(p - 1) * (k % 2 == 0 ? 1 : -1);
        auto row = BoundReport::assert_row(
            "gamma", "E_k(chi) identity k=" + std::to_string(k), lhs == Rat(expect));
        row.with_lhs(lhs).with_rhs(Rat(expect));
        rep.rows.push_back(row);
    }

    return rep;
}

}  // namespace sumprod
