// Command-line front end: set specs in, exact quantities and
// theorem-verification reports out, as CSV or JSON.

#include "CLI11.hpp"

#include "sumprod/decompose.hpp"
#include "sumprod/incidence.hpp"
#include "sumprod/oracle.hpp"
#include "sumprod/sl2.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

using namespace sumprod;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Output {
    std::string format = "csv";
    std::string out_path;
    bool no_timestamp = false;
    std::string config_echo;
    std::vector<BoundReport> rows;

    int emit() const {
        std::ostringstream os;
        if (format == "json") {
            os << "{\"meta\":{\"version\":\"" << kVersion << "\",\"prng\":\"" << set_rng_id()
               << "\",\"config\":\"" << config_echo << "\"";
            if (!no_timestamp) os << ",\"timestamp\":" << std::time(nullptr);
            os << "},\"rows\":[";
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (i) os << ",";
                os << report_json_row(rows[i]);
            }
            os << "]}\n";
        } else {
            os << "# sumprod " << kVersion << "\n";
            os << "# config: " << config_echo << "\n";
            os << "# prng: " << set_rng_id() << "\n";
            if (!no_timestamp) os << "# timestamp: " << std::time(nullptr) << "\n";
            os << report_csv_header() << "\n";
            for (const auto& r : rows) os << report_csv_row(r) << "\n";
        }
        if (out_path.empty()) {
            std::cout << os.str();
        } else {
            std::ofstream f(out_path);
            if (!f) {
                std::cerr << "cannot open output path " << out_path << "\n";
                return 2;
            }
            f << os.str();
        }
        return all_asserts_hold(rows) ? 0 : 1;
    }
};

BoundReport value_row(const std::string& suite, const std::string& claim, const Rat& value,
                      const Rat& main) {
    BoundReport r;
    r.suite = suite;
    r.claim_ref = claim;
    r.kind = BoundReport::Kind::Ratio;
    r.with_lhs(value).with_main(main).with_error(Rat(value - main));
    if (main != 0) r.with_ratio(to_double(value) / to_double(main));
    return r;
}

BoundReport oracle_row(const std::string& suite, bool match) {
    return BoundReport::assert_row(suite, "matches brute oracle", match);
}

SetFp load_set(const std::string& spec) { return gen_set(parse_set_spec(spec)); }

std::vector<uint32_t> parse_coeffs(const std::string& s) {
    std::vector<uint32_t> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(static_cast<uint32_t>(std::stoul(tok)));
    if (out.empty()) throw CLI::ValidationError("empty coefficient list");
    return out;
}

std::vector<SL2Elem> random_symmetric_sl2(const Field& f, std::size_t n, uint64_t seed) {
    const FieldCtx& F = *f;
    std::mt19937_64 rng(seed);
    std::vector<SL2Elem> out;
    while (out.size() < n) {
        uint32_t a = static_cast<uint32_t>(rng() % F.p());
        uint32_t b = static_cast<uint32_t>(rng() % F.p());
        uint32_t c = static_cast<uint32_t>(rng() % F.p());
        if (a == 0) continue;
        uint32_t d = F.mul(F.add(1, F.mul(b, c)), F.inv(a));
        SL2Elem g{a, b, c, d};
        out.push_back(g);
        out.push_back(sl2_inv(F, g));
    }
    return out;
}

// ---- verification suites --------------------------------------------------

std::vector<BoundReport> suite_identities(uint32_t p, uint64_t seed, int pairs) {
    auto f = make_field(p);
    std::mt19937_64 rng(seed);
    std::vector<BoundReport> rows;
    for (int i = 0; i < pairs; ++i) {
        SetSpec sa;
        sa.kind = SetSpec::Kind::Random;
        sa.p = p;
        sa.n = 2 + rng() % (p / 2);
        sa.seed = rng();
        SetFp a = gen_set(sa, f);
        IntFn g1 = (i % 2 == 0) ? IntFn::indicator(a) : IntFn::balanced(a);
        IntFn g2 = IntFn::zero(f);
        for (uint32_t x = 0; x < p; ++x)
            g2.values[x] = Int(static_cast<int64_t>(rng() % 11) - 5);
        auto batch = identity_suite(g1, g2);
        {
            SetSpec sb;
            sb.kind = SetSpec::Kind::Random;
            sb.p = p;
            sb.n = 2 + rng() % (p / 2);
            sb.seed = rng();
            SetFp b = gen_set(sb, f);
            Rat exact = energy_add(a, b);
            Spectrum fa = dft(IntFn::indicator(a)), fb = dft(IntFn::indicator(b));
            KahanSum acc;
            for (uint32_t xi = 0; xi < p; ++xi)
                acc.add(std::norm(fa.coeffs[xi]) * std::norm(fb.coeffs[xi]));
            double approx = acc.value() / static_cast<double>(p);
            double resid = std::abs(approx - to_double(exact)) / std::max(1.0, to_double(exact));
            auto row = BoundReport::assert_row("identities", "(f:energy_Fourier)", resid < 1e-6);
            row.with_lhs(exact).with_rhs(approx).with_error(resid);
            batch.push_back(row);
        }
        for (auto& r : batch) rows.push_back(r);
    }
    return rows;
}

std::vector<BoundReport> suite_oracle_small(uint64_t seed) {
    std::vector<BoundReport> rows;
    std::mt19937_64 rng(seed);
    for (uint32_t p : {7u, 11u, 31u}) {
        auto f = make_field(p);
        auto rnd = [&](std::size_t n) {
            SetSpec s;
            s.kind = SetSpec::Kind::Random;
            s.p = p;
            s.n = std::min<std::size_t>(n, p - 1);
            s.seed = rng();
            return gen_set(s, f);
        };
        SetFp a = rnd(4), b = rnd(4), c = rnd(3), d = rnd(3);
        rows.push_back(oracle_row("oracle/energy", energy_add(a, b) == Rat(oracle::energy_add(a, b))));
        rows.push_back(oracle_row("oracle/energy_k", energy_k(a, 3) == Rat(oracle::energy_k(a, 3))));
        rows.push_back(oracle_row("oracle/tk", tk(a, 2) == Rat(oracle::tk(a, 2))));
        rows.push_back(oracle_row("oracle/dtimes", dtimes_k(a, 2) == Rat(oracle::dtimes_k(a, 2))));
        rows.push_back(oracle_row("oracle/dprime", dprime_k(a, 2) == Rat(oracle::dprime_k(a, 2))));
        rows.push_back(
            oracle_row("oracle/nq", n_quantity(a, b, c) == Rat(oracle::n_quantity(a, b, c))));
        rows.push_back(oracle_row("oracle/nprime", nprime(c) == Rat(oracle::nprime(c))));
        rows.push_back(oracle_row("oracle/collinear",
                                  collinear_triples(a) == Rat(oracle::collinear_triples(a))));
        rows.push_back(oracle_row("oracle/quadruples",
                                  collinear_quadruples(a, b, c, d) ==
                                      Rat(oracle::collinear_quadruples(a, b, c, d))));
        auto q = q_function(a, b, c, d);
        rows.push_back(oracle_row("oracle/q_function",
                                  Rat(q.reconstructed_quadruples()) ==
                                      collinear_quadruples(a, b, c, d)));
        auto cf = cf_count(a, 2);
        rows.push_back(oracle_row("oracle/cf_count", cf.counts == oracle::cf_count(a, 2)));

        uint32_t lam = 1 + static_cast<uint32_t>(rng() % (p - 1));
        rows.push_back(oracle_row("oracle/inverse_diff",
                                  inverse_diff_count(a, b, lam).count ==
                                      oracle::inverse_diff_count(a, b, lam)));
        std::vector<uint32_t> px{0, 1}, px2{0, 0, 1};
        rows.push_back(oracle_row("oracle/poly_shift",
                                  poly_shift_count(a, b, px, px2).collisions ==
                                      Rat(oracle::poly_shift_collisions(a, b, px, px2))));
        {
            SetFp b3 = rnd(3);
            rows.push_back(oracle_row("oracle/gl2_image",
                                      gl2_image(a, c, d, b3, 4).image_size ==
                                          oracle::gl2_image_size(a, c, d, b3)));
        }
        {
            SetFp sb = rnd(3);
            MatrixFamily fam = family_s(sb, sb);
            IntFn i1 = IntFn::indicator(a), i2 = IntFn::indicator(b);
            rows.push_back(oracle_row("oracle/action_count",
                                      action_count(fam, i1, i2, false).sigma ==
                                          oracle::action_count(fam, i1, i2)));
        }
        {
            CSum tri = trilinear_sum(a, b, c);
            cdouble td = oracle::trilinear_sum(a, b, c);
            rows.push_back(oracle_row(
                "oracle/trilinear",
                std::abs(tri.value - td) / std::max(1.0, std::abs(td)) < 1e-6));
            CSum multi = multilinear_sum({a, b, c, d});
            cdouble md = oracle::multilinear_sum({a, b, c, d});
            rows.push_back(oracle_row(
                "oracle/multilinear",
                std::abs(multi.value - md) / std::max(1.0, std::abs(md)) < 1e-6));
        }
        {
            std::vector<Point3> pts;
            for (int i = 0; i < 15; ++i)
                pts.push_back({static_cast<uint32_t>(rng() % p),
                               static_cast<uint32_t>(rng() % p),
                               static_cast<uint32_t>(rng() % p)});
            std::vector<std::array<uint32_t, 4>> raw;
            for (int i = 0; i < 12; ++i)
                raw.push_back({static_cast<uint32_t>(rng() % p),
                               static_cast<uint32_t>(rng() % p),
                               static_cast<uint32_t>(1 + rng() % (p - 1)),
                               static_cast<uint32_t>(rng() % p)});
            PointSet3 ps = make_point_set3(f, pts);
            PlaneSet pl = make_plane_set(f, raw);
            rows.push_back(oracle_row("oracle/point_plane",
                                      point_plane_incidences(ps, pl).incidences ==
                                          oracle::point_plane_incidences(ps, pl)));
            std::vector<Line2> ls;
            for (int i = 0; i < 10; ++i)
                ls.push_back(Line2{(rng() % 5) == 0, static_cast<uint32_t>(rng() % p),
                                   static_cast<uint32_t>(rng() % p)});
            LineSet lines = make_line_set(f, ls);
            rows.push_back(oracle_row("oracle/point_line",
                                      point_line_incidences(a, b, lines).incidences ==
                                          oracle::point_line_incidences(a, b, lines)));
        }
    }
    return rows;
}

std::vector<BoundReport> suite_inequalities(uint64_t seed, int trials) {
    std::vector<BoundReport> rows;
    std::mt19937_64 rng(seed);
    bool e_cs = true, e_ho = true, t_f12 = true, e_crude = true, e_even = true, qg = true;
    for (int t = 0; t < trials; ++t) {
        auto f = make_field(31);
        SetSpec s;
        s.kind = SetSpec::Kind::Random;
        s.p = 31;
        s.n = 3 + rng() % 6;
        s.seed = rng();
        SetFp a = gen_set(s, f);
        s.seed = rng();
        SetFp b = gen_set(s, f);
        Rat e = energy_add(a, b), na(a.size()), nb(b.size());
        e_cs = e_cs && e <= na * na * nb && e <= nb * nb * na &&
               rat_pow(e, 2) <= rat_pow(na * nb, 3);
        for (unsigned k = 2; k <= 3; ++k) t_f12 = t_f12 && tk(a, k) <= na * na * tk(a, k - 1);
        for (unsigned k = 2; k <= 4; ++k)
            for (unsigned l = 1; l <= k; ++l)
                e_crude = e_crude && energy_k(a, k) <= rat_pow(na, k - l) * energy_k(a, l);
        e_even = e_even && energy_k(IntFn::balanced(a), 2) >= 0 &&
                 energy_k(IntFn::balanced(a), 4) >= 0;
        IntFn f1 = IntFn::indicator(a), f2 = IntFn::indicator(b);
        Rat lhs4 = rat_pow(energy4(f1, f2, f1, f2), 4);
        e_ho = e_ho && lhs4 <= energy_add(a, a) * energy_add(b, b) * energy_add(a, a) *
                                   energy_add(b, b);
        s.seed = rng();
        SetFp pset = gen_set(s, f);
        pset = set_difference(pset, make_set(f, {0}));
        if (pset.size()) qg = qg && change_qg_check(IntFn::balanced(a), pset, 2).verdict;
    }
    rows.push_back(BoundReport::assert_row("inequalities", "(f:E_CS)", e_cs));
    rows.push_back(BoundReport::assert_row("inequalities", "(f:E_Ho)", e_ho));
    rows.push_back(BoundReport::assert_row("inequalities", "(f:T_f_12)", t_f12));
    rows.push_back(BoundReport::assert_row("inequalities", "(f:E_k_crude)", e_crude));
    rows.push_back(BoundReport::assert_row("inequalities", "(f:E_k_Fourier) even k", e_even));
    rows.push_back(BoundReport::assert_row("inequalities", "(f:change_QG)", qg));
    return rows;
}

std::vector<BoundReport> suite_design(uint64_t seed, int trials) {
    std::vector<BoundReport> rows;
    std::mt19937_64 rng(seed);
    for (uint32_t q : {2u, 3u, 5u}) {
        std::size_t n = design_space_size(q);
        bool identity_ok = true, vinh_ok = true;
        for (int t = 0; t < trials; ++t) {
            std::vector<double> alpha(n), beta(n);
            double mean = 0;
            for (auto& v : alpha) {
                v = static_cast<double>(static_cast<int64_t>(rng() % 21) - 10);
                mean += v;
            }
            mean /= static_cast<double>(n);
            for (auto& v : alpha) v -= mean;
            for (auto& v : beta) v = static_cast<double>(static_cast<int64_t>(rng() % 21) - 10);
            auto batch = design_bound_check(q, alpha, beta);
            identity_ok = identity_ok && batch[0].verdict;
            vinh_ok = vinh_ok && batch[1].verdict;
        }
        rows.push_back(BoundReport::assert_row(
            "design", "q=" + std::to_string(q) + " matrix identity", identity_ok));
        rows.push_back(
            BoundReport::assert_row("design", "q=" + std::to_string(q) + " (f:Vinh)", vinh_ok));
    }
    return rows;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact sum-product statistics over prime fields"};
    app.set_version_flag("--version", kVersion);

    Output output;
    int threads = 1;
    if (const char* env = std::getenv("SUMPROD_THREADS")) threads = std::atoi(env);
    app.add_option("--threads", threads, "worker threads for parallel loops");
    app.add_option("--format", output.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--out", output.out_path, "output path (default stdout)");
    app.add_flag("--no-timestamp", output.no_timestamp, "omit the timestamp line");
    std::string conv_path = "auto";
    app.add_option("--conv", conv_path, "integer convolution path")
        ->check(CLI::IsMember({"auto", "naive", "ntt"}));
    app.fallthrough();
    app.require_subcommand(1);

    {
        // Echo the semantic configuration; the output path is not part of it.
        std::ostringstream echo;
        bool first = true;
        for (int i = 1; i < argc; ++i) {
            std::string arg = argv[i];
            if (arg == "--out") {
                ++i;
                continue;
            }
            echo << (first ? "" : " ") << arg;
            first = false;
        }
        output.config_echo = echo.str();
    }

    std::string set_spec, a_spec, b_spec, c_spec, d_spec, x_spec;
    std::string op = "+";
    unsigned k = 2;
    unsigned kcap = 0;  // 0 keeps the library default
    std::string zero_policy = "track";
    bool with_oracle = false;
    uint64_t seed = 1;
    uint32_t p_arg = 101;

    auto* cmd_energy = app.add_subcommand("energy", "common additive/multiplicative energy");
    cmd_energy->add_option("--op", op, "+ or x");
    cmd_energy->add_option("--a", a_spec, "set spec")->required();
    cmd_energy->add_option("--b", b_spec, "set spec (defaults to --a)");
    cmd_energy->add_flag("--oracle", with_oracle, "cross-check against the brute oracle");

    auto* cmd_tk = app.add_subcommand("tk", "k-fold sumset collision count T_k");
    cmd_tk->add_option("--set", set_spec)->required();
    cmd_tk->add_option("--k", k);
    cmd_tk->add_option("--kcap", kcap, "raise the k guard");

    auto* cmd_ek = app.add_subcommand("ek", "moment E_k of the difference function");
    cmd_ek->add_option("--set", set_spec)->required();
    cmd_ek->add_option("--k", k);
    cmd_ek->add_option("--kcap", kcap, "raise the k guard");

    auto* cmd_dtimes = app.add_subcommand("dtimes", "product-of-differences collisions D^x_k");
    cmd_dtimes->add_option("--set", set_spec)->required();
    cmd_dtimes->add_option("--k", k);
    cmd_dtimes->add_option("--kcap", kcap, "raise the k guard");
    cmd_dtimes->add_option("--zero-policy", zero_policy)
        ->check(CLI::IsMember({"track", "exclude"}));
    cmd_dtimes->add_flag("--oracle", with_oracle);

    auto* cmd_dprime = app.add_subcommand("dprime", "additive collisions of products D'_k");
    cmd_dprime->add_option("--set", set_spec)->required();
    cmd_dprime->add_option("--k", k);
    cmd_dprime->add_option("--kcap", kcap, "raise the k guard");
    cmd_dprime->add_flag("--oracle", with_oracle);

    auto* cmd_nq = app.add_subcommand("nq", "N(A,B,C) collision count of a(b-c)");
    cmd_nq->add_option("--a", a_spec)->required();
    cmd_nq->add_option("--b", b_spec);
    cmd_nq->add_option("--c", c_spec);
    cmd_nq->add_flag("--oracle", with_oracle);

    auto* cmd_np = app.add_subcommand("nprime", "collision count of a1 a2 + a3");
    cmd_np->add_option("--set", set_spec)->required();
    cmd_np->add_flag("--oracle", with_oracle);

    auto* cmd_col = app.add_subcommand("collinear", "collinear triples T(A) in A x A");
    cmd_col->add_option("--set", set_spec)->required();
    cmd_col->add_flag("--oracle", with_oracle);

    auto* cmd_quad = app.add_subcommand("quadruples", "collinear quadruples Q(A,B,C,D)");
    cmd_quad->add_option("--a", a_spec)->required();
    cmd_quad->add_option("--b", b_spec);
    cmd_quad->add_option("--c", c_spec);
    cmd_quad->add_option("--d", d_spec);
    cmd_quad->add_flag("--oracle", with_oracle);

    std::size_t npoints = 40, nplanes = 40;
    auto* cmd_inc = app.add_subcommand("incidence", "random point/plane incidence instance");
    cmd_inc->add_option("--p", p_arg);
    cmd_inc->add_option("--points", npoints);
    cmd_inc->add_option("--planes", nplanes);
    cmd_inc->add_option("--seed", seed);
    cmd_inc->add_flag("--oracle", with_oracle);

    uint32_t design_q = 3;
    int trials = 100;
    auto* cmd_design = app.add_subcommand("design", "projective design-bound check");
    cmd_design->add_option("--q", design_q);
    cmd_design->add_option("--trials", trials);
    cmd_design->add_option("--seed", seed);

    auto* cmd_exp = app.add_subcommand("expsum", "character and exponential sums");
    cmd_exp->require_subcommand(1);
    std::string xs, ys, zs, sets_joined, weights = "unit";
    auto* exp_tri = cmd_exp->add_subcommand("tri", "trilinear sum S(X,Y,Z)");
    exp_tri->add_option("--X", xs)->required();
    exp_tri->add_option("--Y", ys)->required();
    exp_tri->add_option("--Z", zs)->required();
    exp_tri->add_option("--weights", weights)->check(CLI::IsMember({"unit", "pm"}));
    exp_tri->add_option("--seed", seed);
    exp_tri->add_flag("--oracle", with_oracle);

    auto* exp_bi = cmd_exp->add_subcommand("bilinear", "bilinear-weighted sum T(X,Y,Z)");
    exp_bi->add_option("--X", xs)->required();
    exp_bi->add_option("--Y", ys)->required();
    exp_bi->add_option("--Z", zs)->required();
    exp_bi->add_option("--seed", seed);

    auto* exp_multi = cmd_exp->add_subcommand("multi", "multilinear sum over 3..5 sets");
    exp_multi->add_option("--sets", sets_joined, "semicolon-separated set specs")->required();
    exp_multi->add_flag("--oracle", with_oracle);

    std::string special_kind = "inv-shift-e", r1_str = "0,1", r2_str = "0,0,1";
    uint32_t chi_order = 2;
    double delta_arg = 0.1;
    auto* exp_special = cmd_exp->add_subcommand("special", "mixed character sums");
    exp_special->add_option("--kind", special_kind)
        ->check(CLI::IsMember({"inv-shift-e", "inv-shift-chi", "rational-e", "rational-chi"}));
    exp_special->add_option("--X", xs)->required();
    exp_special->add_option("--Y", ys)->required();
    exp_special->add_option("--B", b_spec)->required();
    exp_special->add_option("--chi-order", chi_order);
    exp_special->add_option("--r1", r1_str, "numerator coeffs (den fixed to 1)");
    exp_special->add_option("--r2", r2_str);
    exp_special->add_option("--delta", delta_arg, "flattening exponent for the report");

    std::string variant = "three-set";
    double delta_be = 1.0;
    unsigned r_be = 3;
    auto* cmd_be = app.add_subcommand("bound-exp", "explicit saving exponents");
    cmd_be->add_option("--delta", delta_be)->required();
    cmd_be->add_option("--r", r_be);
    cmd_be->add_option("--variant", variant)
        ->check(CLI::IsMember({"three-set", "four-set", "k-free"}));

    auto* cmd_sl2 = app.add_subcommand("sl2", "SL2/GL2 layer");
    cmd_sl2->require_subcommand(1);
    std::string mu_kind = "random";
    std::size_t support_n = 4;
    unsigned kmax = 6;
    auto* sl2_flat = cmd_sl2->add_subcommand("flatten", "L2-flattening profile");
    sl2_flat->add_option("--p", p_arg);
    sl2_flat->add_option("--mu", mu_kind)->check(CLI::IsMember({"haar", "identity", "random"}));
    sl2_flat->add_option("--n", support_n);
    sl2_flat->add_option("--seed", seed);
    sl2_flat->add_option("--kmax", kmax);

    std::size_t trip_n = 20;
    auto* sl2_trip = cmd_sl2->add_subcommand("tripling", "|AAA|/|A| growth");
    sl2_trip->add_option("--p", p_arg);
    sl2_trip->add_option("--n", trip_n);
    sl2_trip->add_option("--seed", seed);

    auto* sl2_cf = cmd_sl2->add_subcommand("cf", "continued fraction value counts");
    sl2_cf->add_option("--set", set_spec)->required();
    sl2_cf->add_option("--k", k);
    sl2_cf->add_flag("--oracle", with_oracle);

    std::string fam_kind = "s";
    auto* sl2_count = cmd_sl2->add_subcommand("count", "action counting lemma");
    sl2_count->add_option("--kind", fam_kind)->check(CLI::IsMember({"s", "sprime", "srational"}));
    sl2_count->add_option("--b1", b_spec)->required();
    sl2_count->add_option("--b2", c_spec);
    sl2_count->add_option("--r1", r1_str);
    sl2_count->add_option("--r2", r2_str);
    sl2_count->add_option("--f1", a_spec)->required();
    sl2_count->add_option("--f2", d_spec);
    sl2_count->add_flag("--oracle", with_oracle);

    auto* sl2_escape = cmd_sl2->add_subcommand("escape", "coset escape bounds");
    sl2_escape->add_option("--kind", fam_kind)
        ->check(CLI::IsMember({"s", "sprime", "srational", "gl2"}));
    sl2_escape->add_option("--b1", b_spec)->required();
    sl2_escape->add_option("--b2", c_spec);
    sl2_escape->add_option("--b3", d_spec);
    sl2_escape->add_option("--r1", r1_str);
    sl2_escape->add_option("--r2", r2_str);
    sl2_escape->add_option("--trials", trials);
    sl2_escape->add_option("--seed", seed);

    std::string frob_mode = "inequality";
    auto* sl2_frob = cmd_sl2->add_subcommand("frobenius", "Frobenius spectral bound");
    sl2_frob->add_option("--p", p_arg);
    sl2_frob->add_option("--trials", trials);
    sl2_frob->add_option("--seed", seed);
    sl2_frob->add_option("--mode", frob_mode)
        ->check(CLI::IsMember({"inequality", "power-iteration"}));

    auto* cmd_inv = app.add_subcommand("inverse-diff", "count of 1/a1 - 1/a2 = lambda");
    uint32_t lambda = 1;
    cmd_inv->add_option("--a1", a_spec)->required();
    cmd_inv->add_option("--a2", b_spec)->required();
    cmd_inv->add_option("--lambda", lambda);
    cmd_inv->add_option("--B", c_spec, "doubling witness set");
    cmd_inv->add_flag("--oracle", with_oracle);

    auto* cmd_ps = app.add_subcommand("poly-shift", "collisions of p1(b) + 1/(a+p2(b))");
    cmd_ps->add_option("--a", a_spec)->required();
    cmd_ps->add_option("--b", b_spec)->required();
    cmd_ps->add_option("--p1", r1_str);
    cmd_ps->add_option("--p2", r2_str);
    cmd_ps->add_flag("--oracle", with_oracle);

    auto* cmd_gl2 = app.add_subcommand("gl2-image", "image of (a+b1)/(a b2 + b3)");
    cmd_gl2->add_option("--a", a_spec)->required();
    cmd_gl2->add_option("--b1", b_spec)->required();
    cmd_gl2->add_option("--b2", c_spec)->required();
    cmd_gl2->add_option("--b3", d_spec)->required();
    cmd_gl2->add_flag("--oracle", with_oracle);

    auto* cmd_dec = app.add_subcommand("decompose", "asymptotic sum-product decomposition");
    std::string m_str = "4";
    cmd_dec->add_option("--set", set_spec)->required();
    cmd_dec->add_option("--M", m_str);
    cmd_dec->add_option("--x", x_spec, "test set X (defaults to A)");

    auto* cmd_verify = app.add_subcommand("verify", "verification suites");
    std::string which = "all";
    bool small = false;
    uint32_t gamma_t = 0;
    cmd_verify->add_option("suite", which, "identities|oracle|inequalities|design|gamma|all");
    cmd_verify->add_option("--p", p_arg);
    cmd_verify->add_option("--t", gamma_t, "subgroup order for the gamma suite");
    cmd_verify->add_option("--seed", seed);
    cmd_verify->add_option("--trials", trials);
    cmd_verify->add_flag("--small", small);

    CLI11_PARSE(app, argc, argv);
    set_threads(threads);
    if (conv_path == "naive") set_default_conv_path(ConvPath::Naive);
    if (conv_path == "ntt") set_default_conv_path(ConvPath::Ntt);

    try {
        if (*cmd_energy) {
            SetFp a = load_set(a_spec);
            SetFp b = b_spec.empty() ? a : load_set(b_spec);
            bool mul = (op == "x" || op == "*");
            Rat v = mul ? energy_mul(a, b) : energy_add(a, b);
            Rat main = Rat(int_pow(Int(a.size()), 2) * int_pow(Int(b.size()), 2), a.field->p());
            output.rows.push_back(value_row("energy", mul ? "E^x(A,B)" : "E^+(A,B)", v, main));
            if (with_oracle)
                output.rows.push_back(oracle_row(
                    "energy",
                    v == Rat(mul ? oracle::energy_mul(a, b) : oracle::energy_add(a, b))));
        } else if (*cmd_tk) {
            SetFp a = load_set(set_spec);
            Rat v = tk(a, k, kcap ? kcap : kDefaultKCap);
            Rat main = Rat(int_pow(Int(a.size()), 2 * k), a.field->p());
            output.rows.push_back(value_row("tk", "T_k(A) k=" + std::to_string(k), v, main));
        } else if (*cmd_ek) {
            SetFp a = load_set(set_spec);
            Rat v = energy_k(a, k, kcap ? kcap : kDefaultKCap);
            Rat main = Rat(int_pow(Int(a.size()), 2 * k), int_pow(Int(a.field->p()), k - 1));
            output.rows.push_back(value_row("ek", "E_k(A) k=" + std::to_string(k), v, main));
        } else if (*cmd_dtimes) {
            SetFp a = load_set(set_spec);
            ZeroPolicy zp = zero_policy == "exclude" ? ZeroPolicy::Exclude : ZeroPolicy::Track;
            Rat v = dtimes_k(a, k, zp, kcap ? kcap : kDefaultDtimesKCap);
            Rat main = Rat(int_pow(Int(a.size()), 4 * k), a.field->p());
            output.rows.push_back(value_row("dtimes", "D^x_k(A) k=" + std::to_string(k), v, main));
            if (with_oracle && zp == ZeroPolicy::Track)
                output.rows.push_back(oracle_row("dtimes", v == Rat(oracle::dtimes_k(a, k))));
        } else if (*cmd_dprime) {
            SetFp a = load_set(set_spec);
            Rat v = dprime_k(a, k, kcap ? kcap : kDefaultKCap);
            Rat main = Rat(int_pow(Int(a.size()), 4 * k), a.field->p());
            output.rows.push_back(value_row("dprime", "D'_k(A) k=" + std::to_string(k), v, main));
            if (with_oracle)
                output.rows.push_back(oracle_row("dprime", v == Rat(oracle::dprime_k(a, k))));
        } else if (*cmd_nq) {
            SetFp a = load_set(a_spec);
            SetFp b = b_spec.empty() ? a : load_set(b_spec);
            SetFp c = c_spec.empty() ? a : load_set(c_spec);
            Rat v = n_quantity(a, b, c);
            Rat main = Rat(int_pow(Int(a.size()), 2) * int_pow(Int(b.size()), 2) *
                               int_pow(Int(c.size()), 2),
                           a.field->p());
            output.rows.push_back(value_row("nq", "N(A,B,C)", v, main));
            if (with_oracle)
                output.rows.push_back(oracle_row("nq", v == Rat(oracle::n_quantity(a, b, c))));
        } else if (*cmd_np) {
            SetFp a = load_set(set_spec);
            Rat v = nprime(a);
            Rat main = Rat(int_pow(Int(a.size()), 6), a.field->p());
            output.rows.push_back(value_row("nprime", "N'(A)", v, main));
            if (with_oracle)
                output.rows.push_back(oracle_row("nprime", v == Rat(oracle::nprime(a))));
        } else if (*cmd_col) {
            SetFp a = load_set(set_spec);
            Rat v = collinear_triples(a);
            Rat main = Rat(int_pow(Int(a.size()), 6), a.field->p());
            output.rows.push_back(value_row("collinear", "T(A)", v, main));
            output.rows.push_back(
                BoundReport::assert_row("collinear", "t:Q_new 0 <= T(A) - |A|^6/p", v >= main));
            if (with_oracle)
                output.rows.push_back(
                    oracle_row("collinear", v == Rat(oracle::collinear_triples(a))));
        } else if (*cmd_quad) {
            SetFp a = load_set(a_spec);
            SetFp b = b_spec.empty() ? a : load_set(b_spec);
            SetFp c = c_spec.empty() ? a : load_set(c_spec);
            SetFp d = d_spec.empty() ? a : load_set(d_spec);
            Rat v = collinear_quadruples(a, b, c, d);
            Rat main =
                Rat(int_pow(Int(a.size()) * Int(b.size()) * Int(c.size()) * Int(d.size()), 2),
                    Int(a.field->p()) * Int(a.field->p()));
            output.rows.push_back(value_row("quadruples", "Q(A,B,C,D)", v, main));
            if (with_oracle)
                output.rows.push_back(oracle_row(
                    "quadruples", v == Rat(oracle::collinear_quadruples(a, b, c, d))));
        } else if (*cmd_inc) {
            auto f = make_field(p_arg);
            std::mt19937_64 rng(seed);
            std::vector<Point3> pts;
            for (std::size_t i = 0; i < npoints; ++i)
                pts.push_back({static_cast<uint32_t>(rng() % p_arg),
                               static_cast<uint32_t>(rng() % p_arg),
                               static_cast<uint32_t>(rng() % p_arg)});
            std::vector<std::array<uint32_t, 4>> raw;
            for (std::size_t i = 0; i < nplanes; ++i) {
                uint32_t u = static_cast<uint32_t>(rng() % p_arg);
                uint32_t v = static_cast<uint32_t>(rng() % p_arg);
                uint32_t w = static_cast<uint32_t>(1 + rng() % (p_arg - 1));
                raw.push_back({u, v, w, static_cast<uint32_t>(rng() % p_arg)});
            }
            PointSet3 ps = make_point_set3(f, pts);
            PlaneSet pl = make_plane_set(f, raw);
            auto res = point_plane_incidences(ps, pl);
            output.rows.push_back(res.report);
            if (with_oracle)
                output.rows.push_back(oracle_row(
                    "incidence", res.incidences == oracle::point_plane_incidences(ps, pl)));
        } else if (*cmd_design) {
            output.rows = suite_design(seed, trials);
            if (design_q != 2 && design_q != 3 && design_q != 5) {
                std::size_t n = design_space_size(design_q);
                std::mt19937_64 rng(seed);
                std::vector<double> alpha(n), beta(n);
                double mean = 0;
                for (auto& v : alpha) {
                    v = static_cast<double>(static_cast<int64_t>(rng() % 21) - 10);
                    mean += v;
                }
                mean /= static_cast<double>(n);
                for (auto& v : alpha) v -= mean;
                for (auto& v : beta)
                    v = static_cast<double>(static_cast<int64_t>(rng() % 21) - 10);
                for (auto& r : design_bound_check(design_q, alpha, beta))
                    output.rows.push_back(r);
            }
        } else if (*exp_tri) {
            SetFp X = load_set(xs), Y = load_set(ys), Z = load_set(zs);
            std::vector<cdouble> wa, wb, wc;
            if (weights == "pm") {
                std::mt19937_64 rng(seed);
                auto pm = [&](std::size_t n) {
                    std::vector<cdouble> w(n);
                    for (auto& v : w) v = (rng() & 1) ? cdouble(1, 0) : cdouble(-1, 0);
                    return w;
                };
                wa = pm(X.size());
                wb = pm(Y.size());
                wc = pm(Z.size());
            }
            CSum s = trilinear_sum(X, Y, Z, wa, wb, wc);
            BoundReport row;
            row.suite = "expsum";
            row.claim_ref = "S(X,Y,Z)";
            row.kind = BoundReport::Kind::Ratio;
            row.with_lhs(std::abs(s.value)).with_rhs(s.abs_bound());
            row.with_ratio(std::abs(s.value) / std::max(1.0, s.abs_bound()));
            row.with_note("value=" + flt_str(s.value.real()) + (s.value.imag() < 0 ? "-" : "+") +
                          flt_str(std::abs(s.value.imag())) + "i");
            output.rows.push_back(row);
            if (with_oracle) {
                cdouble d = oracle::trilinear_sum(X, Y, Z, wa, wb, wc);
                output.rows.push_back(oracle_row(
                    "expsum", std::abs(s.value - d) / std::max(1.0, std::abs(d)) < 1e-6));
            }
        } else if (*exp_bi) {
            SetFp X = load_set(xs), Y = load_set(ys), Z = load_set(zs);
            auto f = X.field;
            std::mt19937_64 rng(seed);
            BilinearWeights rho = unit_bilinear(f), sig = unit_bilinear(f), tau = unit_bilinear(f);
            for (auto& w : rho.w) w = (rng() & 1) ? cdouble(1, 0) : cdouble(-1, 0);
            for (auto& w : sig.w) w = (rng() & 1) ? cdouble(1, 0) : cdouble(-1, 0);
            for (auto& w : tau.w) w = (rng() & 1) ? cdouble(1, 0) : cdouble(-1, 0);
            CSum s = trilinear_bilinear_sum(X, Y, Z, rho, sig, tau);
            BoundReport row;
            row.suite = "expsum";
            row.claim_ref = "T(X,Y,Z)";
            row.kind = BoundReport::Kind::Ratio;
            row.with_lhs(std::abs(s.value)).with_rhs(s.abs_bound());
            row.with_ratio(std::abs(s.value) / std::max(1.0, s.abs_bound()));
            output.rows.push_back(row);
        } else if (*exp_multi) {
            std::vector<SetFp> sets;
            std::stringstream ss(sets_joined);
            std::string tok;
            while (std::getline(ss, tok, ';'))
                if (!tok.empty()) sets.push_back(load_set(tok));
            CSum s = multilinear_sum(sets);
            BoundReport row;
            row.suite = "expsum";
            row.claim_ref = "multilinear r=" + std::to_string(sets.size());
            row.kind = BoundReport::Kind::Ratio;
            row.with_lhs(std::abs(s.value)).with_rhs(s.abs_bound());
            row.with_ratio(std::abs(s.value) / std::max(1.0, s.abs_bound()));
            output.rows.push_back(row);
            if (with_oracle) {
                cdouble d = oracle::multilinear_sum(sets);
                output.rows.push_back(oracle_row(
                    "expsum", std::abs(s.value - d) / std::max(1.0, std::abs(d)) < 1e-6));
            }
        } else if (*exp_special) {
            SetFp X = load_set(xs), Y = load_set(ys), B = load_set(b_spec);
            IntFn f = IntFn::indicator(X), g = IntFn::indicator(Y);
            SpecialSumKind kind = SpecialSumKind::InvShiftE;
            if (special_kind == "inv-shift-chi") kind = SpecialSumKind::InvShiftChi;
            if (special_kind == "rational-e") kind = SpecialSumKind::RationalE;
            if (special_kind == "rational-chi") kind = SpecialSumKind::RationalChi;
            CharTable chi;
            const CharTable* chip = nullptr;
            if (kind == SpecialSumKind::InvShiftChi || kind == SpecialSumKind::RationalChi) {
                chi = mul_char(X.field, chi_order);
                chip = &chi;
            }
            PolyFrac r1{parse_coeffs(r1_str), {}}, r2{parse_coeffs(r2_str), {}};
            auto res = special_sum(kind, f, g, B, chip, &r1, &r2, delta_arg);
            output.rows.push_back(res.report);
        } else if (*cmd_be) {
            ExponentVariant v = ExponentVariant::ThreeSet;
            if (variant == "four-set") v = ExponentVariant::FourSet;
            if (variant == "k-free") v = ExponentVariant::KFree;
            auto spec = bound_exponent(delta_be, r_be, v);
            BoundReport row;
            row.suite = "bound-exp";
            row.claim_ref = variant;
            row.kind = BoundReport::Kind::Ratio;
            row.with_lhs(spec.exponent);
            row.with_note("delta=" + flt_str(spec.delta) + ", r=" + std::to_string(spec.r) +
                          ", k=" + std::to_string(spec.k));
            output.rows.push_back(row);
        } else if (*sl2_flat) {
            auto f = make_field(p_arg);
            GroupFn mu;
            if (mu_kind == "haar") mu = GroupFn::haar(f);
            else if (mu_kind == "identity") mu = GroupFn::delta(f, sl2_identity());
            else mu = GroupFn::uniform_on(f, random_symmetric_sl2(f, support_n, seed));
            auto profile = flatten_profile(mu, kmax);
            for (unsigned i = 0; i < profile.size(); ++i) {
                BoundReport row = BoundReport::assert_row(
                    "flatten", "e_" + std::to_string(i) + " >= 0, monotone", true);
                row.with_lhs(profile[i]);
                if (i) row.verdict = profile[i] <= profile[i - 1] && profile[i] >= 0;
                output.rows.push_back(row);
            }
            auto depth = flattening_depth(profile, f);
            BoundReport row;
            row.suite = "flatten";
            row.claim_ref = "flattening depth";
            row.kind = BoundReport::Kind::Ratio;
            row.with_note(depth ? "k=" + std::to_string(*depth) : "not reached");
            output.rows.push_back(row);
        } else if (*sl2_trip) {
            auto f = make_field(p_arg);
            auto res = tripling(f, random_symmetric_sl2(f, trip_n, seed));
            BoundReport row;
            row.suite = "tripling";
            row.claim_ref = "t:Harald_SL2 measured exponent";
            row.kind = BoundReport::Kind::Ratio;
            row.with_lhs(Rat(res.n_aaa)).with_rhs(Rat(res.n_a)).with_ratio(res.exponent);
            row.with_note("|AA|=" + std::to_string(res.n_aa));
            output.rows.push_back(row);
        } else if (*sl2_cf) {
            SetFp a = load_set(set_spec);
            auto res = cf_count(a, k);
            output.rows.push_back(res.report);
            if (with_oracle)
                output.rows.push_back(oracle_row("cf", res.counts == oracle::cf_count(a, k)));
        } else if (*sl2_count) {
            SetFp b1 = load_set(b_spec);
            MatrixFamily fam;
            if (fam_kind == "sprime") fam = family_sprime(b1);
            else if (fam_kind == "srational")
                fam = family_srational(PolyFrac{parse_coeffs(r1_str), {}},
                                       PolyFrac{parse_coeffs(r2_str), {}}, b1);
            else fam = family_s(b1, c_spec.empty() ? b1 : load_set(c_spec));
            SetFp f1 = load_set(a_spec);
            SetFp f2 = d_spec.empty() ? f1 : load_set(d_spec);
            auto res = action_count(fam, IntFn::indicator(f1), IntFn::indicator(f2));
            output.rows.push_back(res.report);
            if (with_oracle)
                output.rows.push_back(
                    oracle_row("action", res.sigma == oracle::action_count(
                                             fam, IntFn::indicator(f1), IntFn::indicator(f2))));
        } else if (*sl2_escape) {
            SetFp b1 = load_set(b_spec);
            MatrixFamily fam;
            if (fam_kind == "sprime") fam = family_sprime(b1);
            else if (fam_kind == "srational")
                fam = family_srational(PolyFrac{parse_coeffs(r1_str), {}},
                                       PolyFrac{parse_coeffs(r2_str), {}}, b1);
            else if (fam_kind == "gl2")
                fam = family_gl2(b1, load_set(c_spec), load_set(d_spec));
            else fam = family_s(b1, c_spec.empty() ? b1 : load_set(c_spec));
            auto res = coset_escape(fam, static_cast<std::size_t>(trials), seed);
            output.rows = res.rows;
        } else if (*sl2_frob) {
            auto f = make_field(p_arg);
            std::mt19937_64 rng(seed);
            const SL2Enum& en = enumerate_sl2(f);
            bool all_ok = true;
            for (int t = 0; t < trials; ++t) {
                SetSpec s;
                s.kind = SetSpec::Kind::Random;
                s.p = p_arg;
                s.n = 1 + rng() % (p_arg - 1);
                s.seed = rng();
                IntFn fb = IntFn::balanced(gen_set(s, f));
                GroupFn Fw;
                Fw.field = f;
                Fw.den = 1;
                for (int i = 0; i < 8; ++i)
                    Fw.add_weight(en.elems[rng() % en.size()],
                                  Int(static_cast<int64_t>(rng() % 7) - 3));
                IntFn phi = IntFn::zero(f);
                for (uint32_t x = 0; x < p_arg; ++x)
                    phi.values[x] = Int(static_cast<int64_t>(rng() % 9) - 4);
                auto mode = frob_mode == "power-iteration" ? FrobeniusMode::PowerIteration
                                                           : FrobeniusMode::Inequality;
                auto res = frobenius_check(Fw, fb, phi, mode);
                for (const auto& row : res.rows) all_ok = all_ok && row.verdict;
            }
            output.rows.push_back(BoundReport::assert_row(
                "frobenius", "(f:Frobenious) over " + std::to_string(trials) + " trials",
                all_ok));
        } else if (*cmd_inv) {
            SetFp a1 = load_set(a_spec), a2 = load_set(b_spec);
            SetFp bw = c_spec.empty() ? a2 : load_set(c_spec);
            auto res = inverse_diff_count(a1, a2, lambda, &bw);
            output.rows = res.rows;
            if (with_oracle)
                output.rows.push_back(oracle_row(
                    "inverse-diff", res.count == oracle::inverse_diff_count(a1, a2, lambda)));
        } else if (*cmd_ps) {
            SetFp a = load_set(a_spec), b = load_set(b_spec);
            auto res = poly_shift_count(a, b, parse_coeffs(r1_str), parse_coeffs(r2_str));
            output.rows.push_back(res.report);
            if (with_oracle)
                output.rows.push_back(oracle_row(
                    "poly-shift", res.collisions == Rat(oracle::poly_shift_collisions(
                                      a, b, parse_coeffs(r1_str), parse_coeffs(r2_str)))));
        } else if (*cmd_gl2) {
            SetFp a = load_set(a_spec);
            auto res = gl2_image(a, load_set(b_spec), load_set(c_spec), load_set(d_spec));
            output.rows = res.rows;
            if (with_oracle)
                output.rows.push_back(oracle_row(
                    "gl2-image", res.image_size == oracle::gl2_image_size(
                                     a, load_set(b_spec), load_set(c_spec), load_set(d_spec))));
        } else if (*cmd_dec) {
            SetFp a = load_set(set_spec);
            Rat m(m_str);
            auto cert = bw_decompose(a, m);
            SetFp x = x_spec.empty() ? a : load_set(x_spec);
            output.rows = verify_bw(cert, x);
            BoundReport iters;
            iters.suite = "decompose";
            iters.claim_ref = "iterations";
            iters.kind = BoundReport::Kind::Assert;
            iters.verdict = cert.steps.size() <= a.size();
            iters.with_lhs(Rat(cert.steps.size())).with_rhs(Rat(a.size()));
            iters.with_note("|B|=" + std::to_string(cert.b_final.size()) +
                            ", |C|=" + std::to_string(cert.c_final.size()));
            output.rows.push_back(iters);
        } else if (*cmd_verify) {
            if (which == "identities") {
                output.rows = suite_identities(p_arg, seed, small ? 3 : 10);
            } else if (which == "oracle") {
                output.rows = suite_oracle_small(seed);
            } else if (which == "inequalities") {
                output.rows = suite_inequalities(seed, small ? 10 : trials);
            } else if (which == "design") {
                output.rows = suite_design(seed, small ? 10 : trials);
            } else if (which == "gamma") {
                auto f = make_field(p_arg);
                uint32_t t = gamma_t;
                if (t == 0) {  // largest proper divisor of p-1 up to 24
                    for (uint32_t cand = 2; cand <= 24; ++cand)
                        if ((p_arg - 1) % cand == 0) t = cand;
                }
                SetFp gamma = subgroup(f, t);
                std::mt19937_64 rng(seed);
                // Gamma-invariant zero-mean input: balanced union of cosets.
                SetFp q = gamma;
                uint32_t reps = 1 + static_cast<uint32_t>(rng() % 3);
                for (uint32_t i = 0; i < reps; ++i)
                    q = set_union(q, dilate_set(gamma, 1 + static_cast<uint32_t>(rng() % (p_arg - 1))));
                output.rows = gamma_suite(gamma, IntFn::balanced(q), 3).rows;
            } else if (which == "all") {
                for (auto& r : suite_identities(small ? 101 : p_arg, seed, small ? 2 : 10))
                    output.rows.push_back(r);
                for (auto& r : suite_oracle_small(seed)) output.rows.push_back(r);
                for (auto& r : suite_inequalities(seed, small ? 10 : trials))
                    output.rows.push_back(r);
                for (auto& r : suite_design(seed, small ? 10 : trials)) output.rows.push_back(r);
            } else {
                std::cerr << "unknown suite '" << which << "'\n";
                return 2;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    return output.emit();
}
