#include "sumprod/fpcore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace sumprod {

namespace {

constexpr uint32_t kMaxP = 1u << 20;

bool is_prime_u32(uint32_t n) {
    if (n < 2) return false;
    for (uint32_t d = 2; static_cast<uint64_t>(d) * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

std::vector<uint32_t> prime_factors(uint32_t n) {
    std::vector<uint32_t> fs;
    for (uint32_t d = 2; static_cast<uint64_t>(d) * d <= n; ++d) {
        if (n % d == 0) {
            fs.push_back(d);
            while (n % d == 0) n /= d;
        }
    }
    if (n > 1) fs.push_back(n);
    return fs;
}

uint32_t pow_mod(uint32_t a, uint64_t e, uint32_t p) {
    uint64_t r = 1, base = a % p;
    while (e) {
        if (e & 1u) r = r * base % p;
        base = base * base % p;
        e >>= 1u;
    }
    return static_cast<uint32_t>(r);
}

}  // namespace

FieldCtx::FieldCtx(uint32_t p) : p_(p) {
    if (p < 3 || p % 2 == 0 || !is_prime_u32(p))
        throw std::invalid_argument("make_field: " + std::to_string(p) + " is not an odd prime");
    if (p > kMaxP)
        throw std::invalid_argument("make_field: p exceeds the 2^20 cap");

    order_factors_ = prime_factors(p - 1);
    for (uint32_t cand = 2;; ++cand) {
        bool primitive = true;
        for (uint32_t q : order_factors_) {
            if (pow_mod(cand, (p - 1) / q, p) == 1) {
                primitive = false;
                break;
            }
        }
        if (primitive) {
            g_ = cand;
            break;
        }
    }

    exp_.resize(p - 1);
    dlog_.assign(p, 0);
    uint32_t x = 1;
    for (uint32_t k = 0; k < p - 1; ++k) {
        exp_[k] = x;
        dlog_[x] = k;
        x = static_cast<uint32_t>(static_cast<uint64_t>(x) * g_ % p);
    }
}

uint32_t FieldCtx::pow(uint32_t a, uint64_t e) const { return pow_mod(a, e, p_); }

uint32_t FieldCtx::inv(uint32_t a) const {
    if (a == 0) throw std::invalid_argument("FieldCtx::inv of zero");
    uint32_t k = dlog_[a];
    return k == 0 ? 1 : exp_[p_ - 1 - k];
}

Field make_field(uint32_t p) { return std::make_shared<const FieldCtx>(p); }

bool SetFp::contains(uint32_t x) const {
    return std::binary_search(elems.begin(), elems.end(), x);
}

std::vector<uint8_t> SetFp::bitmap() const {
    std::vector<uint8_t> bm(field->p(), 0);
    for (uint32_t e : elems) bm[e] = 1;
    return bm;
}

SetFp make_set(const Field& f, std::vector<uint32_t> residues) {
    for (uint32_t& r : residues) r %= f->p();
    std::sort(residues.begin(), residues.end());
    residues.erase(std::unique(residues.begin(), residues.end()), residues.end());
    return SetFp{f, std::move(residues)};
}

SetFp subgroup(const Field& f, uint32_t t) {
    uint32_t n = f->p() - 1;
    if (t == 0 || n % t != 0)
        throw std::invalid_argument("subgroup: order " + std::to_string(t) +
                                    " does not divide p-1 = " + std::to_string(n));
    uint32_t step = n / t;
    std::vector<uint32_t> elems;
    elems.reserve(t);
    for (uint32_t k = 0; k < t; ++k) elems.push_back(f->exp(static_cast<uint32_t>(
        (static_cast<uint64_t>(step) * k) % n)));
    return make_set(f, std::move(elems));
}

SetFp sumset(const SetFp& a, const SetFp& b) {
    std::vector<uint8_t> seen(a.field->p(), 0);
    for (uint32_t x : a.elems)
        for (uint32_t y : b.elems) seen[a.field->add(x, y)] = 1;
    std::vector<uint32_t> out;
    for (uint32_t v = 0; v < seen.size(); ++v)
        if (seen[v]) out.push_back(v);
    return SetFp{a.field, std::move(out)};
}

SetFp product_set(const SetFp& a, const SetFp& b) {
    std::vector<uint8_t> seen(a.field->p(), 0);
    for (uint32_t x : a.elems)
        for (uint32_t y : b.elems) seen[a.field->mul(x, y)] = 1;
    std::vector<uint32_t> out;
    for (uint32_t v = 0; v < seen.size(); ++v)
        if (seen[v]) out.push_back(v);
    return SetFp{a.field, std::move(out)};
}

SetFp intersect(const SetFp& a, const SetFp& b) {
    std::vector<uint32_t> out;
    std::set_intersection(a.elems.begin(), a.elems.end(), b.elems.begin(), b.elems.end(),
                          std::back_inserter(out));
    return SetFp{a.field, std::move(out)};
}

SetFp set_union(const SetFp& a, const SetFp& b) {
    std::vector<uint32_t> out;
    std::set_union(a.elems.begin(), a.elems.end(), b.elems.begin(), b.elems.end(),
                   std::back_inserter(out));
    return SetFp{a.field, std::move(out)};
}

SetFp set_difference(const SetFp& a, const SetFp& b) {
    std::vector<uint32_t> out;
    std::set_difference(a.elems.begin(), a.elems.end(), b.elems.begin(), b.elems.end(),
                        std::back_inserter(out));
    return SetFp{a.field, std::move(out)};
}

SetFp inverse_set(const SetFp& a, std::size_t* dropped_zeros) {
    std::vector<uint32_t> out;
    std::size_t dropped = 0;
    for (uint32_t x : a.elems) {
        if (x == 0) {
            ++dropped;
            continue;
        }
        out.push_back(a.field->inv(x));
    }
    if (dropped_zeros) *dropped_zeros = dropped;
    return make_set(a.field, std::move(out));
}

SetFp negate_set(const SetFp& a) {
    std::vector<uint32_t> out;
    for (uint32_t x : a.elems) out.push_back(a.field->neg(x));
    return make_set(a.field, std::move(out));
}

SetFp shift_set(const SetFp& a, uint32_t s) {
    std::vector<uint32_t> out;
    for (uint32_t x : a.elems) out.push_back(a.field->add(x, s % a.field->p()));
    return make_set(a.field, std::move(out));
}

SetFp dilate_set(const SetFp& a, uint32_t m) {
    std::vector<uint32_t> out;
    for (uint32_t x : a.elems) out.push_back(a.field->mul(x, m % a.field->p()));
    return make_set(a.field, std::move(out));
}

namespace {

uint64_t parse_u64(const std::string& s) {
    size_t pos = 0;
    uint64_t v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("set spec: bad number '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    int brace = 0;
    for (char c : s) {
        if (c == '{') ++brace;
        if (c == '}') --brace;
        if (c == sep && brace == 0) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

}  // namespace

SetSpec parse_set_spec(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("set spec: missing kind prefix in '" + text + "'");
    std::string kind = text.substr(0, colon);
    std::string rest = text.substr(colon + 1);

    SetSpec spec;
    if (kind == "random") spec.kind = SetSpec::Kind::Random;
    else if (kind == "full") spec.kind = SetSpec::Kind::Full;
    else if (kind == "interval") spec.kind = SetSpec::Kind::Interval;
    else if (kind == "subgroup") spec.kind = SetSpec::Kind::Subgroup;
    else if (kind == "shifted-subgroup") spec.kind = SetSpec::Kind::ShiftedSubgroup;
    else if (kind == "explicit") spec.kind = SetSpec::Kind::Explicit;
    else if (kind == "file") spec.kind = SetSpec::Kind::File;
    else throw std::invalid_argument("set spec: unknown kind '" + kind + "'");

    for (const std::string& part : split(rest, ',')) {
        if (part.empty()) continue;
        if (part.front() == '{') {
            if (part.back() != '}') throw std::invalid_argument("set spec: unbalanced braces");
            std::string inner = part.substr(1, part.size() - 2);
            for (const std::string& e : split(inner, ','))
                if (!e.empty()) spec.explicit_elems.push_back(static_cast<uint32_t>(parse_u64(e)));
            continue;
        }
        auto eq = part.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("set spec: expected key=value, got '" + part + "'");
        std::string key = part.substr(0, eq), val = part.substr(eq + 1);
        if (key == "p") spec.p = static_cast<uint32_t>(parse_u64(val));
        else if (key == "n") spec.n = static_cast<std::size_t>(parse_u64(val));
        else if (key == "seed") spec.seed = parse_u64(val);
        else if (key == "lo") spec.lo = static_cast<uint32_t>(parse_u64(val));
        else if (key == "hi") spec.hi = static_cast<uint32_t>(parse_u64(val));
        else if (key == "t") spec.t = static_cast<uint32_t>(parse_u64(val));
        else if (key == "shift") spec.shift = static_cast<uint32_t>(parse_u64(val));
        else if (key == "path") spec.path = val;
        else throw std::invalid_argument("set spec: unknown key '" + key + "'");
    }
    if (spec.p == 0) throw std::invalid_argument("set spec: p is required");
    return spec;
}

const char* set_rng_id() { return "mt19937_64/reject-mod"; }

SetFp gen_set(const SetSpec& spec) { return gen_set(spec, make_field(spec.p)); }

SetFp gen_set(const SetSpec& spec, const Field& f) {
    if (f->p() != spec.p) throw std::invalid_argument("gen_set: field/spec p mismatch");
    switch (spec.kind) {
        case SetSpec::Kind::Random: {
            if (spec.n > spec.p)
                throw std::invalid_argument("gen_set: size exceeds p");
            // mt19937_64 output sequence is standard-fixed; sampling uses
            // plain modulo rejection into a membership table, so the result
            // is byte-identical across platforms and thread counts.
            std::mt19937_64 rng(spec.seed);
            std::vector<uint8_t> taken(spec.p, 0);
            std::size_t picked = 0;
            while (picked < spec.n) {
                uint32_t v = static_cast<uint32_t>(rng() % spec.p);
                if (!taken[v]) {
                    taken[v] = 1;
                    ++picked;
                }
            }
            std::vector<uint32_t> out;
            out.reserve(spec.n);
            for (uint32_t v = 0; v < spec.p; ++v)
                if (taken[v]) out.push_back(v);
            return SetFp{f, std::move(out)};
        }
        case SetSpec::Kind::Full: {
            std::vector<uint32_t> out(spec.p);
            for (uint32_t v = 0; v < spec.p; ++v) out[v] = v;
            return SetFp{f, std::move(out)};
        }
        case SetSpec::Kind::Interval: {
            if (spec.lo > spec.hi || spec.hi >= spec.p)
                throw std::invalid_argument("gen_set: bad interval endpoints");
            std::vector<uint32_t> out;
            for (uint32_t v = spec.lo; v <= spec.hi; ++v) out.push_back(v);
            return SetFp{f, std::move(out)};
        }
        case SetSpec::Kind::Subgroup:
            return subgroup(f, spec.t);
        case SetSpec::Kind::ShiftedSubgroup:
            return shift_set(subgroup(f, spec.t), spec.shift);
        case SetSpec::Kind::Explicit:
            return make_set(f, spec.explicit_elems);
        case SetSpec::Kind::File: {
            auto vals = read_set_file(spec.path);
            for (uint32_t v : vals)
                if (v >= spec.p)
                    throw std::invalid_argument("gen_set: file residue out of range");
            return make_set(f, std::move(vals));
        }
    }
    throw std::logic_error("gen_set: unreachable");
}

std::vector<uint32_t> read_set_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open set file '" + path + "'");
    std::vector<uint32_t> vals;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) {
            try {
                vals.push_back(static_cast<uint32_t>(parse_u64(tok)));
            } catch (const std::exception&) {
                throw std::invalid_argument("malformed set file '" + path + "' line " +
                                            std::to_string(lineno));
            }
        }
    }
    return vals;
}

void write_set_file(const std::string& path, const SetFp& s) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write set file '" + path + "'");
    out << "# p=" << s.field->p() << " n=" << s.size() << "\n";
    for (uint32_t e : s.elems) out << e << "\n";
}

cdouble CharTable::value(uint32_t x) const {
    if (idx[x] == kZero) return {0.0, 0.0};
    long double theta = 2.0L * 3.14159265358979323846264338327950288L *
                        static_cast<long double>(idx[x]) / static_cast<long double>(order);
    return {static_cast<double>(cosl(theta)), static_cast<double>(sinl(theta))};
}

int CharTable::sign_value(uint32_t x) const {
    if (idx[x] == kZero) return 0;
    if (order != 2) throw std::logic_error("sign_value needs an order-2 character");
    return idx[x] == 0 ? +1 : -1;
}

CharTable mul_char(const Field& f, uint32_t d) {
    uint32_t n = f->p() - 1;
    if (d <= 1 || n % d != 0)
        throw std::invalid_argument("mul_char: order " + std::to_string(d) +
                                    " invalid for p-1 = " + std::to_string(n));
    CharTable t;
    t.field = f;
    t.order = d;
    t.idx.assign(f->p(), CharTable::kZero);
    for (uint32_t x = 1; x < f->p(); ++x) t.idx[x] = f->dlog(x) % d;
    return t;
}

}  // namespace sumprod
