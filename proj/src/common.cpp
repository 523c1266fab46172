#include "sumprod/common.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace sumprod {

std::string rat_str(const Rat& r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1) {
        s += "/";
        s += denominator(r).str();
    }
    return s;
}

std::string int_str(const Int& n) { return n.str(); }

std::string flt_str(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

Int int_pow(Int base, unsigned exp) {
    Int r = 1;
    while (exp) {
        if (exp & 1u) r *= base;
        base *= base;
        exp >>= 1u;
    }
    return r;
}

Rat rat_pow(const Rat& base, unsigned exp) {
    return Rat(int_pow(numerator(base), exp), int_pow(denominator(base), exp));
}

Rat rat_abs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

namespace {
std::atomic<int> g_threads{1};
}

void set_threads(int n) {
    if (n < 1) n = 1;
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw > 0 && n > 4 * hw) n = 4 * hw;
    g_threads.store(n);
}

int get_threads() { return g_threads.load(); }

void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
    int t = get_threads();
    if (t <= 1 || n < 2) {
        body(0, n, 0);
        return;
    }
    std::size_t chunks = std::min<std::size_t>(static_cast<std::size_t>(t), n);
    std::vector<std::thread> workers;
    workers.reserve(chunks);
    std::size_t per = n / chunks, rem = n % chunks;
    std::size_t begin = 0;
    for (std::size_t c = 0; c < chunks; ++c) {
        std::size_t len = per + (c < rem ? 1 : 0);
        std::size_t end = begin + len;
        workers.emplace_back([&body, begin, end, c] { body(begin, end, c); });
        begin = end;
    }
    for (auto& w : workers) w.join();
}

}  // namespace sumprod
