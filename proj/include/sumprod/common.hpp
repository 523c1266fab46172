#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace sumprod {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;
using cdouble = std::complex<double>;

inline double to_double(const Rat& r) { return r.convert_to<double>(); }
inline double to_double(const Int& n) { return n.convert_to<double>(); }

// Exact "num/den" rendering; integers print without the "/1".
std::string rat_str(const Rat& r);
std::string int_str(const Int& n);
// Floats with 12 significant digits.
std::string flt_str(double x);

Int int_pow(Int base, unsigned exp);
Rat rat_pow(const Rat& base, unsigned exp);
Rat rat_abs(const Rat& r);

// Global worker count for the few parallel loops in the library.
// Deterministic results are required regardless of this setting.
void set_threads(int n);
int get_threads();

// Splits [0, n) into contiguous chunks, runs body(begin, end, chunk_index)
// on workers, and returns once all chunks finish.  Callers own the merge
// order (chunk_index is dense, 0-based).
void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

// Compensated (Kahan) accumulation in a fixed order.
struct KahanSum {
    double hi = 0.0, lo = 0.0;
    void add(double x) {
        double y = x - lo;
        double t = hi + y;
        lo = (t - hi) - y;
        hi = t;
    }
    double value() const { return hi; }
};

struct KahanCSum {
    KahanSum re, im;
    void add(cdouble z) {
        re.add(z.real());
        im.add(z.imag());
    }
    cdouble value() const { return {re.value(), im.value()}; }
};

}  // namespace sumprod
