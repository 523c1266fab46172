#pragma once

#include "sumprod/energy.hpp"

namespace sumprod {

// One iteration snapshot of the decomposition loop.
struct DecompStep {
    std::size_t b_size;
    Rat energy_fb;        // E^+(f_B, B), exact
    Rat level_delta;      // chosen dyadic level
    std::size_t p_size;   // |P|
    std::size_t extracted;// |B_*|
    Int q;                // pigeonhole lower edge
    std::size_t level_count;  // L
    bool sandwich_ok;     // |B_*| q <= sigma_P(B) <= 2 L |B_*| q
};

struct DecompCert {
    SetFp input;
    Rat m_param;
    std::size_t anchor_size = 0;  // the |A| used in the exit threshold
    std::vector<DecompStep> steps;
    SetFp b_final;
    SetFp c_final;
    bool partition_ok;    // B and C partition A
};

// Dyadic pigeonhole over x -> r_{A+P}(x) on A: returns the maximizing level
// class, its lower dyadic edge q and the nonempty-level count L, with the
// exact sandwich |A_*| q <= sigma_P(A) <= 2 L |A_*| q.
struct PigeonholeResult {
    SetFp a_star;
    Int q;
    std::size_t level_count;
    Rat sigma;            // sigma_P(A)
    bool sandwich_ok;
};
PigeonholeResult misha_pigeonhole(const SetFp& a, const SetFp& pset);

// Asymptotic decomposition: A = B u C with
// E^+(B) - |B|^4/p <= |A|^{2/3} |B|^{7/3} / M held exactly (integer
// cross-multiplication of cubes).  Requires 1 <= M <= p/(2|A|).
// anchor_size pins |A| in the exit threshold; 0 means |A| itself.
// Resuming on a returned B with the original anchor performs zero
// iterations.
DecompCert bw_decompose(const SetFp& a, const Rat& m_param, std::size_t anchor_size = 0);

// Exit test in its exact integer form: (p E^+(B) - |B|^4)^3 M_num^3 <=
// |A|^2 |B|^7 p^3 M_den^3.
bool bw_threshold_met(const SetFp& b, std::size_t a_size, const Rat& m_param);

// Certificate verification rows: the exact energy bound on B, the
// multiplicative-energy bound on C against X (ratio), and the sum-product
// dichotomy branch record.
std::vector<BoundReport> verify_bw(const DecompCert& cert, const SetFp& x);

}  // namespace sumprod
