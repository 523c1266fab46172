#pragma once

#include "sumprod/incidence.hpp"
#include "sumprod/sl2.hpp"

namespace sumprod {
// Brute-force reference implementations, written definitionally from the
// set-builder definitions and sharing no code with the fast paths.
// Single-threaded; every routine guards its tuple count.
namespace oracle {

inline constexpr uint64_t kTupleGuard = 1'000'000'000ull;

Int energy_add(const SetFp& a, const SetFp& b);
Int energy_mul(const SetFp& a, const SetFp& b);
Int energy_k(const SetFp& a, unsigned k);     // sum_x r_{A-A}(x)^k by direct r
Int tk(const SetFp& a, unsigned k);           // 2k nested loops
Int energy4(const SetFp& a, const SetFp& b);  // E^+(A,A,B,B) by quadruple loops
Int dtimes_k(const SetFp& a, unsigned k);
Int dprime_k(const SetFp& a, unsigned k);
Int n_quantity(const SetFp& a, const SetFp& b, const SetFp& c);
Int nprime(const SetFp& a);
Int sigma_p(const SetFp& a, const SetFp& pset);

Int collinear_triples(const SetFp& a);        // determinant test over point triples
Int collinear_quadruples(const SetFp& a, const SetFp& b, const SetFp& c, const SetFp& d);
std::vector<int64_t> q_table(const SetFp& a, const SetFp& b, const SetFp& c, const SetFp& d);
Int point_plane_incidences(const PointSet3& pts, const PlaneSet& planes);
Int point_line_incidences(const SetFp& a, const SetFp& b, const LineSet& lines);

cdouble trilinear_sum(const SetFp& x, const SetFp& y, const SetFp& z,
                      const std::vector<cdouble>& alpha = {},
                      const std::vector<cdouble>& beta = {},
                      const std::vector<cdouble>& gamma = {});
cdouble multilinear_sum(const std::vector<SetFp>& sets);

std::vector<Int> cf_count(const SetFp& a, unsigned k);  // |A|^k tuple walk
Int inverse_diff_count(const SetFp& a1, const SetFp& a2, uint32_t lambda);
Int poly_shift_collisions(const SetFp& a, const SetFp& b, const std::vector<uint32_t>& p1,
                          const std::vector<uint32_t>& p2);
std::size_t gl2_image_size(const SetFp& a, const SetFp& b1, const SetFp& b2,
                           const SetFp& b3);
Rat action_count(const MatrixFamily& s, const IntFn& f1, const IntFn& f2);
GroupFn group_conv(const GroupFn& mu, const GroupFn& nu);  // dense double loop

}  // namespace oracle
}  // namespace sumprod
