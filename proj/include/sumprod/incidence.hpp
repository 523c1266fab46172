#pragma once

#include <array>
#include <optional>

#include "sumprod/energy.hpp"

namespace sumprod {

struct Point3 {
    uint32_t x, y, z;
    bool operator==(const Point3&) const = default;
    auto operator<=>(const Point3&) const = default;
};

struct PointSet3 {
    Field field;
    std::vector<Point3> points;  // deduplicated
};

// Plane u*x + v*y + w*z = c with (u,v,w) normalized to leading coefficient 1.
struct Plane {
    uint32_t u, v, w, c;
    bool operator==(const Plane&) const = default;
    auto operator<=>(const Plane&) const = default;
};

struct PlaneSet {
    Field field;
    std::vector<Plane> planes;  // deduplicated, normalized
};

PointSet3 make_point_set3(const Field& f, std::vector<Point3> pts);
PlaneSet make_plane_set(const Field& f, std::vector<std::array<uint32_t, 4>> raw);

// Line y = m x + b, or the vertical line x = c (vertical = true, b = c).
struct Line2 {
    bool vertical = false;
    uint32_t m = 0, b = 0;
    bool operator==(const Line2&) const = default;
    auto operator<=>(const Line2&) const = default;
};

struct LineSet {
    Field field;
    std::vector<Line2> lines;  // deduplicated
};

LineSet make_line_set(const Field& f, std::vector<Line2> lines);

// Exact count of ordered collinear triples in A x A (repeats allowed, a
// fully coincident triple counted once).
EnergyValue collinear_triples(const SetFp& a);

// Exact count of ordered collinear quadruples drawn from the four grids.
EnergyValue collinear_quadruples(const SetFp& a, const SetFp& b, const SetFp& c,
                                 const SetFp& d);

// q_{A,B,C,D}(x,y) table over F_p x F_p plus the zero-denominator bucket
// bookkeeping that reconciles sum q^2 with the quadruple count exactly.
struct QFunction {
    Field field;
    std::vector<int64_t> table;  // p x p row-major: tuples with c != a
    Int same_abscissa_tuples;    // tuples with c == a
    Int full_degenerate;         // tuples with b == c == d == a
    Int total_tuples;            // |A||B||C||D|
    Int degenerate_pairs;        // collinear pairs with c == a or c' == a'
    Int sum_sq;                  // sum over the finite table of q^2

    int64_t at(uint32_t x, uint32_t y) const { return table[static_cast<size_t>(x) * field->p() + y]; }
    // sum q^2 + bucket corrections; equals collinear_quadruples exactly.
    Int reconstructed_quadruples() const;
};

QFunction q_function(const SetFp& a, const SetFp& b, const SetFp& c, const SetFp& d);

// Exact incidence count between points and planes; nullptr weights mean
// the unweighted count.  The report carries the incidence-bound terms with
// the implicit constant as a measured ratio and the exact max collinearity.
struct PointPlaneResult {
    Int incidences;
    Rat weighted;           // equals incidences when unweighted
    bool weighted_exact = true;
    double weighted_float = 0.0;
    std::size_t max_collinear = 0;
    BoundReport report;
};

PointPlaneResult point_plane_incidences(const PointSet3& pts, const PlaneSet& planes,
                                        const std::vector<Rat>* alpha = nullptr,
                                        const std::vector<Rat>* beta = nullptr);

// Spectral design bound over the projective geometry PG(3,q):
// row 1 asserts I^T I = q^2 I + (q+1) J exactly, row 2 the bound
// |sum I(p,pi) alpha beta| <= q ||alpha||_2 ||beta||_2 for mean-zero input.
std::vector<BoundReport> design_bound_check(uint32_t q, const std::vector<double>& alpha,
                                            const std::vector<double>& beta);
// Number of points (= hyperplanes) of PG(3,q).
std::size_t design_space_size(uint32_t q);

// Exact point/line incidences on the grid A x B with the Cartesian-product
// asymptotic reported.
struct PointLineResult {
    Int incidences;
    Rat main_term;
    Rat error;
    BoundReport report;
};

PointLineResult point_line_incidences(const SetFp& a, const SetFp& b, const LineSet& lines);

}  // namespace sumprod
