#ifndef HYRED_WBAR_HPP
#define HYRED_WBAR_HPP

#include "hyred/decomp.hpp"

#include <vector>

namespace hyred {

// w-bar on [0, alpha]: concave piecewise linear, capped at 2, with exact
// rational vertices.
struct PiecewiseLinear {
    Rat alpha{0};
    std::vector<std::pair<Rat, Rat>> vertices; // (lambda, value), inc. endpoints

    Rat value_at(Rat lambda) const;
    // slope of the segment starting at vertex k
    Rat slope_after(size_t k) const;
    bool constant_two() const;
    std::string str() const;
};

struct BreakPoint {
    Rat lambda{0};
    Rat value{0};
    bool at_two = false;
};

// envelope of v(c_i) + lambda*i over the support of g, capped at 2; g == 0
// yields the constant function 2
PiecewiseLinear wbar_from_g(const LaurentPoly& g, Rat alpha);

std::vector<BreakPoint> break_points(const PiecewiseLinear& w);

// direct criterion of the break-point characterization, evaluated on g:
// lambda is a break point iff gamma = 2, or gamma < 2 and [g(2^lambda u)/2^gamma]
// is not a monomial. Used as a cross-check.
bool break_point_criterion(const LaurentPoly& g, Rat lambda);

} // namespace hyred

#endif
