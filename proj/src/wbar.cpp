#include "hyred/wbar.hpp"

#include <algorithm>
#include <sstream>

namespace hyred {

Rat PiecewiseLinear::value_at(Rat lambda) const {
    if (vertices.empty()) return Rat(2);
    if (lambda <= vertices.front().first) return vertices.front().second;
    for (size_t k = 1; k < vertices.size(); ++k) {
        if (lambda <= vertices[k].first) {
            auto& [x0, y0] = vertices[k - 1];
            auto& [x1, y1] = vertices[k];
            if (x1 == x0) return y1;
            return y0 + (y1 - y0) * (lambda - x0) / (x1 - x0);
        }
    }
    return vertices.back().second;
}

Rat PiecewiseLinear::slope_after(size_t k) const {
    auto& [x0, y0] = vertices[k];
    auto& [x1, y1] = vertices[k + 1];
    return (y1 - y0) / (x1 - x0);
}

bool PiecewiseLinear::constant_two() const {
    for (auto& [x, y] : vertices)
        if (y != Rat(2)) return false;
    return true;
}

std::string PiecewiseLinear::str() const {
    std::ostringstream os;
    for (auto& [x, y] : vertices) os << "(" << x.str() << "," << y.str() << ") ";
    return os.str();
}

PiecewiseLinear wbar_from_g(const LaurentPoly& g, Rat alpha) {
    PiecewiseLinear w;
    w.alpha = alpha;
    // lines value = v(c_i) + lambda * i
    std::vector<std::pair<Rat, Rat>> lines; // (slope, intercept)
    for (auto& [e, c] : g.coeffs()) {
        auto v = c.valuation();
        if (!v) continue;
        lines.emplace_back(Rat(e), *v);
    }
    if (lines.empty()) {
        w.vertices = {{Rat(0), Rat(2)}, {alpha, Rat(2)}};
        return w;
    }
    // dedupe by slope, keep minimal intercept
    std::sort(lines.begin(), lines.end(), [](auto& a, auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    lines.erase(std::unique(lines.begin(), lines.end(),
                            [](auto& a, auto& b) { return a.first == b.first; }),
                lines.end());
    // candidate break positions: every pairwise intersection inside (0, alpha)
    std::vector<std::pair<Rat, Rat>> verts;
    auto eval_env = [&](Rat x) {
        Rat best = lines[0].first * x + lines[0].second;
        for (auto& l : lines) best = hyred::min(best, l.first * x + l.second);
        return best;
    };
    std::vector<Rat> xs{Rat(0), alpha};
    for (size_t i = 0; i < lines.size(); ++i)
        for (size_t j = i + 1; j < lines.size(); ++j) {
            Rat x = (lines[j].second - lines[i].second) /
                    (lines[i].first - lines[j].first);
            if (x > Rat(0) && x < alpha) xs.push_back(x);
        }
    std::sort(xs.begin(), xs.end(), [](const Rat& a, const Rat& b) { return a < b; });
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (auto& x : xs) verts.emplace_back(x, eval_env(x));
    // cap at 2: clip segments and insert crossings
    std::vector<std::pair<Rat, Rat>> capped;
    for (size_t i = 0; i < verts.size(); ++i) {
        if (i > 0) {
            auto [x0, y0] = verts[i - 1];
            auto [x1, y1] = verts[i];
            bool a0 = y0 > Rat(2), a1 = y1 > Rat(2);
            if (a0 != a1) {
                Rat xc = x0 + (x1 - x0) * (Rat(2) - y0) / (y1 - y0);
                capped.emplace_back(xc, Rat(2));
            }
        }
        capped.emplace_back(verts[i].first, hyred::min(verts[i].second, Rat(2)));
    }
    // drop redundant collinear vertices
    std::vector<std::pair<Rat, Rat>> out;
    for (auto& v : capped) {
        while (out.size() >= 2) {
            auto& a = out[out.size() - 2];
            auto& b = out.back();
            Rat lhs = (b.second - a.second) * (v.first - a.first);
            Rat rhs = (v.second - a.second) * (b.first - a.first);
            if (lhs == rhs) out.pop_back();
            else break;
        }
        if (!out.empty() && out.back().first == v.first) continue;
        out.push_back(v);
    }
    w.vertices = std::move(out);
    return w;
}

std::vector<BreakPoint> break_points(const PiecewiseLinear& w) {
    std::vector<BreakPoint> out;
    for (size_t k = 1; k + 1 < w.vertices.size(); ++k) {
        Rat s0 = w.slope_after(k - 1), s1 = w.slope_after(k);
        if (s0 == s1) continue;
        BreakPoint bp;
        bp.lambda = w.vertices[k].first;
        bp.value = w.vertices[k].second;
        bp.at_two = (bp.value == Rat(2));
        out.push_back(bp);
    }
    return out;
}

bool break_point_criterion(const LaurentPoly& g, Rat lambda) {
    // gamma := v(g(2^lambda u)) = min over lines; count the minimizers
    std::optional<Rat> gamma;
    int minimizers = 0;
    for (auto& [e, c] : g.coeffs()) {
        auto v = c.valuation();
        if (!v) continue;
        Rat val = *v + lambda * Rat(e);
        if (!gamma || val < *gamma) {
            gamma = val;
            minimizers = 1;
        } else if (val == *gamma) {
            ++minimizers;
        }
    }
    if (!gamma) return false;
    if (*gamma > Rat(2)) return false;
    if (*gamma == Rat(2)) return true;
    return minimizers >= 2; // residue not a monomial
}

} // namespace hyred
