#ifndef HYRED_MODEL_HPP
#define HYRED_MODEL_HPP

#include "hyred/wbar.hpp"
#include "hyred/stability.hpp"

#include <string>
#include <vector>

namespace hyred {

// A branch point of the double cover: an exact tower element, the point at
// infinity, or one root of an unsplit quadratic orbit.
struct BranchPoint {
    int id = -1;
    bool at_infinity = false;
    FieldElement xi;        // exact points; for orbit members the best center
    bool exact = true;
    int orbit = -1;         // pairs carry the same orbit id
    int orbit_index = 0;    // 0 or 1 inside the pair
    int component = -1;     // tree component this point reduces to
};

// an unsplit quadratic factor x^2 + u x + w whose two roots are branch points
struct OrbitPair {
    int id = -1;
    FPoly quad;          // monic quadratic over the reference coordinate
    Rat internal_depth{0};  // v(rho - rho')
    FieldElement center;    // best tower approximation of either root
    Rat center_depth{0};    // v(rho - center) certified
};

enum class CompKind { a, b, c, d };
enum class CoverKind { unknown, inseparable, separable, split };

struct Component {
    int id = -1, parent = -1, parent_dp = -1;
    FieldElement a, b;      // chart x = a*y + b in the reference coordinate
    Rat depth{0};           // v(a)
    CompKind kind = CompKind::a;
    std::vector<int> marked;    // branch point ids reducing here
    std::vector<int> children;
    // cover data
    CoverKind cover = CoverKind::unknown;
    int genus_up = 0;
    bool genus_known = false;
    WClass wc;              // w-class of the chart polynomial, when computed
    bool analyzed = false;
    std::string note;
};

struct DoublePointRec {
    int id = -1;
    int comp_up = -1, comp_down = -1;
    Rat thickness{0};
    bool even = true;
    int marked_below = 0;
    // fiber upstairs
    bool analyzed = false;
    bool split = false;     // two double points of the same thickness
    std::string note;
};

// verification records for the four local chart presentations
struct ChartRecord {
    std::string kind;   // smooth_cover / odd_double / even_etale / even_halving
    Rat gamma{0}, alpha{0};
    LaurentPoly f, h, g;       // the decomposition behind the chart
    LaurentPoly f1, f2;        // for double points (f2 in the y variable)
    int site_component = -1;
};

struct Diagnostics {
    std::vector<std::string> notes;
    bool partial = false;
    void add(const std::string& s) { notes.push_back(s); }
    void degrade(const std::string& s) {
        notes.push_back(s);
        partial = true;
    }
};

struct ModelTree {
    Ctx ctx;
    int genus = 0;
    LaurentPoly fref;                 // separable reference polynomial
    std::vector<BranchPoint> points;
    std::vector<OrbitPair> orbits;
    std::vector<Component> comps;
    std::vector<DoublePointRec> dps;
    std::vector<ChartRecord> charts;
    Diagnostics diag;

    int add_component(Component c);
    int add_dp(DoublePointRec d);
    // number of marked points strictly inside the subtree of comp
    int marked_in_subtree(int comp) const;
};

// dual graph of the upstairs special fiber
struct DualGraph {
    struct V { int comp; int copy; std::string label; };
    struct E { int v1, v2; Rat thickness; };
    std::vector<V> verts;
    std::vector<E> edges;
    int betti() const;
    std::string dot() const;
};

struct ReductionReport {
    ModelTree tree;
    int n2 = 0, m2 = 0;
    int betti = 0;
    int toric_rank = 0, abelian_rank = 0;
    DualGraph graph;
    bool complete = true;
};

// stable marked genus-0 model of the branch locus (2g+2 points, one may be
// at infinity); points/orbits must already be embedded in ctx
ModelTree stable_marked_genus0(Ctx ctx, int genus, const LaurentPoly& fref,
                               std::vector<BranchPoint> pts,
                               std::vector<OrbitPair> orbits);

// branch-point ingestion: factor f, split what splits, pair what does not
ModelTree build_marked_tree(Ctx ctx, const LaurentPoly& f, int genus);

// the full hyperelliptic analysis (Algorithm steps 2 and 3 + summaries)
ReductionReport analyze_curve(ModelTree tree);

// local equation at an even/odd double point: f1 (in x), f2 (in y), both with
// constant term exactly 1
struct LocalEquation {
    LaurentPoly f1, f2;
    Rat alpha{0};
    bool odd = false;
    bool ok = true;
    std::string why_blocked;
};
LocalEquation local_equation_at(const ModelTree& tree, int dp_id);

// chart relation verification: substitutes the generic fiber z with
// z^2 = F into each emitted relation and returns the worst defect valuation
// (nullopt when every relation vanishes identically at precision)
std::optional<Rat> verify_chart(const ChartRecord& chart, const Ctx& ctx);

} // namespace hyred

#endif
