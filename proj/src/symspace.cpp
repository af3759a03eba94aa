#include "tubeflow/symspace.hpp"

#include "tubeflow/error.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace tubeflow {

int SpaceParams::horizontal_dim() const noexcept
{
    int total = 0;
    for (const auto& e : mH) total += e.m;
    return total;
}

int SpaceParams::horizontal_mult(double k) const noexcept
{
    for (const auto& e : mH)
        if (e.k == k) return e.m;
    return 0;
}

std::vector<double> SpaceParams::roots() const
{
    std::vector<double> ks;
    for (const auto& e : mH)
        if (e.k > 0.0) ks.push_back(e.k);
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    return ks;
}

bool SpaceParams::invariant_mode() const noexcept
{
    const auto ks = roots();
    return ks.size() == 1 && ks.front() == 1.0 && k0 == 1.0;
}

void SpaceParams::validate() const
{
    if (epsilon != 1 && epsilon != -1) throw RangeError("epsilon must be +1 or -1");
    if (!(b > 0.0) || !std::isfinite(b)) throw RangeError("b must be a positive finite number");
    if (mV[0] < 0 || mV[1] < 0) throw RangeError("vertical multiplicities must be non-negative");
    if (vertical_dim() < 1) throw RangeError("vertical dimension mV1 + mV2 must be at least 1");
    for (const auto& e : mH) {
        if (e.m < 0) throw RangeError("horizontal multiplicities must be non-negative");
        if (e.k < 0.0) throw RangeError("root indices must be non-negative");
    }
    if (horizontal_dim() < 1) throw RangeError("horizontal dimension must be at least 1");
    if (k0 != 0.0 && horizontal_mult(k0) < 1)
        throw RangeError("k0 must index a horizontal root with positive multiplicity");
}

double ct(int eps, double theta)
{
    if (theta == 0.0) throw PoleError("cotangent kernel evaluated at zero");
    return eps > 0 ? std::cos(theta) / std::sin(theta) : std::cosh(theta) / std::sinh(theta);
}

double focal_radius(const SpaceParams& space)
{
    if (!space.compact()) return std::numeric_limits<double>::infinity();
    auto ks = space.roots();
    ks.push_back(space.mV[1] != 0 ? 1.0 : 0.5);
    const double kmax = *std::max_element(ks.begin(), ks.end());
    return std::numbers::pi / (2.0 * kmax * space.b);
}

namespace {

SpaceParams hyperbolic(std::array<int, 2> mV, int mH)
{
    SpaceParams p;
    p.epsilon = -1;
    p.b = 1.0;
    p.mV = mV;
    p.mH = {{1.0, mH}};
    p.k0 = 1.0;
    return p;
}

CatalogEntry numeric(std::string name, SpaceParams p, std::string notes)
{
    CatalogEntry e;
    e.name = std::move(name);
    e.density = p.mH;
    e.params = std::move(p);
    e.notes = std::move(notes);
    return e;
}

CatalogEntry names_only(std::string name, std::string notes, std::vector<double> roots)
{
    CatalogEntry e;
    e.name = std::move(name);
    e.params.epsilon = 1;
    e.params.b = 1.0;
    e.params.mV = {0, 0};
    e.notes = std::move(notes);
    e.informational = true;
    e.flagged_roots = std::move(roots);
    return e;
}

std::vector<CatalogEntry> build_catalog()
{
    std::vector<CatalogEntry> c;
    // Real hyperbolic RH(n+1)/RH(p): mV1 = n - p, mH1 = p.
    c.push_back(numeric("RH3/RH1", hyperbolic({1, 0}, 1), "totally geodesic line in RH3"));
    c.push_back(numeric("RH4/RH1", hyperbolic({2, 0}, 1), "totally geodesic line in RH4"));
    c.push_back(numeric("RH4/RH2", hyperbolic({1, 0}, 2), "totally geodesic plane in RH4"));
    // Complex hyperbolic CH(m)/CH(p): mV1 = 2(m-p)-2, mV2 = 1, mH1 = 2p.
    c.push_back(numeric("CH2/CH1", hyperbolic({0, 1}, 2), "complex line in CH2"));
    c.push_back(numeric("CH3/CH1", hyperbolic({2, 1}, 2), "complex line in CH3"));
    c.push_back(numeric("CH3/CH2", hyperbolic({0, 1}, 4), "complex hyperplane in CH3"));
    // Quaternionic hyperbolic QH(m)/QH(p): mV1 = 4(m-p)-4, mV2 = 3, mH1 = 4p.
    c.push_back(numeric("QH2/QH1", hyperbolic({0, 3}, 4), "quaternionic line in QH2"));
    c.push_back(numeric("QH3/QH1", hyperbolic({4, 3}, 4), "quaternionic line in QH3"));
    c.push_back(numeric("OH2/OH1", hyperbolic({0, 7}, 8), "Cayley line in the Cayley hyperbolic plane"));

    // Compact duals, for focal-radius guarded runs.
    {
        auto p = hyperbolic({1, 0}, 1);
        p.epsilon = 1;
        c.push_back(numeric("S3/S1", p, "great circle in the round 3-sphere"));
    }
    {
        auto p = hyperbolic({0, 1}, 2);
        p.epsilon = 1;
        c.push_back(numeric("CP2/CP1", p, "projective line in CP2"));
    }

    // Meridians of irreducible rank two spaces of compact type (names only).
    c.push_back(names_only("SU(3)/SO(3) meridian", "F = S^1.S^2, polar RP^2, D = TS^1", {1.0, 2.0}));
    c.push_back(names_only("SU(6)/Sp(3) meridian", "F = S^1.S^5, polar QP^2, D = TS^1", {1.0, 2.0}));
    c.push_back(names_only("SU(3) meridian", "F = S^1.S^3, polar CP^2, D = TS^1", {1.0, 2.0}));
    c.push_back(names_only("E6/F4 meridian", "F = S^1.S^9, polar OP^2, D = TS^1", {1.0, 2.0}));
    c.push_back(names_only("Sp(2) meridian", "F = Sp(1)xSp(1), polar S^4, D = one of the TSp(1)", {1.0}));
    return c;
}

} // namespace

const std::vector<CatalogEntry>& catalog()
{
    static const std::vector<CatalogEntry> entries = build_catalog();
    return entries;
}

const CatalogEntry& catalog_lookup(std::string_view name)
{
    for (const auto& e : catalog())
        if (e.name == name) return e;
    throw RangeError("unknown catalog entry '" + std::string(name) + "'");
}

} // namespace tubeflow
