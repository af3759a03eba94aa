#include "tubeflow/audit.hpp"

#include "tubeflow/diagnostics.hpp"
#include "tubeflow/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace tubeflow {

std::string_view to_string(AuditKind k)
{
    switch (k) {
    case AuditKind::Id416: return "id416";
    case AuditKind::Id418: return "id418";
    case AuditKind::Id520: return "id520";
    }
    return "unknown";
}

AuditKind audit_kind_from_string(std::string_view s)
{
    if (s == "id416") return AuditKind::Id416;
    if (s == "id418") return AuditKind::Id418;
    if (s == "id520") return AuditKind::Id520;
    throw ConfigError("unknown audit '" + std::string(s) + "'", "audit");
}

AuditSegment record_segment(const FlowConfig& cfg, const FlowState& start, double dt)
{
    AuditSegment seg;
    seg.cfg = cfg;
    if (dt <= 0.0) dt = stable_dt(cfg, start.profile, rhs(cfg, start.profile));
    seg.dt = dt;

    const auto& grid = *start.profile.grid;
    std::vector<Marker> markers(start.profile.size());
    for (std::size_t i = 0; i < markers.size(); ++i) markers[i] = {grid.z[i], start.profile.r[i], false};

    seg.states[0] = start;
    seg.markers[0] = markers;
    for (int k = 1; k < 3; ++k) {
        seg.states[k] = step(cfg, seg.states[k - 1], dt, markers);
        seg.markers[k] = markers;
    }
    return seg;
}

namespace {

std::vector<double> u_nodes(const SpaceParams& space, const RadialProfile& p)
{
    const auto d = derivatives(p);
    std::vector<double> u(p.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = u_hat(space, p.r[i], std::abs(d.rp[i]));
    return u;
}

double sum_over(const SpaceParams& space, bool vertical, auto term, double r)
{
    double s = 0.0;
    if (vertical) {
        for (int k = 1; k <= 2; ++k) {
            const int m = space.mV[k - 1];
            if (m != 0) s += m * term(k * space.b, r);
        }
    } else {
        for (const auto& e : space.mH)
            if (e.k > 0.0 && e.m != 0) s += e.m * term(e.k * space.b, r);
    }
    return s;
}

ResidualReport finish(AuditKind which, const AuditSegment& seg, const std::vector<double>& res)
{
    const auto& grid = *seg.states[1].profile.grid;
    ResidualReport rep;
    rep.which = which;
    rep.n = grid.N;
    rep.dt = seg.dt;
    double l2 = 0.0;
    for (std::size_t i = 0; i < res.size(); ++i) {
        rep.sup = std::max(rep.sup, std::abs(res[i]));
        l2 += grid.weights[i] * res[i] * res[i];
    }
    rep.l2 = std::sqrt(l2);
    if (!std::isfinite(rep.sup) || !std::isfinite(rep.l2)) throw RangeError("non-finite audit residual");
    return rep;
}

} // namespace

ResidualReport residual_audit(AuditKind which, const AuditSegment& seg)
{
    const auto& cfg = seg.cfg;
    const auto& space = cfg.space;
    const int eps = space.epsilon;
    const double k0b = space.k0 * space.b;
    const auto& mid = seg.states[1].profile;
    const auto& grid = *mid.grid;
    const std::size_t n = mid.size();

    const auto d = derivatives(mid);
    const auto lapF = laplacian_F(mid, d, cfg.lap);
    const RadialLaplaceBeltrami lb(space, mid);
    const auto lap_r = lb.apply(mid.r);

    std::vector<double> res(n, 0.0);
    if (which == AuditKind::Id416) {
        for (std::size_t i = 0; i < n; ++i) {
            const double r = mid.r[i];
            const double g = d.rp[i];
            const double c = sc(eps, k0b * r);
            const double s = ss(eps, k0b * r);
            const double q = c * c + g * g;
            const double hess = g * g * d.rpp[i];
            res[i] = lapF[i] - (q * lap_r[i] - eps * k0b * s * c * g * g / q + hess / q);
        }
        return finish(which, seg, res);
    }

    const double hbar = avg_H(space, mid, cfg.sign, cfg.lap);
    std::vector<double> nodal(n);
    std::array<std::vector<double>, 3> tracked;

    if (which == AuditKind::Id418) {
        for (std::size_t i = 0; i < n; ++i) {
            const double r = mid.r[i];
            const double g = d.rp[i];
            const double c = sc(eps, k0b * r);
            const double s = ss(eps, k0b * r);
            const double q = c * c + g * g;
            const double rh = rho(space, {r, std::abs(g), 0.0, 0.0}, cfg.sign);
            nodal[i] = lap_r[i] + c * (hbar - rh) / std::sqrt(q) - eps * k0b * s * c * g * g / (q * q);
        }
        for (int k = 0; k < 3; ++k) {
            tracked[k].resize(n);
            for (std::size_t j = 0; j < n; ++j) tracked[k][j] = seg.markers[k][j].rhat;
        }
    } else {
        const auto u = u_nodes(space, mid);
        const auto lap_u = lb.apply(u);
        for (std::size_t i = 0; i < n; ++i) {
            const double r = mid.r[i];
            const double g = std::abs(d.rp[i]);
            const double uu = u[i];
            const double one_m = 1.0 - uu * uu;
            const double t0 = k0b * tt(eps, k0b * r);
            const double inv_sin2 = sum_over(space, true, [&](double kb, double x) {
                const double sv = ss(eps, kb * x);
                return kb * kb / (sv * sv);
            }, r);
            const double cot_sum = sum_over(space, true, [&](double kb, double x) { return kb * ct(eps, kb * x); }, r);
            const double tan_sum = sum_over(space, false, [&](double kb, double x) { return kb * tt(eps, kb * x); }, r);
            const double sec2 = sum_over(space, false, [&](double kb, double x) {
                const double cv = sc(eps, kb * x);
                return eps * kb * kb / (cv * cv);
            }, r);
            const double lam = lambda_fn(space, {r, g, lapF[i], d.rp[i] * d.rp[i] * d.rpp[i]});
            const double inner = lam + uu * tan_sum;
            const double rhs520 = hbar * t0 * one_m - uu * one_m * inv_sin2 - uu * one_m * t0 * cot_sum
                                - uu * one_m * t0 * tan_sum + uu * inner * inner + uu * one_m * sec2 * g;
            nodal[i] = lap_u[i] + rhs520;
        }
        for (int k = 0; k < 3; ++k) {
            const auto uk = u_nodes(space, seg.states[k].profile);
            tracked[k].resize(n);
            for (std::size_t j = 0; j < n; ++j)
                tracked[k][j] = interp_cubic(uk, grid.h, seg.markers[k][j].z, 1);
        }
    }

    for (std::size_t j = 0; j < n; ++j) {
        const double rate = (tracked[2][j] - tracked[0][j]) / (2.0 * seg.dt);
        res[j] = rate - interp_cubic(nodal, grid.h, seg.markers[1][j].z, 1);
    }
    return finish(which, seg, res);
}

std::vector<ResidualReport> run_audits(const FlowConfig& cfg, const RadialProfile& profile, double dt)
{
    const auto seg = record_segment(cfg, make_state(cfg, profile), dt);
    return {residual_audit(AuditKind::Id416, seg), residual_audit(AuditKind::Id418, seg),
            residual_audit(AuditKind::Id520, seg)};
}

std::vector<RefinementRow> audit_refinement(const FlowConfig& cfg, double rB, const Multiplicities& density,
                                            double r0, double amplitude, const std::vector<int>& ns)
{
    std::vector<RefinementRow> rows;
    for (int n : ns) {
        const auto grid = make_base_grid(cfg.space, rB, n, density);
        const auto profile = cosine_profile(grid, r0, amplitude);
        const auto start = make_state(cfg, profile);
        const double dt = stable_dt(cfg, profile, rhs(cfg, profile));
        for (bool halved : {false, true}) {
            RefinementRow row;
            row.n = n;
            row.halved = halved;
            row.dt = halved ? 0.5 * dt : dt;
            const auto seg = record_segment(cfg, start, row.dt);
            for (auto k : {AuditKind::Id416, AuditKind::Id418, AuditKind::Id520})
                row.reports.push_back(residual_audit(k, seg));
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<double> empirical_orders(const std::vector<RefinementRow>& rows, AuditKind which, bool halved)
{
    std::vector<double> sups;
    for (const auto& row : rows) {
        if (row.halved != halved) continue;
        for (const auto& rep : row.reports)
            if (rep.which == which) sups.push_back(rep.sup);
    }
    std::vector<double> orders;
    for (std::size_t i = 1; i < sups.size(); ++i) {
        if (sups[i] > 0.0 && sups[i - 1] > 0.0)
            orders.push_back(std::log2(sups[i - 1] / sups[i]));
        else
            orders.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    return orders;
}

} // namespace tubeflow
