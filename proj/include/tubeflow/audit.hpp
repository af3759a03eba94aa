#pragma once

#include "tubeflow/flow.hpp"

#include <array>
#include <string_view>
#include <vector>

namespace tubeflow {

/// Discrete residuals of three evolution identities of the flow:
/// Id416 relates the Laplacian on the base to the tube Laplacian of the
/// tracked radius, Id418 is the evolution of the tracked radius, Id520 the
/// evolution of u_hat.
enum class AuditKind { Id416, Id418, Id520 };

std::string_view to_string(AuditKind k);
AuditKind audit_kind_from_string(std::string_view s);

struct ResidualReport {
    AuditKind which = AuditKind::Id416;
    int n = 0;
    double dt = 0.0;
    double sup = 0.0;
    double l2 = 0.0;
};

/// Three consecutive states a fixed dt apart, with markers started at
/// every node of the first one.
struct AuditSegment {
    FlowConfig cfg;
    std::array<FlowState, 3> states;
    std::array<std::vector<Marker>, 3> markers;
    double dt = 0.0;
};

/// dt <= 0 takes the adaptive step of the starting state.
AuditSegment record_segment(const FlowConfig& cfg, const FlowState& start, double dt = 0.0);

ResidualReport residual_audit(AuditKind which, const AuditSegment& seg);

/// All three audits on one segment started from the given profile.
std::vector<ResidualReport> run_audits(const FlowConfig& cfg, const RadialProfile& profile, double dt = 0.0);

struct RefinementRow {
    int n = 0;
    double dt = 0.0;
    bool halved = false;
    std::vector<ResidualReport> reports;
};

/// Audits of the profile r0 + A cos(pi z / rB) at each N, once with the
/// adaptive dt and once with half of it.
std::vector<RefinementRow> audit_refinement(const FlowConfig& cfg, double rB, const Multiplicities& density,
                                            double r0, double amplitude, const std::vector<int>& ns);

/// log2 of successive sup-norm ratios for one identity along rows with the
/// same halving flag; NaN where a norm vanishes.
std::vector<double> empirical_orders(const std::vector<RefinementRow>& rows, AuditKind which, bool halved);

} // namespace tubeflow
