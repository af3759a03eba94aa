#include "tubeflow/tubegeom.hpp"

#include "tubeflow/error.hpp"
#include "tubeflow/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace tubeflow {

namespace {

double ipow(double x, int m)
{
    double v = 1.0;
    for (int i = 0; i < m; ++i) v *= x;
    return v;
}

double cos_k0(const SpaceParams& s, double r)
{
    const double c = sc(s.epsilon, s.k0 * s.b * r);
    if (!(c > 0.0)) throw RangeError("radius at or beyond the focal radius");
    return c;
}

double vertical_cot_sum(const SpaceParams& s, double r)
{
    double sum = 0.0;
    for (int k = 1; k <= 2; ++k) {
        const int m = s.mV[k - 1];
        if (m == 0) continue;
        const double kb = k * s.b;
        sum += m * kb * ct(s.epsilon, kb * r);
    }
    return sum;
}

double horizontal_tan_sum(const SpaceParams& s, double r)
{
    double sum = 0.0;
    for (const auto& e : s.mH) {
        if (e.k <= 0.0 || e.m == 0) continue;
        const double kb = e.k * s.b;
        sum += e.m * kb * tt(s.epsilon, kb * r);
    }
    return sum;
}

/// ss and sc of k b r for the few distinct k met at one radius; one expm1
/// (or sin/cos pair) per k.
class KernelCache {
public:
    KernelCache(const SpaceParams& space, double r) : eps_(space.epsilon), b_(space.b), r_(r) {}

    void get(double k, double& s, double& c)
    {
        for (int i = 0; i < n_; ++i) {
            if (k_[i] == k) {
                s = s_[i];
                c = c_[i];
                return;
            }
        }
        const double x = k * b_ * r_;
        if (eps_ > 0) {
            s = std::sin(x);
            c = std::cos(x);
        } else {
            const double em1 = std::expm1(std::abs(x));
            const double e = em1 + 1.0;
            s = std::copysign(0.5 * em1 * (em1 + 2.0) / e, x);
            c = 0.5 * (e + 1.0 / e);
        }
        if (n_ < static_cast<int>(k_.size())) {
            k_[n_] = k;
            s_[n_] = s;
            c_[n_] = c;
            ++n_;
        }
    }

    int eps() const noexcept { return eps_; }
    double r() const noexcept { return r_; }

private:
    int eps_;
    double b_;
    double r_;
    std::array<double, 8> k_{};
    std::array<double, 8> s_{};
    std::array<double, 8> c_{};
    int n_ = 0;
};

double cached_c0(const SpaceParams& space, KernelCache& kc)
{
    double s = 0.0;
    double c = 0.0;
    kc.get(space.k0, s, c);
    if (!(c > 0.0)) throw RangeError("radius at or beyond the focal radius");
    return c;
}

double cached_rho(const SpaceParams& space, KernelCache& kc, const PointData& pd, SignMode mode)
{
    const int eps = kc.eps();
    const double b = space.b;
    double bracket = 0.0;
    for (int k = 1; k <= 2; ++k) {
        const int m = space.mV[k - 1];
        if (m == 0) continue;
        double s = 0.0;
        double c = 0.0;
        kc.get(k, s, c);
        if (s == 0.0) throw PoleError("cotangent kernel at zero");
        bracket += m * (k * b) * (c / s);
    }
    for (const auto& e : space.mH) {
        if (e.k <= 0.0 || e.m == 0) continue;
        double s = 0.0;
        double c = 0.0;
        kc.get(e.k, s, c);
        bracket -= e.m * (e.k * b) * (eps * s / c);
    }
    const double c0 = cached_c0(space, kc);
    const double q = c0 * c0 + pd.g * pd.g;
    const double u = pd.g == 0.0 ? 1.0 : c0 / std::sqrt(q);
    if (pd.g != 0.0 && space.k0 != 0.0) {
        double s0 = 0.0;
        double unused = 0.0;
        kc.get(space.k0, s0, unused);
        const double sigma = mode == SignMode::Eq34 ? 1.0 : -1.0;
        const double k0b = space.k0 * b;
        bracket += sigma * pd.g * pd.g * k0b * (eps * s0 / c0) / q;
    }
    return u * bracket;
}

double cached_mean_curvature(const SpaceParams& space, KernelCache& kc, const PointData& pd, SignMode mode)
{
    const double c0 = cached_c0(space, kc);
    const double q = c0 * c0 + pd.g * pd.g;
    const double sq = std::sqrt(q);
    return cached_rho(space, kc, pd, mode) - pd.lap / (c0 * sq) + pd.hess / (c0 * q * sq);
}

double cached_area_density(const SpaceParams& space, KernelCache& kc, double g)
{
    const double r = kc.r();
    double s1 = 0.0;
    double c1 = 0.0;
    kc.get(1.0, s1, c1);
    if (!(c1 > 0.0)) throw RangeError("radius at or beyond the focal radius");
    double prod = 1.0;
    if (r != 0.0) {
        for (int k = 1; k <= 2; ++k) {
            const int m = space.mV[k - 1];
            if (m == 0) continue;
            double s = 0.0;
            double c = 0.0;
            kc.get(k, s, c);
            const double x = k * space.b * r;
            prod *= ipow(s / x, m);
        }
    }
    const double stretch = g == 0.0 ? 1.0 : std::sqrt(c1 * c1 + g * g) / c1;
    return ipow(r, space.vertical_dim()) * prod * ipow(c1, space.horizontal_dim()) * stretch;
}

} // namespace

std::string_view to_string(SignMode m)
{
    return m == SignMode::Eq250 ? "eq250" : "eq34";
}

SignMode sign_mode_from_string(std::string_view s)
{
    if (s == "eq250") return SignMode::Eq250;
    if (s == "eq34") return SignMode::Eq34;
    throw ConfigError("unknown sign mode '" + std::string(s) + "' (expected eq250 or eq34)", "sign");
}

double psi(const SpaceParams& space, const PointData& pd)
{
    const int eps = space.epsilon;
    const double b = space.b;
    double prod = 1.0;
    for (int k = 1; k <= 2; ++k) {
        const int m = space.mV[k - 1];
        if (m == 0) continue;
        const double s = ss(eps, k * b * pd.r);
        if (!(s > 0.0)) throw RangeError("vertical Jacobi factor is not positive");
        prod *= ipow(s / (k * b), m);
    }
    int m_k0 = 0;
    for (const auto& e : space.mH) {
        if (e.k == space.k0) {
            m_k0 += e.m;
            continue;
        }
        if (e.m == 0) continue;
        const double c = sc(eps, e.k * b * pd.r);
        if (!(c > 0.0)) throw RangeError("horizontal Jacobi factor is not positive");
        prod *= ipow(c, e.m);
    }
    const double c0 = cos_k0(space, pd.r);
    return prod * ipow(c0, m_k0 - 1) * std::sqrt(c0 * c0 + pd.g * pd.g);
}

double rho(const SpaceParams& space, const PointData& pd, SignMode mode)
{
    KernelCache kc(space, pd.r);
    return cached_rho(space, kc, pd, mode);
}

double mean_curvature(const SpaceParams& space, const PointData& pd, SignMode mode)
{
    KernelCache kc(space, pd.r);
    return cached_mean_curvature(space, kc, pd, mode);
}

double psi_bar(const SpaceParams& space, double s)
{
    const int eps = space.epsilon;
    const double b = space.b;
    double prod = 1.0;
    if (s != 0.0) {
        for (int k = 1; k <= 2; ++k) {
            const int m = space.mV[k - 1];
            if (m == 0) continue;
            const double x = k * b * s;
            prod *= ipow(ss(eps, x) / x, m);
        }
    }
    return prod * ipow(sc(eps, b * s), space.horizontal_dim());
}

double f_density(const SpaceParams& space, const Multiplicities& mult, double z)
{
    double prod = 1.0;
    for (const auto& e : mult) {
        if (e.m == 0) continue;
        const double kb = e.k * space.b;
        const double factor = e.k > 0.0 ? ss(space.epsilon, kb * z) / kb : z;
        prod *= ipow(factor, e.m);
    }
    return prod;
}

double f_density(const SpaceParams& space, double z)
{
    return f_density(space, space.mH, z);
}

double f_density_drift(const SpaceParams& space, const Multiplicities& mult, double z)
{
    double mu = 0.0;
    for (const auto& e : mult) {
        if (e.m == 0) continue;
        const double kb = e.k * space.b;
        mu += e.k > 0.0 ? e.m * kb * ct(space.epsilon, kb * z) : e.m / z;
    }
    return mu;
}

int f_density_order(const Multiplicities& mult)
{
    int n = 0;
    for (const auto& e : mult) n += e.m;
    return n;
}

double delta_density(DeltaKind kind, const SpaceParams& space, double s)
{
    double v = ipow(s, space.vertical_dim()) * psi_bar(space, s);
    if (kind == DeltaKind::Two) v /= sc(space.epsilon, space.b * s);
    return v;
}

double delta(DeltaKind kind, const SpaceParams& space, double s)
{
    if (s < 0.0) throw RangeError("delta is defined for s >= 0");
    if (s >= focal_radius(space)) throw RangeError("delta evaluated beyond the focal radius");
    return quad::adaptive_simpson([&](double x) { return delta_density(kind, space, x); }, 0.0, s,
                                  1e-16, 1e-13);
}

double delta_inv(DeltaKind kind, const SpaceParams& space, double y)
{
    if (!(y >= 0.0) || !std::isfinite(y)) throw RangeError("delta inverse needs a finite y >= 0");
    if (y == 0.0) return 0.0;
    const double rF = focal_radius(space);
    const double cap = std::isfinite(rF) ? rF * (1.0 - 1e-12) : std::numeric_limits<double>::infinity();
    auto f = [&](double s) { return delta(kind, space, s); };
    double hi = std::min(1.0 / space.b, cap);
    while (f(hi) < y) {
        if (hi >= cap) throw RangeError("delta inverse: value beyond the range below the focal radius");
        hi = std::min(2.0 * hi, cap);
    }
    return quad::bisect_increasing(f, y, 0.0, hi, 1e-12 * std::max(1.0, hi));
}

std::vector<double> delta1_many(const SpaceParams& space, std::span<const double> r)
{
    std::vector<std::size_t> order(r.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r[a] < r[b]; });
    std::vector<double> out(r.size());
    auto integrand = [&](double x) { return delta_density(DeltaKind::One, space, x); };
    double prev = 0.0;
    double acc = 0.0;
    for (std::size_t idx : order) {
        if (r[idx] < 0.0) throw RangeError("delta evaluated at a negative radius");
        acc += quad::adaptive_simpson(integrand, prev, r[idx], 1e-17, 1e-14);
        prev = r[idx];
        out[idx] = acc;
    }
    return out;
}

double unit_sphere_volume(int m)
{
    if (m < 0) throw RangeError("sphere dimension must be non-negative");
    const int n = m + 1;
    // Gamma(n/2) by recurrence from Gamma(1) = 1 or Gamma(1/2) = sqrt(pi).
    double gamma = (n % 2 == 0) ? 1.0 : std::sqrt(std::numbers::pi);
    double x = (n % 2 == 0) ? 1.0 : 0.5;
    while (x < 0.5 * n) {
        gamma *= x;
        x += 1.0;
    }
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / gamma;
}

double vol_B(const SpaceParams& space, const Multiplicities& density, double rB)
{
    const double integral = quad::adaptive_simpson(
        [&](double z) { return f_density(space, density, z); }, 0.0, rB, 1e-16, 1e-13);
    return unit_sphere_volume(space.horizontal_dim() - 1) * integral;
}

double vol_B(const SpaceParams& space, double rB)
{
    return vol_B(space, space.mH, rB);
}

double vol_B(const SpaceParams& space, const BaseGrid& grid)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.z.size(); ++i) sum += grid.weights[i] * grid.density[i];
    return unit_sphere_volume(space.horizontal_dim() - 1) * sum;
}

double area_density(const SpaceParams& space, double r, double g)
{
    KernelCache kc(space, r);
    return cached_area_density(space, kc, g);
}

NodeGeometry node_geometry(const SpaceParams& space, const PointData& pd, SignMode mode)
{
    KernelCache kc(space, pd.r);
    NodeGeometry out;
    out.H = cached_mean_curvature(space, kc, pd, mode);
    out.area = cached_area_density(space, kc, pd.g);
    out.c0 = cached_c0(space, kc);
    return out;
}

std::vector<double> area_weights(const SpaceParams& space, const RadialProfile& profile,
                                 const Derivatives& d)
{
    const auto& g = *profile.grid;
    std::vector<double> w(profile.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = g.weights[i] * g.density[i] * area_density(space, profile.r[i], std::abs(d.rp[i]));
    return w;
}

double vol_M(const SpaceParams& space, const RadialProfile& profile)
{
    const auto w = area_weights(space, profile, derivatives(profile));
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    return unit_sphere_volume(space.vertical_dim()) * unit_sphere_volume(space.horizontal_dim() - 1) * sum;
}

double vol_D(const SpaceParams& space, const RadialProfile& profile)
{
    const auto& g = *profile.grid;
    const auto d1 = delta1_many(space, profile.r);
    double sum = 0.0;
    for (std::size_t i = 0; i < d1.size(); ++i) sum += g.weights[i] * g.density[i] * d1[i];
    return unit_sphere_volume(space.vertical_dim()) * unit_sphere_volume(space.horizontal_dim() - 1) * sum;
}

std::vector<double> mean_curvature_profile(const SpaceParams& space, const RadialProfile& profile,
                                           const Derivatives& d, SignMode sign, LapMode lap)
{
    const auto lapF = laplacian_F(profile, d, lap);
    std::vector<double> H(profile.size());
    for (std::size_t i = 0; i < H.size(); ++i) {
        const double rp = d.rp[i];
        H[i] = mean_curvature(space, {profile.r[i], std::abs(rp), lapF[i], rp * rp * d.rpp[i]}, sign);
    }
    return H;
}

double avg_H(const SpaceParams& space, const RadialProfile& profile, SignMode sign, LapMode lap)
{
    const auto d = derivatives(profile);
    const auto w = area_weights(space, profile, d);
    const auto H = mean_curvature_profile(space, profile, d, sign, lap);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < H.size(); ++i) {
        num += w[i] * H[i];
        den += w[i];
    }
    return num / den;
}

double a_rB(const SpaceParams& space, const Multiplicities& density, double rB)
{
    return space.compact() ? f_density(space, density, rB) : 1.0;
}

double c_prime(const SpaceParams& space, double a, double rmax)
{
    constexpr int samples = 2001;
    rmax = std::max(rmax, a);
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < samples; ++j) {
        const double r = (rmax == a) ? a : a + (rmax - a) * j / (samples - 1);
        // rho * psi = u * sqrt(c0^2 + g^2) * (...) * bracket(g) and the prefactor
        // is g-independent; bracket(g) is monotone in g^2/(c0^2+g^2) in [0, 1),
        // so g = 0 and g -> infinity bound every gradient.
        const double prefactor = psi(space, {r, 0.0, 0.0, 0.0});
        const double base = vertical_cot_sum(space, r) - horizontal_tan_sum(space, r);
        const double k0b = space.k0 * space.b;
        const double limit = base + k0b * tt(space.epsilon, k0b * r);
        best = std::min(best, prefactor * std::min(base, limit));
        if (rmax == a) break;
    }
    return best;
}

double k1_constant(const SpaceParams& space, double beta1, double beta2)
{
    double sum_sq = 0.0;
    double sum_cot = 0.0;
    for (int k = 1; k <= 2; ++k) {
        const int m = space.mV[k - 1];
        if (m == 0) continue;
        const double kb = k * space.b;
        const double s = ss(space.epsilon, kb * beta1);
        sum_sq += m * kb * kb / (s * s);
        sum_cot += m * kb * ct(space.epsilon, kb * beta1);
    }
    const double b = space.b;
    return sum_sq + b * std::abs(tt(space.epsilon, b * beta2)) * sum_cot;
}

double k2_constant(const SpaceParams& space, double beta1, double hbar_lower_obs)
{
    const double b = space.b;
    return hbar_lower_obs * b * std::abs(tt(space.epsilon, b * beta1));
}

double vhat_bound(double k1, double k2, double hbar_upper_obs)
{
    return 0.5 * (k1 + std::sqrt(k1 * k1 + 4.0 * k2 * hbar_upper_obs));
}

BoundsReport initial_bounds(const SpaceParams& space, const RadialProfile& initial)
{
    const auto& grid = *initial.grid;
    BoundsReport rep;
    rep.rF = focal_radius(space);
    rep.volB = vol_B(space, grid);
    rep.volD0 = vol_D(space, initial);
    rep.volM0 = vol_M(space, initial);
    const double vv = unit_sphere_volume(space.vertical_dim());
    const double vh = unit_sphere_volume(space.horizontal_dim() - 1);
    rep.aRB = a_rB(space, grid.density_mult, grid.rB);

    rep.rHat1 = delta_inv(DeltaKind::One, space, rep.volD0 / (vv * rep.volB));
    const double d2hat = delta2(space, rep.rHat1);
    // Targets beyond the range of delta2 below the focal radius make the
    // corresponding bound vacuous.
    auto inv2 = [&](double y) {
        try {
            return delta_inv(DeltaKind::Two, space, y);
        } catch (const RangeError&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    rep.rHat2 = inv2(rep.volM0 / vv + d2hat);
    rep.prop63Bound = inv2(d2hat + rep.volM0 / (rep.aRB * vv * vh));
    rep.thmCLHS = rep.volM0;
    rep.thmCRHS = vh * vv * d2hat;
    rep.thmCSatisfied = rep.thmCLHS <= rep.thmCRHS;
    return rep;
}

void update_monitors(const SpaceParams& space, BoundsReport& rep, const MonitorInputs& obs)
{
    rep.cPrimeOfA = c_prime(space, obs.rmin, obs.rmax);
    rep.hbarLower = ipow(obs.rmin, space.vertical_dim()) * rep.cPrimeOfA * rep.volB / rep.volM0;
    rep.K1 = k1_constant(space, obs.rmin, obs.rmax);
    rep.K2 = k2_constant(space, obs.rmin, obs.hbar_min);
    rep.vhatBound = vhat_bound(rep.K1, rep.K2, obs.hbar_max);
}

BoundsReport bounds_report(const SpaceParams& space, const RadialProfile& initial, SignMode sign,
                           LapMode lap)
{
    auto rep = initial_bounds(space, initial);
    const auto [mn, mx] = std::minmax_element(initial.r.begin(), initial.r.end());
    const double hbar = avg_H(space, initial, sign, lap);
    update_monitors(space, rep, {*mn, *mx, hbar, hbar});
    return rep;
}

} // namespace tubeflow
