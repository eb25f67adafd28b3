#include "isac/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace isac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double bare_ups_bs(const OfdmConfig& cfg, const LinkBudget& lb) {
    return lb.ups_bar_bs * lb.beta_scale / cfg.eta;
}

// Simpson rule over n (even) intervals of a callable f on [lo, hi].
template <typename F>
double simpson(F&& f, double lo, double hi, int n) {
    const double h = (hi - lo) / n;
    double acc = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) acc += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

}  // namespace

MonoCoverageCoeffs mono_coverage_coeffs() {
    MonoCoverageCoeffs co;
    co.leading = std::sqrt(kPi) * std::tgamma(5.0 / 6.0) / std::tgamma(4.0 / 3.0) *
                 std::cbrt(kPi * kPi / 6.0);
    co.correction = kPi / 96.0;
    return co;
}

MonoCoverage coverage_mono_closed(const OfdmConfig& cfg, const LinkBudget& lb,
                                  double gamma_p) {
    if (gamma_p <= 0.0)
        throw std::invalid_argument("coverage_mono_closed: gamma_p must be positive");
    cfg.validate();
    const MonoCoverageCoeffs co = mono_coverage_coeffs();
    const double n_r = cfg.rx_antennas;
    const double k = cfg.subcarriers;
    const double km = k * cfg.symbols;
    const double ups = bare_ups_bs(cfg, lb);

    MonoCoverage out;
    out.raw_area =
        co.leading * std::cbrt(gamma_p * gamma_p) *
            std::cbrt(n_r * (n_r * n_r - 1.0) * km * ups) -
        co.correction * cfg.c * cfg.c * (n_r * n_r - 1.0) /
            (cfg.delta_f * cfg.delta_f * (k * k - 1.0));
    out.clamped = out.raw_area < 0.0;
    out.area = out.clamped ? 0.0 : out.raw_area;
    return out;
}

double coverage_mono_polar(const OfdmConfig& cfg, const LinkBudget& lb, double gamma_p) {
    if (gamma_p <= 0.0)
        throw std::invalid_argument("coverage_mono_polar: gamma_p must be positive");
    const MonoCoeffs co = mono_coeffs(cfg, lb, FisherOptions{});
    const double g2 = gamma_p * gamma_p;

    // boundary radius: c1 r^6 / cos^2(th) + c2 r^4 = gamma_p^2, bisected per angle
    auto radius_sq = [&](double th) {
        const double cs2 = std::cos(th) * std::cos(th);
        if (cs2 == 0.0)
            return 0.0;
        double hi = std::pow(g2 * cs2 / co.c1, 1.0 / 6.0);
        double lo = 0.0;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            const double r4 = mid * mid * mid * mid;
            (co.c1 * r4 * mid * mid / cs2 + co.c2 * r4 <= g2 ? lo : hi) = mid;
        }
        return lo * lo;
    };
    // both lobes: area = 2 * (1/2) * integral of r^2 over (-pi/2, pi/2)
    return simpson(radius_sq, -kPi / 2.0, kPi / 2.0, 4000);
}

CoverageGrid coverage_numeric(const OfdmConfig& cfg, const LinkBudget& lb,
                              const std::optional<Vec2>& q_u, const CoverageQuery& query,
                              CoverageCriterion criterion) {
    if (query.gamma_p <= 0.0 || query.cell <= 0.0)
        throw std::invalid_argument("coverage_numeric: gamma_p and cell must be positive");
    if (query.region.empty())
        throw std::invalid_argument("coverage_numeric: empty bounding box");
    if (criterion != CoverageCriterion::mono && !q_u)
        throw std::invalid_argument("coverage_numeric: hybrid/joint criteria need q_U");
    if (criterion == CoverageCriterion::joint && !query.gamma_v)
        throw std::invalid_argument("coverage_numeric: joint criterion needs gamma_v");
    cfg.validate();

    CoverageGrid grid;
    grid.cell = query.cell;
    grid.nx = static_cast<int>(std::ceil((query.region.x_max - query.region.x_min) / query.cell));
    grid.ny = static_cast<int>(std::ceil((query.region.y_max - query.region.y_min) / query.cell));
    grid.x0 = query.region.x_min + 0.5 * query.cell;
    grid.y0 = query.region.y_min + 0.5 * query.cell;
    grid.covered.assign(static_cast<size_t>(grid.nx) * grid.ny, 0);

    int count = 0;
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            const Vec2 q{grid.x0 + ix * query.cell, grid.y0 + iy * query.cell};
            if (query.right_side_only && q.x <= 0.0)
                continue;
            double r_b = q.norm();
            if (r_b < 1e-9)
                r_b = 1e-9;  // bound vanishes at the BS itself
            bool ok;
            if (criterion == CoverageCriterion::mono) {
                const double ups_bs = bare_ups_bs(cfg, lb) / (r_b * r_b * r_b * r_b);
                FisherSet fs;
                fs.i_tau_bs = fisher_delay_bs(cfg, ups_bs, FisherOptions{});
                fs.i_theta = fisher_angle(cfg, ups_bs, std::atan2(q.y, q.x), FisherOptions{});
                ok = crlb_mono_from_fisher(fs, r_b, cfg.c).peb <= query.gamma_p;
            } else {
                Vec2 ue = *q_u;
                if ((ue - q).norm() < 1e-6)
                    ue.x += 1e-6;  // keep the bistatic geometry well defined
                const SceneGeometry g = derive_geometry(q, ue);
                const ReceiveSnr snr = receive_snr(cfg, lb, g);
                const FisherSet fs = fisher_set(cfg, snr, g.theta);
                ok = crlb_hybrid_position(fs, g, cfg.c).peb <= query.gamma_p;
                if (ok && criterion == CoverageCriterion::joint)
                    ok = crlb_velocity(cfg, fs, g).veb <= *query.gamma_v;
            }
            if (ok) {
                grid.covered[static_cast<size_t>(iy) * grid.nx + ix] = 1;
                ++count;
            }
        }
    }
    grid.area = count * query.cell * query.cell;
    return grid;
}

UeSweep optimal_ue_sweep(const OfdmConfig& cfg, const LinkBudget& lb,
                         const std::vector<double>& x_u_range, const CoverageQuery& query) {
    if (x_u_range.empty())
        throw std::invalid_argument("optimal_ue_sweep: empty x_U range");
    UeSweep sweep;
    double best = -1.0;
    for (double x_u : x_u_range) {
        const CoverageGrid g =
            coverage_numeric(cfg, lb, Vec2{x_u, 0.0}, query, CoverageCriterion::hybrid);
        sweep.curve.push_back({x_u, g.area});
        if (g.area > best) {
            best = g.area;
            sweep.x_u_star = x_u;
        }
    }
    return sweep;
}

UeRegion ue_admissible_region(const OfdmConfig& cfg, const LinkBudget& lb, const Vec2& q,
                              double gamma_p) {
    if (gamma_p <= 0.0)
        throw std::invalid_argument("ue_admissible_region: gamma_p must be positive");
    cfg.validate();
    UeRegion reg;
    reg.q = q;
    reg.gamma_p = gamma_p;

    const double r_b = q.norm();
    if (r_b <= 0.0)
        throw std::domain_error("ue_admissible_region: target at the BS");
    const double theta = std::atan2(q.y, q.x);
    const double ups_bs = bare_ups_bs(cfg, lb) / (r_b * r_b * r_b * r_b);
    const double i_tau_bs = fisher_delay_bs(cfg, ups_bs, FisherOptions{});
    const double i_theta = fisher_angle(cfg, ups_bs, theta, FisherOptions{});
    if (i_tau_bs <= 0.0 || i_theta <= 0.0)
        throw std::domain_error("ue_admissible_region: degenerate mono information");

    const double c2 = cfg.c * cfg.c;
    const double a = r_b * r_b / i_theta;
    const double b = c2 / (4.0 * i_tau_bs);
    const double c_mono = a + b;
    const double g2 = gamma_p * gamma_p;

    if (g2 <= std::min(a, b)) {
        reg.branch = UeRegionBranch::empty;
        return reg;
    }
    if (g2 >= c_mono) {
        reg.branch = UeRegionBranch::all_plane;
        reg.area = kInf;
        reg.area_numeric = kInf;
        return reg;
    }

    // bistatic-delay information with the r_U^2 path loss factored out
    const double ups_ue_tilde =
        lb.ups_bar_ue * lb.beta_scale / (r_b * r_b * cfg.eta);
    const double i_tau_ue_tilde = fisher_delay_ue(cfg, ups_ue_tilde, FisherOptions{});

    const double g = (i_tau_ue_tilde / c2) / (c_mono - g2);
    const double p1 = g2 * (a + b) - 2.0 * a * b;
    const double p2 = g2 * (a - b);

    if (p1 >= std::abs(p2)) {
        reg.branch = UeRegionBranch::full_loop;
        reg.psi_lo = 0.0;
        reg.psi_hi = kPi;
    } else {
        reg.branch = UeRegionBranch::partial_loop;
        const double cos_edge = std::clamp(p1 / p2, -1.0, 1.0);
        if (p2 > 0.0) {
            reg.psi_lo = std::acos(cos_edge);
            reg.psi_hi = kPi;
        } else {
            reg.psi_lo = 0.0;
            reg.psi_hi = std::acos(cos_edge);
        }
    }

    // antiderivative of (1 + cos psi)(P1 - P2 cos psi)
    auto anti = [&](double psi) {
        return (p1 - p2 / 2.0) * psi + (p1 - p2) * std::sin(psi) -
               p2 / 4.0 * std::sin(2.0 * psi);
    };
    reg.area = g * (anti(reg.psi_hi) - anti(reg.psi_lo));

    auto r_sq = [&](double psi) {
        return std::max(0.0, g * (1.0 + std::cos(psi)) * (p1 - p2 * std::cos(psi)));
    };
    // mirrored halves: area = 2 * (1/2) * integral of r_U^2 over [psi_lo, psi_hi]
    reg.area_numeric = simpson(r_sq, reg.psi_lo, reg.psi_hi, 4096);

    const int n_samp = 513;
    for (int i = 0; i < n_samp; ++i) {
        const double psi = reg.psi_lo + (reg.psi_hi - reg.psi_lo) * i / (n_samp - 1);
        reg.psi.push_back(psi);
        reg.r_u.push_back(std::sqrt(r_sq(psi)));
    }
    return reg;
}

double peb_cdf(const OfdmConfig& cfg, const LinkBudget& lb, const Vec2& q, double lambda,
               double gamma_p) {
    if (lambda < 0.0)
        throw std::invalid_argument("peb_cdf: lambda must be non-negative");
    const UeRegion reg = ue_admissible_region(cfg, lb, q, gamma_p);
    if (reg.branch == UeRegionBranch::empty)
        return 0.0;
    if (reg.branch == UeRegionBranch::all_plane)
        return 1.0;  // mono sensing alone already meets the threshold
    return 1.0 - std::exp(-lambda * reg.area);
}

}  // namespace isac
