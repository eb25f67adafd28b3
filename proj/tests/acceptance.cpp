// Acceptance gate: one line per criterion, nonzero exit if any fails.
// Run through ctest or directly; runtimes are checked where the criterion
// demands them.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "isac/coverage.hpp"
#include "isac/estimator.hpp"
#include "isac/rng.hpp"
#include "reference_config.hpp"

using namespace isac;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    std::printf("criterion %d: %s - %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    if (!pass)
        ++failures;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const OfdmConfig cfg = ref_config();
const LinkBudget lb = ref_link_budget();

FisherSet fisher_at(const SceneGeometry& g) {
    return fisher_set(cfg, receive_snr(cfg, lb, g), g.theta);
}

// 1. closed forms vs the Jacobian trace oracle on 1e4 random geometries
void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(0x1000ULL);
    double worst = 0.0;
    int tested = 0;
    while (tested < 10000) {
        const Vec2 q{rng.uniform(-400.0, 400.0), rng.uniform(-400.0, 400.0)};
        const Vec2 qu{rng.uniform(-400.0, 400.0), rng.uniform(-400.0, 400.0)};
        if (q.norm() < 10.0 || (qu - q).norm() < 10.0)
            continue;
        const SceneGeometry g = derive_geometry(q, qu);
        if (std::abs(std::sin(g.psi)) < 1e-2 || std::abs(std::cos(g.theta)) < 1e-2)
            continue;
        ++tested;
        const FisherSet fs = fisher_at(g);

        auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
        worst = std::max(worst, rel(crlb_hybrid_position(fs, g, cfg.c).crlb,
                                    crlb_numeric_oracle(cfg, fs, g, BoundKind::position)));
        FisherSet mono = fs;
        mono.i_tau_ue = 0.0;
        worst = std::max(worst, rel(crlb_mono_from_fisher(fs, g.r_b, cfg.c).crlb,
                                    crlb_numeric_oracle(cfg, mono, g, BoundKind::position)));
        FisherSet single = fs;
        single.i_theta = 0.0;
        worst = std::max(worst,
                         rel(crlb_single_antenna_position(fs, g, cfg.c).crlb,
                             crlb_numeric_oracle(cfg, single, g, BoundKind::position)));
        worst = std::max(worst, rel(crlb_velocity(cfg, fs, g).crlb,
                                    crlb_numeric_oracle(cfg, fs, g, BoundKind::velocity)));
    }
    const double dt = elapsed_s(t0);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "closed forms vs numeric oracle, max rel err %.2e (< 1e-9), %.1f s (< 10 s)",
                  worst, dt);
    report(1, worst < 1e-9 && dt < 10.0, buf);
}

// 2. published point values at q = [200, 50] with the 98 dB budget
void criterion_2() {
    const SceneGeometry g = derive_geometry({200.0, 50.0}, {0.0, 300.0});
    const FisherSet fs = fisher_at(g);
    const double peb_mono = crlb_mono_from_fisher(fs, g.r_b, cfg.c).peb;
    const double peb_lim = crlb_position_limit(fs, g, cfg.c).peb;

    auto within = [](double got, double want) { return std::abs(got / want - 1.0) < 0.02; };
    const bool mono_ok = within(peb_mono, 0.96) || within(peb_mono, 0.9134);
    const bool lim_ok = within(peb_lim, 0.1081);

    char buf[320];
    std::snprintf(buf, sizeof(buf),
                  "PEB_mono %.4f m vs published 0.96/0.9134 m, PEB_limit %.4f m vs "
                  "published 0.1081 m; the stated Fisher expressions give values "
                  "pi-fold smaller than the published examples (%.4f and %.4f m "
                  "without the pi^2 factor, which match within 2%%); see the release "
                  "notes for the full discrepancy analysis",
                  peb_mono, peb_lim, peb_mono * kPi, peb_lim * kPi);
    report(2, mono_ok && lim_ok, buf);
}

// 3. fusion gain non-negative, exactly zero behind the target
void criterion_3() {
    Rng rng(0x3000ULL);
    bool ok = true;
    int tested = 0;
    while (tested < 100000) {
        const Vec2 q{rng.uniform(-400.0, 400.0), rng.uniform(-400.0, 400.0)};
        const Vec2 qu{rng.uniform(-400.0, 400.0), rng.uniform(-400.0, 400.0)};
        if (q.norm() < 5.0 || (qu - q).norm() < 5.0)
            continue;
        ++tested;
        const SceneGeometry g = derive_geometry(q, qu);
        if (crlb_fusion_gain(fisher_at(g), g, cfg.c) < 0.0)
            ok = false;
    }
    // equality when the UE sits on the BS-target ray beyond the target
    Rng rng2(0x3001ULL);
    for (int i = 0; i < 200; ++i) {
        const Vec2 q{rng2.uniform(-300.0, 300.0), rng2.uniform(20.0, 300.0)};
        const SceneGeometry g = derive_geometry(q, q * rng2.uniform(1.2, 3.0));
        const FisherSet fs = fisher_at(g);
        const double mono = crlb_mono_from_fisher(fs, g.r_b, cfg.c).crlb;
        if (std::abs(crlb_fusion_gain(fs, g, cfg.c)) >= 1e-9 * mono)
            ok = false;
    }
    report(3, ok, "fusion gain >= 0 on 1e5 geometries, = 0 at psi = pi");
}

// 4. velocity-CRLB argmin over psi vs the arccos expression
void criterion_4() {
    bool ok = true;
    char buf[200];
    std::string detail;
    for (double rho : {0.1, 1.0, 10.0, 100.0}) {
        const double i_u = 1.0, i_b = rho;
        double best_psi = 0.0, best = 1e300;
        for (double psi = 1e-4; psi < kPi; psi += 1e-4) {
            const double v = 1.0 / (i_u * std::sin(psi) * std::sin(psi)) +
                             1.0 / (2.0 * i_b * (1.0 - std::cos(psi)));
            if (v < best) {
                best = v;
                best_psi = psi;
            }
        }
        const double closed = optimal_bistatic_angle(rho);
        if (std::abs(best_psi - closed) > 1e-4 + 1e-12 || closed <= kPi / 2.0 ||
            closed >= kPi)
            ok = false;
        std::snprintf(buf, sizeof(buf), "rho=%g: grid %.5f vs closed %.5f; ", rho,
                      best_psi, closed);
        detail += buf;
    }
    report(4, ok, detail + "all within one 1e-4 grid step, inside (pi/2, pi)");
}

// 5. Monte-Carlo RMSE against the bounds at 500 trials per SNR point
void criterion_5() {
    const auto t0 = std::chrono::steady_clock::now();
    Scenario s;
    s.ofdm = cfg;
    s.link_budget = lb;
    s.target = {200.0, 50.0};
    s.ue = {0.0, 300.0};
    s.has_ue = true;
    MonteCarloOptions opts;
    const auto rows = monte_carlo(s, {20.0, 0.0}, {10.0, 15.0, 20.0}, 500, 90210, opts);
    const MonteCarloRow& top = rows.back();
    const double rm = top.rmse_pos_mono / top.peb_mono;
    const double rh = top.rmse_pos_h / top.peb_h;
    const double rv = top.rmse_vel / top.veb;
    const double dt = elapsed_s(t0);
    const bool ok = rm >= 0.75 && rm <= 1.5 && rh >= 0.75 && rh <= 1.5 && rv >= 0.6 &&
                    rv <= 1.5 && dt < 300.0;
    char buf[240];
    std::snprintf(buf, sizeof(buf),
                  "at 20 dB: RMSE/bound mono %.3f, hybrid %.3f (in [0.75, 1.5]), "
                  "velocity %.3f (in [0.6, 1.5]); %.0f s (< 300 s)",
                  rm, rh, rv, dt);
    report(5, ok, buf);
}

// 6. closed-form mono coverage vs polar quadrature and the 2/3 power law
void criterion_6() {
    bool ok = true;
    char buf[200];
    std::string detail;
    for (double gp : {0.5, 1.0, 2.0}) {
        const double closed = coverage_mono_closed(cfg, lb, gp).area;
        const double polar = coverage_mono_polar(cfg, lb, gp);
        const double err = std::abs(closed / polar - 1.0);
        if (err > 0.02)
            ok = false;
        std::snprintf(buf, sizeof(buf), "gamma_p=%g: %.4g vs %.4g m^2 (%.2f%%); ", gp,
                      closed, polar, 100.0 * err);
        detail += buf;
    }
    // least-squares slope of log area vs log gamma_p
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (double gp = 0.5; gp <= 2.0 + 1e-9; gp += 0.1875) {
        const double x = std::log(gp), y = std::log(coverage_mono_closed(cfg, lb, gp).area);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    if (std::abs(slope - 2.0 / 3.0) > 0.03)
        ok = false;
    std::snprintf(buf, sizeof(buf), "fitted exponent %.4f (2/3 +- 0.03)", slope);
    report(6, ok, detail + buf);
}

// 7. the area coefficients from first principles
void criterion_7() {
    const MonoCoverageCoeffs co = mono_coverage_coeffs();
    const bool ok =
        std::abs(co.leading - 2.6448) < 0.0005 && std::abs(co.correction - 0.0327) < 0.0001;
    char buf[120];
    std::snprintf(buf, sizeof(buf), "leading %.6f (2.6448 +- 0.0005), correction %.6f "
                  "(0.0327 +- 0.0001)",
                  co.leading, co.correction);
    report(7, ok, buf);
}

// 8. UE-region closed form vs quadrature; CDF vs Poisson simulation
void criterion_8() {
    const Vec2 q{200.0, 50.0};
    bool ok = true;
    char buf[200];
    std::string detail;
    for (double gp = 0.05; gp < 0.305; gp += 0.025) {
        const UeRegion reg = ue_admissible_region(cfg, lb, q, gp);
        if (reg.branch == UeRegionBranch::empty || reg.branch == UeRegionBranch::all_plane)
            continue;
        if (std::abs(reg.area / reg.area_numeric - 1.0) > 0.005)
            ok = false;
    }
    detail += "closed-form region area within 0.5% of quadrature; ";

    // Poisson check: drop UEs in a window containing the region, select the
    // best one by its exact hybrid bound
    Rng rng(0x8000ULL);
    for (double gp : {0.15, 0.25}) {
        const UeRegion reg = ue_admissible_region(cfg, lb, q, gp);
        double r_max = 0.0;
        for (double r : reg.r_u) r_max = std::max(r_max, r);
        const double half = 1.1 * r_max;
        const double window = 4.0 * half * half;
        for (double target_mean : {0.35, 1.2}) {
            const double lambda = target_mean / reg.area;
            const double mean_pts = lambda * window;
            int hits = 0;
            const int reps = 10000;
            for (int rep = 0; rep < reps; ++rep) {
                // Poisson count by inversion
                int n = 0;
                double p = std::exp(-mean_pts), f = p, u = rng.uniform();
                while (u > f && n < 10000) {
                    ++n;
                    p *= mean_pts / n;
                    f += p;
                }
                bool found = false;
                for (int i = 0; i < n && !found; ++i) {
                    const Vec2 ue{q.x + rng.uniform(-half, half),
                                  q.y + rng.uniform(-half, half)};
                    if ((ue - q).norm() < 1e-6)
                        continue;
                    const SceneGeometry g = derive_geometry(q, ue);
                    if (crlb_hybrid_position(fisher_at(g), g, cfg.c).peb <= gp)
                        found = true;
                }
                if (found)
                    ++hits;
            }
            const double want = 1.0 - std::exp(-lambda * reg.area);
            const double got = static_cast<double>(hits) / reps;
            const double sigma = std::sqrt(want * (1.0 - want) / reps);
            if (std::abs(got - want) > 3.0 * sigma)
                ok = false;
            std::snprintf(buf, sizeof(buf), "gp=%.2f lam=%.1e: %.3f vs %.3f (3s=%.3f); ",
                          gp, lambda, got, want, 3.0 * sigma);
            detail += buf;
        }
    }
    report(8, ok, detail);
}

// 9. UE-sweep shape and hybrid-vs-mono coverage ordering
void criterion_9() {
    bool ok = true;
    CoverageQuery query;
    query.region = {-300.0, 300.0, -300.0, 300.0};
    query.cell = 10.0;

    std::vector<double> xs;
    for (double x = 0.0; x <= 300.0 + 1e-9; x += 25.0) xs.push_back(x);

    double prev_star = -1.0;
    std::string detail;
    char buf[120];
    for (double gp : {0.10, 0.15}) {
        query.gamma_p = gp;
        const UeSweep sw = optimal_ue_sweep(cfg, lb, xs, query);
        // unimodal up-then-down with a 2% slack on the discrete differences
        double peak = 0.0;
        for (const auto& p : sw.curve) peak = std::max(peak, p.area);
        size_t peak_idx = 0;
        for (size_t i = 0; i < sw.curve.size(); ++i)
            if (sw.curve[i].area == peak)
                peak_idx = i;
        for (size_t i = 1; i < sw.curve.size(); ++i) {
            const double diff = sw.curve[i].area - sw.curve[i - 1].area;
            if (i <= peak_idx && diff < -0.02 * peak)
                ok = false;
            if (i > peak_idx && diff > 0.02 * peak)
                ok = false;
        }
        if (sw.x_u_star + 25.0 < prev_star)
            ok = false;  // x_U* may not move toward the BS as gamma_p grows
        prev_star = sw.x_u_star;
        std::snprintf(buf, sizeof(buf), "gp=%.2f: x_U*=%.0f m, peak %.3g m^2; ", gp,
                      sw.x_u_star, peak);
        detail += buf;
    }

    for (double gp : {0.10, 0.15, 0.20, 0.25}) {
        query.gamma_p = gp;
        const double mono =
            coverage_numeric(cfg, lb, std::nullopt, query, CoverageCriterion::mono).area;
        const double hybrid =
            coverage_numeric(cfg, lb, Vec2{150.0, 0.0}, query, CoverageCriterion::hybrid)
                .area;
        if (hybrid < mono)
            ok = false;
    }
    report(9, ok, detail + "sweep rise-then-fall, hybrid >= mono at every threshold");
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    if (failures > 0)
        std::printf("%d criterion(s) failing\n", failures);
    else
        std::printf("all criteria passing\n");
    return failures == 0 ? 0 : 1;
}
