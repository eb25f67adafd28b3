#include "isac/crlb.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace isac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCollinearTol = 1e-12;  // |sin(psi)| below this is collinear

PositionBound make_bound(double crlb, const FisherSet& fs) {
    PositionBound b;
    b.crlb = crlb;
    b.peb = std::sqrt(crlb);
    b.i_tau_bs = fs.i_tau_bs;
    b.i_theta = fs.i_theta;
    b.i_tau_ue = fs.i_tau_ue;
    return b;
}

void check_finite(const FisherSet& fs) {
    if (!std::isfinite(fs.i_tau_bs) || !std::isfinite(fs.i_theta) ||
        !std::isfinite(fs.i_tau_ue) || !std::isfinite(fs.i_fd_bs) ||
        !std::isfinite(fs.i_fd_ue))
        throw std::domain_error("crlb: Fisher informations must be finite");
}

}  // namespace

MonoCoeffs mono_coeffs(const OfdmConfig& cfg, const LinkBudget& lb,
                       const FisherOptions& opts) {
    const double pi2 = kPi * kPi;
    const double n_r = cfg.rx_antennas;
    const double km = static_cast<double>(cfg.subcarriers) * cfg.symbols;
    const double k2 = opts.large_k_approx
                          ? static_cast<double>(cfg.subcarriers) * cfg.subcarriers
                          : static_cast<double>(cfg.subcarriers) * cfg.subcarriers - 1.0;
    const double ups = lb.ups_bar_bs * lb.beta_scale / cfg.eta;
    MonoCoeffs c;
    c.c1 = 6.0 / (pi2 * n_r * km * (n_r * n_r - 1.0) * ups);
    c.c2 = 3.0 * cfg.c * cfg.c / (8.0 * pi2 * n_r * km * cfg.delta_f * cfg.delta_f * k2 * ups);
    return c;
}

DelayOnlyCoeffs delay_only_coeffs(const OfdmConfig& cfg, const LinkBudget& lb,
                                  const FisherOptions& opts) {
    const double pi2 = kPi * kPi;
    const double km = static_cast<double>(cfg.subcarriers) * cfg.symbols;
    const double k2 = opts.large_k_approx
                          ? static_cast<double>(cfg.subcarriers) * cfg.subcarriers
                          : static_cast<double>(cfg.subcarriers) * cfg.subcarriers - 1.0;
    const double df2 = cfg.delta_f * cfg.delta_f;
    const double c2 = cfg.c * cfg.c;
    DelayOnlyCoeffs r;
    r.c3 = 3.0 * c2 / (2.0 * pi2 * df2 * k2 * km * lb.ups_bar_ue * lb.beta_scale / cfg.eta);
    r.c4 = 3.0 * c2 /
           (4.0 * pi2 * df2 * k2 * km * cfg.rx_antennas * lb.ups_bar_bs * lb.beta_scale / cfg.eta);
    return r;
}

VelocityCoeffs velocity_coeffs(const OfdmConfig& cfg, const LinkBudget& lb) {
    const double pi2 = kPi * kPi;
    const double ts = cfg.symbol_duration_cp();
    const double m = cfg.symbols;
    const double km_m2 = cfg.subcarriers * m * (m * m - 1.0);
    const double lam2 = cfg.lambda_c() * cfg.lambda_c();
    VelocityCoeffs v;
    v.c5 = 3.0 * lam2 / (2.0 * pi2 * ts * ts * km_m2 * lb.ups_bar_ue * lb.beta_scale / cfg.eta);
    v.c6 = 3.0 * lam2 /
           (4.0 * pi2 * ts * ts * km_m2 * cfg.rx_antennas * lb.ups_bar_bs * lb.beta_scale / cfg.eta);
    return v;
}

PositionBound crlb_hybrid_position(const FisherSet& fs, const SceneGeometry& g, double c) {
    check_finite(fs);
    const double c2 = c * c;
    const double rb2 = g.r_b * g.r_b;
    double sin_psi = std::sin(g.psi);
    double cos_psi = std::cos(g.psi);
    if (std::abs(sin_psi) < kCollinearTol) {
        sin_psi = 0.0;
        cos_psi = cos_psi > 0.0 ? 1.0 : -1.0;
    }
    const double one_pc = 1.0 + cos_psi;
    const double num = 4.0 * c2 * rb2 * fs.i_tau_bs + c2 * c2 * fs.i_theta +
                       2.0 * c2 * rb2 * one_pc * fs.i_tau_ue;
    const double den = 4.0 * c2 * fs.i_tau_bs * fs.i_theta +
                       4.0 * rb2 * fs.i_tau_bs * fs.i_tau_ue * sin_psi * sin_psi +
                       c2 * fs.i_theta * fs.i_tau_ue * one_pc * one_pc;
    if (den <= 0.0)
        return make_bound(kInf, fs);
    return make_bound(num / den, fs);
}

PositionBound crlb_mono_position(const OfdmConfig& cfg, const LinkBudget& lb,
                                 const SceneGeometry& g, const FisherOptions& opts) {
    const MonoCoeffs co = mono_coeffs(cfg, lb, opts);
    const double rb2 = g.r_b * g.r_b;
    const double rb4 = rb2 * rb2;
    const double cs = std::cos(g.theta);
    FisherSet fs;  // for the component record
    const ReceiveSnr snr{lb.ups_bar_bs * lb.beta_scale / (rb4 * cfg.eta), 0.0};
    fs.i_tau_bs = fisher_delay_bs(cfg, snr.ups_bs, opts);
    fs.i_theta = fisher_angle(cfg, snr.ups_bs, g.theta, opts);
    if (opts.use_angle_prior)
        return crlb_mono_from_fisher(fs, g.r_b, cfg.c);
    if (cs == 0.0 || fs.i_theta <= 0.0)
        return make_bound(kInf, fs);
    return make_bound(co.c1 * rb4 * rb2 / (cs * cs) + co.c2 * rb4, fs);
}

PositionBound crlb_mono_from_fisher(const FisherSet& fs, double r_b, double c) {
    check_finite(fs);
    FisherSet mono = fs;
    mono.i_tau_ue = 0.0;
    if (mono.i_theta <= 0.0 || mono.i_tau_bs <= 0.0)
        return make_bound(kInf, mono);
    return make_bound(r_b * r_b / mono.i_theta + c * c / (4.0 * mono.i_tau_bs), mono);
}

PositionBound crlb_single_antenna_position(const FisherSet& fs, const SceneGeometry& g,
                                           double c) {
    check_finite(fs);
    FisherSet used = fs;
    used.i_theta = 0.0;
    const double sin_psi = std::sin(g.psi);
    const double cos_psi = std::cos(g.psi);
    if (std::abs(sin_psi) < kCollinearTol || used.i_tau_ue <= 0.0 || used.i_tau_bs <= 0.0)
        return make_bound(kInf, used);
    const double c2 = c * c;
    return make_bound(c2 / (used.i_tau_ue * sin_psi * sin_psi) +
                          c2 / (2.0 * (1.0 - cos_psi) * used.i_tau_bs),
                      used);
}

double crlb_fusion_gain(const FisherSet& fs, const SceneGeometry& g, double c) {
    check_finite(fs);
    if (fs.i_tau_bs <= 0.0 || fs.i_theta <= 0.0)
        throw std::domain_error("crlb_fusion_gain: mono bound must be finite");
    const double c2 = c * c;
    const double rb2 = g.r_b * g.r_b;
    const double rb4 = rb2 * rb2;
    double sin_psi = std::sin(g.psi);
    double cos_psi = std::cos(g.psi);
    if (std::abs(sin_psi) < kCollinearTol) {
        sin_psi = 0.0;
        cos_psi = cos_psi > 0.0 ? 1.0 : -1.0;
    }
    const double one_pc = 1.0 + cos_psi;
    const double num = 16.0 * fs.i_tau_bs * fs.i_tau_bs * rb4 * sin_psi * sin_psi +
                       c2 * c2 * fs.i_theta * fs.i_theta * one_pc * one_pc;
    const double den = 4.0 * c2 * fs.i_tau_bs * fs.i_theta +
                       4.0 * rb2 * fs.i_tau_bs * fs.i_tau_ue * sin_psi * sin_psi +
                       c2 * fs.i_theta * fs.i_tau_ue * one_pc * one_pc;
    return fs.i_tau_ue / (4.0 * fs.i_tau_bs * fs.i_theta) * num / den;
}

PositionBound crlb_position_limit(const FisherSet& fs, const SceneGeometry& g, double c) {
    check_finite(fs);
    const double a = fs.i_theta > 0.0 ? g.r_b * g.r_b / fs.i_theta : kInf;
    const double b = fs.i_tau_bs > 0.0 ? c * c / (4.0 * fs.i_tau_bs) : kInf;
    return make_bound(std::min(a, b), fs);
}

VelocityBound crlb_velocity(const OfdmConfig& cfg, const FisherSet& fs,
                            const SceneGeometry& g) {
    check_finite(fs);
    VelocityBound vb;
    const double sin_psi = std::sin(g.psi);
    const double cos_psi = std::cos(g.psi);
    if (std::abs(sin_psi) < kCollinearTol || fs.i_fd_bs <= 0.0 || fs.i_fd_ue <= 0.0) {
        vb.crlb = kInf;
        vb.veb = kInf;
        return vb;
    }
    const double lam2 = cfg.lambda_c() * cfg.lambda_c();
    vb.crlb = lam2 / (fs.i_fd_ue * sin_psi * sin_psi) +
              lam2 / (2.0 * fs.i_fd_bs * (1.0 - cos_psi));
    vb.veb = std::sqrt(vb.crlb);
    return vb;
}

double optimal_bistatic_angle(double rho) {
    if (rho <= 0.0)
        throw std::domain_error("optimal_bistatic_angle: rho must be positive");
    const double arg = 2.0 * std::sqrt(rho * (rho + 1.0)) - 2.0 * rho - 1.0;
    return std::acos(std::clamp(arg, -1.0, 1.0));
}

double crlb_numeric_oracle(const OfdmConfig& cfg, const FisherSet& fs,
                           const SceneGeometry& g, BoundKind which) {
    check_finite(fs);
    const double x = g.q.x, y = g.q.y;
    const double xu = g.q_u.x, yu = g.q_u.y;
    const double rb = g.r_b, ru = g.r_u;
    const double c = cfg.c;

    double a11, a12, a21, a22;  // entries of J' I J
    double det = 0.0;  // Cauchy-Binet form, immune to the a11 a22 - a12^2 cancellation
    if (which == BoundKind::position) {
        const double j[3][2] = {
            {2.0 * x / (c * rb), 2.0 * y / (c * rb)},
            {-y / (rb * rb), x / (rb * rb)},
            {x / (c * rb) + (x - xu) / (c * ru), y / (c * rb) + (y - yu) / (c * ru)}};
        const double w[3] = {fs.i_tau_bs, fs.i_theta, fs.i_tau_ue};
        a11 = a12 = a22 = 0.0;
        for (int i = 0; i < 3; ++i) {
            a11 += w[i] * j[i][0] * j[i][0];
            a12 += w[i] * j[i][0] * j[i][1];
            a22 += w[i] * j[i][1] * j[i][1];
        }
        a21 = a12;
        for (int i = 0; i < 3; ++i)
            for (int k = i + 1; k < 3; ++k) {
                const double cross = j[i][0] * j[k][1] - j[i][1] * j[k][0];
                det += w[i] * w[k] * cross * cross;
            }
    } else {
        const double lam = cfg.lambda_c();
        const double utx = -x / rb, uty = -y / rb;
        const double usx = (xu - x) / ru, usy = (yu - y) / ru;
        const double j[2][2] = {{2.0 * utx / lam, 2.0 * uty / lam},
                                {(utx + usx) / lam, (uty + usy) / lam}};
        const double w[2] = {fs.i_fd_bs, fs.i_fd_ue};
        a11 = a12 = a22 = 0.0;
        for (int i = 0; i < 2; ++i) {
            a11 += w[i] * j[i][0] * j[i][0];
            a12 += w[i] * j[i][0] * j[i][1];
            a22 += w[i] * j[i][1] * j[i][1];
        }
        a21 = a12;
        const double cross = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        det = w[0] * w[1] * cross * cross;
    }
    (void)a21;
    if (!(det > 0.0) || !std::isfinite(det))
        return std::numeric_limits<double>::infinity();
    return (a11 + a22) / det;
}

}  // namespace isac
