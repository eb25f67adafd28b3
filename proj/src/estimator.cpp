#include "isac/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <fftw3.h>

#include "isac/rng.hpp"

namespace isac {

namespace {

// FFTW planning is not thread-safe; plans are cached per (size, sign) and
// executed through the new-array interface on caller buffers.
class PlanCache {
  public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    void execute(std::vector<cplx>& in, std::vector<cplx>& out, int sign) {
        const int n = static_cast<int>(in.size());
        out.resize(in.size());
        fftw_plan plan;
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto key = std::make_pair(n, sign);
            auto it = plans_.find(key);
            if (it == plans_.end()) {
                std::vector<cplx> tmp_in(n), tmp_out(n);
                plan = fftw_plan_dft_1d(
                    n, reinterpret_cast<fftw_complex*>(tmp_in.data()),
                    reinterpret_cast<fftw_complex*>(tmp_out.data()), sign,
                    FFTW_ESTIMATE | FFTW_UNALIGNED);
                if (!plan)
                    throw std::runtime_error("fftw: planning failed");
                plans_.emplace(key, plan);
            } else {
                plan = it->second;
            }
        }
        fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
    }

  private:
    PlanCache() = default;
    std::mutex mu_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

size_t argmax_abs(const std::vector<cplx>& v) {
    size_t best = 0;
    double best_mag = -1.0;
    for (size_t i = 0; i < v.size(); ++i) {
        const double m = std::norm(v[i]);
        if (m > best_mag) {
            best_mag = m;
            best = i;
        }
    }
    return best;
}

// Delay search: peak of sum_k x_k e^{+j2pi k b/N} over the oversampled grid.
std::pair<double, bool> delay_peak(const std::vector<cplx>& x, int n_fft, double delta_f) {
    std::vector<cplx> in(n_fft, cplx(0.0, 0.0)), out;
    std::copy(x.begin(), x.end(), in.begin());
    PlanCache::instance().execute(in, out, FFTW_BACKWARD);
    const size_t b = argmax_abs(out);
    const double tau = static_cast<double>(b) / (static_cast<double>(n_fft) * delta_f);
    return {tau, b + 1 == static_cast<size_t>(n_fft)};
}

// Doppler search: peak of sum_m z_m e^{-j2pi m b/N}; wraps to signed frequency.
double doppler_peak(const std::vector<cplx>& z, int n_fft, double ts) {
    std::vector<cplx> in(n_fft, cplx(0.0, 0.0)), out;
    std::copy(z.begin(), z.end(), in.begin());
    PlanCache::instance().execute(in, out, FFTW_FORWARD);
    const size_t b = argmax_abs(out);
    double f = static_cast<double>(b) / (static_cast<double>(n_fft) * ts);
    if (f >= 0.5 / ts)
        f -= 1.0 / ts;
    return f;
}

struct DelayDoppler {
    double tau = 0.0;
    double fd = 0.0;
    bool wrapped = false;
};

// Algorithm lines 5-6 on a K x M matrix (index k*M + m).
DelayDoppler delay_doppler(const std::vector<cplx>& ykm, int k, int m,
                           const OfdmConfig& cfg, const FftOversampling& os) {
    std::vector<cplx> s_k(k, cplx(0.0, 0.0));
    for (int kk = 0; kk < k; ++kk)
        for (int mm = 0; mm < m; ++mm) s_k[kk] += ykm[kk * m + mm];

    DelayDoppler dd;
    const auto [tau, wrapped] = delay_peak(s_k, os.l_tau * k, cfg.delta_f);
    dd.tau = tau;
    dd.wrapped = wrapped;

    // coherent subcarrier summation with the estimated delay compensated
    std::vector<cplx> z_m(m, cplx(0.0, 0.0));
    for (int kk = 0; kk < k; ++kk) {
        const cplx comp = std::polar(1.0, 2.0 * kPi * kk * cfg.delta_f * dd.tau);
        for (int mm = 0; mm < m; ++mm) z_m[mm] += comp * ykm[kk * m + mm];
    }
    dd.fd = doppler_peak(z_m, os.l_doppler * m, cfg.symbol_duration_cp());
    return dd;
}

}  // namespace

BsEstimate estimate_bs(const RxGrid& grid, const OfdmConfig& cfg,
                       const FftOversampling& os) {
    if (grid.bs.empty())
        throw std::invalid_argument("estimate_bs: empty grid");
    const int n_r = grid.n_r, k = grid.k, m = grid.m;
    const size_t km = static_cast<size_t>(k) * m;

    // incoherent angle periodogram via the spatial covariance: the power
    // summed over all (k, m) cells equals e(u)^H R e(u), which needs a single
    // transform of the antenna-lag sums instead of one FFT per cell
    std::vector<cplx> lag(n_r, cplx(0.0, 0.0));
    double trace = 0.0;
    for (size_t i = 0; i < km; ++i) {
        for (int p = 0; p < n_r; ++p) {
            const cplx yp = grid.bs[p * km + i];
            trace += std::norm(yp);
            for (int d = 1; p + d < n_r; ++d)
                lag[d] += yp * std::conj(grid.bs[(p + d) * km + i]);
        }
    }
    const int n_th = os.l_theta * n_r;
    std::vector<cplx> in(n_th, cplx(0.0, 0.0)), out;
    for (int d = 1; d < n_r; ++d) in[d] = lag[d];
    PlanCache::instance().execute(in, out, FFTW_BACKWARD);

    size_t best = 0;
    double best_p = -1.0;
    for (int b = 0; b < n_th; ++b) {
        const double p = trace + 2.0 * out[b].real();
        if (p > best_p) {
            best_p = p;
            best = b;
        }
    }
    double u = 2.0 * static_cast<double>(best) / n_th;
    if (u >= 1.0)
        u -= 2.0;
    BsEstimate est;
    est.theta = std::asin(std::clamp(u, -1.0, 1.0));

    // beamform toward the estimated angle
    std::vector<cplx> ykm(km, cplx(0.0, 0.0));
    const double su = std::sin(est.theta);
    for (int n = 0; n < n_r; ++n) {
        const cplx w = std::polar(1.0, -kPi * n * su);
        for (size_t i = 0; i < km; ++i) ykm[i] += w * grid.bs[n * km + i];
    }
    const DelayDoppler dd = delay_doppler(ykm, k, m, cfg, os);
    est.tau_bs = dd.tau;
    est.fd_bs = dd.fd;
    est.delay_wrapped = dd.wrapped;
    return est;
}

UeEstimate estimate_ue(const RxGrid& grid, const OfdmConfig& cfg,
                       const FftOversampling& os) {
    if (grid.ue.empty())
        throw std::invalid_argument("estimate_ue: empty grid");
    const DelayDoppler dd = delay_doppler(grid.ue, grid.k, grid.m, cfg, os);
    return {dd.tau, dd.fd, dd.wrapped};
}

Vec2 localize_mono(double theta, double tau_bs, const OfdmConfig& cfg) {
    if (tau_bs <= 0.0)
        throw std::domain_error("localize_mono: tau_B must be positive");
    const double r = cfg.c * tau_bs / 2.0;
    return {r * std::cos(theta), r * std::sin(theta)};
}

HybridFix localize_hybrid(double theta, double tau_bs, double tau_ue, const FisherSet& fs,
                          const Vec2& q_u, const Vec2& init, const OfdmConfig& cfg) {
    const double c = cfg.c;
    const double w_tb = fs.i_tau_bs > 0.0 ? std::sqrt(fs.i_tau_bs) : 0.0;
    const double w_th = fs.i_theta > 0.0 ? std::sqrt(fs.i_theta) : 0.0;
    const double w_tu = fs.i_tau_ue > 0.0 ? std::sqrt(fs.i_tau_ue) : 0.0;

    auto objective = [&](const Vec2& q, double r[3]) {
        const double rb = q.norm();
        const double ru = (q - q_u).norm();
        r[0] = w_tb * (tau_bs - 2.0 * rb / c);
        r[1] = w_th * (theta - std::atan2(q.y, q.x));
        r[2] = w_tu * (tau_ue - (rb + ru) / c);
        return r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
    };

    HybridFix fix;
    fix.q = init;
    double r[3];
    double obj = objective(fix.q, r);
    for (int it = 0; it < 50; ++it) {
        fix.iterations = it + 1;
        const double rb = fix.q.norm();
        const double ru = (fix.q - q_u).norm();
        if (rb <= 0.0 || ru <= 0.0)
            break;
        // weighted Jacobian of the measurement map
        const double j[3][2] = {
            {w_tb * 2.0 * fix.q.x / (c * rb), w_tb * 2.0 * fix.q.y / (c * rb)},
            {w_th * -fix.q.y / (rb * rb), w_th * fix.q.x / (rb * rb)},
            {w_tu * (fix.q.x / rb + (fix.q.x - q_u.x) / ru) / c,
             w_tu * (fix.q.y / rb + (fix.q.y - q_u.y) / ru) / c}};
        double a11 = 0, a12 = 0, a22 = 0, g1 = 0, g2 = 0;
        for (int i = 0; i < 3; ++i) {
            a11 += j[i][0] * j[i][0];
            a12 += j[i][0] * j[i][1];
            a22 += j[i][1] * j[i][1];
            g1 += j[i][0] * r[i];
            g2 += j[i][1] * r[i];
        }
        const double det = a11 * a22 - a12 * a12;
        if (det <= 0.0)
            break;
        Vec2 step{(a22 * g1 - a12 * g2) / det, (-a12 * g1 + a11 * g2) / det};

        // damped acceptance: halve the step until the objective decreases
        double scale = 1.0;
        bool accepted = false;
        for (int half = 0; half < 20; ++half) {
            const Vec2 cand = fix.q + step * scale;
            double rc[3];
            const double cand_obj = objective(cand, rc);
            if (cand_obj <= obj) {
                fix.q = cand;
                obj = cand_obj;
                std::copy(rc, rc + 3, r);
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted)
            break;
        if ((step * scale).norm() < 1e-9) {
            fix.converged = true;
            break;
        }
    }
    fix.objective = obj;
    return fix;
}

Vec2 estimate_velocity(double fd_bs, double fd_ue, const Vec2& q_hat, const Vec2& q_u,
                       const OfdmConfig& cfg) {
    const double rb = q_hat.norm();
    const double ru = (q_u - q_hat).norm();
    if (rb <= 0.0 || ru <= 0.0)
        throw std::domain_error("estimate_velocity: degenerate position estimate");
    const Vec2 ut = q_hat / -rb;
    const Vec2 us = (q_u - q_hat) / ru;
    const double a11 = 2.0 * ut.x, a12 = 2.0 * ut.y;
    const double a21 = ut.x + us.x, a22 = ut.y + us.y;
    const double det = a11 * a22 - a12 * a21;

    // 2x2 condition number from the exact singular values
    const double fro2 = a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22;
    const double root = std::sqrt(std::max(0.0, fro2 * fro2 / 4.0 - det * det));
    const double smax2 = fro2 / 2.0 + root;
    const double smin2 = fro2 / 2.0 - root;
    if (!(smin2 > 0.0) || std::sqrt(smax2 / smin2) > 1e12)
        throw std::domain_error("estimate_velocity: singular geometry (collinear "
                                "BS-target-UE)");

    const double lam = cfg.lambda_c();
    const double b1 = lam * fd_bs, b2 = lam * fd_ue;
    return {(a22 * b1 - a12 * b2) / det, (-a21 * b1 + a11 * b2) / det};
}

std::vector<MonteCarloRow> monte_carlo(const Scenario& scenario, const Vec2& velocity,
                                       const std::vector<double>& snr_db_sweep, int trials,
                                       std::uint64_t master_seed,
                                       const MonteCarloOptions& opts) {
    if (trials < 1)
        throw std::invalid_argument("monte_carlo: trials must be >= 1");
    if (!scenario.has_ue)
        throw std::invalid_argument("monte_carlo: scenario needs a UE position");
    const OfdmConfig& cfg = scenario.ofdm;
    const SceneGeometry g = scenario.geometry();
    const ReceiveSnr base = receive_snr(cfg, scenario.link_budget, g);

    std::vector<MonteCarloRow> rows;
    for (size_t si = 0; si < snr_db_sweep.size(); ++si) {
        const double target_bs = db_to_linear(snr_db_sweep[si]);
        const ReceiveSnr snr{target_bs, base.ups_ue * target_bs / base.ups_bs};
        const FisherSet fs = fisher_set(cfg, snr, g.theta);

        MonteCarloRow row;
        row.snr_db = snr_db_sweep[si];
        row.trials = trials;
        row.seed = master_seed;
        row.peb_mono = crlb_mono_from_fisher(fs, g.r_b, cfg.c).peb;
        row.peb_h = crlb_hybrid_position(fs, g, cfg.c).peb;
        row.veb = crlb_velocity(cfg, fs, g).veb;

        std::vector<EstimateRecord> recs(trials);
        auto run_trial = [&](int t) {
            const std::uint64_t seed =
                derive_seed(master_seed, static_cast<std::uint64_t>(si) * 1000003u + t);
            Rng phase_rng(splitmix64(seed));
            const ChannelParams ch = truth_channel(cfg, g, velocity, snr, &phase_rng);
            SynthOptions sopts;
            sopts.noiseless = opts.noiseless;
            const RxGrid grid = synthesize(cfg, ch, seed, sopts);
            const RxGrid clean = remove_data(grid);

            EstimateRecord rec;
            rec.bs = estimate_bs(clean, cfg, opts.oversampling);
            rec.ue = estimate_ue(clean, cfg, opts.oversampling);
            rec.q_mono = localize_mono(rec.bs.theta, rec.bs.tau_bs, cfg);
            const HybridFix fix = localize_hybrid(rec.bs.theta, rec.bs.tau_bs,
                                                  rec.ue.tau_ue, fs, g.q_u, rec.q_mono, cfg);
            rec.q_h = fix.q;
            rec.v_hat = estimate_velocity(rec.bs.fd_bs, rec.ue.fd_ue, rec.q_h, g.q_u, cfg);

            const Vec2 em = rec.q_mono - g.q;
            const Vec2 eh = rec.q_h - g.q;
            const Vec2 ev = rec.v_hat - velocity;
            rec.sq_err_mono = em.dot(em);
            rec.sq_err_h = eh.dot(eh);
            rec.sq_err_vel = ev.dot(ev);
            recs[t] = rec;
        };

        const int n_threads = std::max(1, opts.threads);
        if (n_threads == 1) {
            for (int t = 0; t < trials; ++t) run_trial(t);
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < n_threads; ++w)
                pool.emplace_back([&, w] {
                    for (int t = w; t < trials; t += n_threads) run_trial(t);
                });
            for (auto& th : pool) th.join();
        }

        double sm = 0, sh = 0, sv = 0;  // ordered reduction for determinism
        for (const auto& rec : recs) {
            sm += rec.sq_err_mono;
            sh += rec.sq_err_h;
            sv += rec.sq_err_vel;
        }
        row.rmse_pos_mono = std::sqrt(sm / trials);
        row.rmse_pos_h = std::sqrt(sh / trials);
        row.rmse_vel = std::sqrt(sv / trials);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace isac
