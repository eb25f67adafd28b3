#ifndef ISAC_ESTIMATOR_HPP
#define ISAC_ESTIMATOR_HPP

#include <cstdint>
#include <vector>

#include "isac/crlb.hpp"
#include "isac/signal_sim.hpp"

namespace isac {

/// FFT over-sampling factors for the angle, delay and Doppler searches.
struct FftOversampling {
    int l_theta = 2048;
    int l_tau = 1024;
    int l_doppler = 4096;
};

struct BsEstimate {
    double theta = 0.0;   // [rad]
    double tau_bs = 0.0;  // [s]
    double fd_bs = 0.0;   // [Hz]
    bool delay_wrapped = false;  // peak beyond the unambiguous delay range
};

struct UeEstimate {
    double tau_ue = 0.0;
    double fd_ue = 0.0;
    bool delay_wrapped = false;
};

/// Sequential angle -> delay -> Doppler estimation on the data-free BS tensor.
BsEstimate estimate_bs(const RxGrid& grid, const OfdmConfig& cfg,
                       const FftOversampling& os = {});

/// Delay and Doppler estimation on the data-free UE matrix.
UeEstimate estimate_ue(const RxGrid& grid, const OfdmConfig& cfg,
                       const FftOversampling& os = {});

/// q = (c tau_B / 2) [cos(theta), sin(theta)].
Vec2 localize_mono(double theta, double tau_bs, const OfdmConfig& cfg);

struct HybridFix {
    Vec2 q;
    bool converged = false;
    int iterations = 0;
    double objective = 0.0;
};

/// Gauss-Newton minimization of the Fisher-weighted squared residual in
/// (tau_B, theta, tau_U). Residuals with zero information are dropped.
HybridFix localize_hybrid(double theta, double tau_bs, double tau_ue, const FisherSet& fs,
                          const Vec2& q_u, const Vec2& init, const OfdmConfig& cfg);

/// Two-Doppler velocity solve at the estimated position.
Vec2 estimate_velocity(double fd_bs, double fd_ue, const Vec2& q_hat, const Vec2& q_u,
                       const OfdmConfig& cfg);

struct MonteCarloRow {
    double snr_db = 0.0;         // per-element BS receive SNR
    double rmse_pos_mono = 0.0;  // [m]
    double rmse_pos_h = 0.0;     // [m]
    double rmse_vel = 0.0;       // [m/s]
    double peb_mono = 0.0;
    double peb_h = 0.0;
    double veb = 0.0;
    int trials = 0;
    std::uint64_t seed = 0;
};

struct MonteCarloOptions {
    FftOversampling oversampling;
    int threads = 1;
    bool noiseless = false;
};

/// Per-trial record kept by the Monte-Carlo driver for diagnostics.
struct EstimateRecord {
    BsEstimate bs;
    UeEstimate ue;
    Vec2 q_mono, q_h, v_hat;
    double sq_err_mono = 0.0, sq_err_h = 0.0, sq_err_vel = 0.0;
};

/// Sweeps the per-element BS receive SNR, scaling the BS and UE link budgets
/// together; the analytical PEB/VEB are evaluated at each point. Deterministic
/// for a fixed master seed regardless of thread count.
std::vector<MonteCarloRow> monte_carlo(const Scenario& scenario, const Vec2& velocity,
                                       const std::vector<double>& snr_db_sweep, int trials,
                                       std::uint64_t master_seed,
                                       const MonteCarloOptions& opts = {});

}  // namespace isac

#endif
