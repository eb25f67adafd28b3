#include "isac/fisher.hpp"

#include <stdexcept>

namespace isac {

namespace {

double k_spread(const OfdmConfig& cfg, const FisherOptions& opts) {
    const double k = cfg.subcarriers;
    return opts.large_k_approx ? k * k : k * k - 1.0;
}

}  // namespace

double fisher_delay_bs(const OfdmConfig& cfg, double ups_bs, const FisherOptions& opts) {
    if (ups_bs < 0.0)
        throw std::domain_error("fisher_delay_bs: SNR must be >= 0");
    const double pi2 = kPi * kPi;
    return 2.0 * pi2 * cfg.delta_f * cfg.delta_f * cfg.symbols * cfg.subcarriers *
           k_spread(cfg, opts) * cfg.rx_antennas * ups_bs / 3.0;
}

double fisher_angle(const OfdmConfig& cfg, double ups_bs, double theta,
                    const FisherOptions& opts) {
    if (ups_bs < 0.0)
        throw std::domain_error("fisher_angle: SNR must be >= 0");
    const double pi2 = kPi * kPi;
    const double n_r = cfg.rx_antennas;
    const double cs = std::cos(theta);
    double info = pi2 * cfg.subcarriers * cfg.symbols * (n_r * n_r - 1.0) * n_r * ups_bs *
                  cs * cs / 6.0;
    if (opts.use_angle_prior)
        info += 12.0 / pi2;  // uniform prior on theta over a half-plane
    return info;
}

double fisher_delay_ue(const OfdmConfig& cfg, double ups_ue, const FisherOptions& opts) {
    if (ups_ue < 0.0)
        throw std::domain_error("fisher_delay_ue: SNR must be >= 0");
    if (opts.sync_std < 0.0)
        throw std::domain_error("fisher_delay_ue: sync_std must be >= 0");
    const double pi2 = kPi * kPi;
    const double base = 2.0 * pi2 * cfg.delta_f * cfg.delta_f * cfg.symbols *
                        cfg.subcarriers * k_spread(cfg, opts) * ups_ue / 3.0;
    if (opts.sync_std > 0.0) {
        const double s2 = opts.sync_std * opts.sync_std;
        return base / (1.0 + base * s2);
    }
    return base;
}

DopplerFisher fisher_doppler(const OfdmConfig& cfg, double ups_bs, double ups_ue) {
    if (ups_bs < 0.0 || ups_ue < 0.0)
        throw std::domain_error("fisher_doppler: SNR must be >= 0");
    const double pi2 = kPi * kPi;
    const double ts = cfg.symbol_duration_cp();
    const double m = cfg.symbols;
    const double common = 2.0 * pi2 * ts * ts * cfg.subcarriers * m * (m * m - 1.0) / 3.0;
    return {common * cfg.rx_antennas * ups_bs, common * ups_ue};
}

FisherSet fisher_set(const OfdmConfig& cfg, const ReceiveSnr& snr, double theta,
                     const FisherOptions& opts) {
    FisherSet fs;
    fs.i_tau_bs = fisher_delay_bs(cfg, snr.ups_bs, opts);
    fs.i_theta = fisher_angle(cfg, snr.ups_bs, theta, opts);
    fs.i_tau_ue = fisher_delay_ue(cfg, snr.ups_ue, opts);
    const DopplerFisher d = fisher_doppler(cfg, snr.ups_bs, snr.ups_ue);
    fs.i_fd_bs = d.i_fd_bs;
    fs.i_fd_ue = d.i_fd_ue;
    return fs;
}

}  // namespace isac
