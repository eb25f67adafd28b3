#ifndef ISAC_FISHER_HPP
#define ISAC_FISHER_HPP

#include "isac/scenario.hpp"

namespace isac {

/// The five scalar Fisher informations of the diagonal EFIMs.
/// Zero encodes an unobservable parameter (e.g. i_theta = 0 for a single
/// receive antenna without an angle prior).
struct FisherSet {
    double i_tau_bs = 0.0;   // [s^-2]
    double i_theta = 0.0;    // [rad^-2]
    double i_tau_ue = 0.0;   // [s^-2]
    double i_fd_bs = 0.0;    // [Hz^-2]
    double i_fd_ue = 0.0;    // [Hz^-2]
};

struct FisherOptions {
    bool use_angle_prior = false;  // add the uniform-prior term 12/pi^2 to i_theta
    double sync_std = 0.0;         // BS-UE synchronization error std [s]
    bool large_k_approx = false;   // replace K^2-1 by K^2 (bandwidth form)
};

double fisher_delay_bs(const OfdmConfig& cfg, double ups_bs,
                       const FisherOptions& opts = {});
double fisher_angle(const OfdmConfig& cfg, double ups_bs, double theta,
                    const FisherOptions& opts = {});
double fisher_delay_ue(const OfdmConfig& cfg, double ups_ue,
                       const FisherOptions& opts = {});

struct DopplerFisher {
    double i_fd_bs = 0.0;
    double i_fd_ue = 0.0;
};
DopplerFisher fisher_doppler(const OfdmConfig& cfg, double ups_bs, double ups_ue);

/// All five entries for one geometry and link budget.
FisherSet fisher_set(const OfdmConfig& cfg, const ReceiveSnr& snr, double theta,
                     const FisherOptions& opts = {});

}  // namespace isac

#endif
