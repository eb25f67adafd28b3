#ifndef ISAC_CRLB_HPP
#define ISAC_CRLB_HPP

#include "isac/fisher.hpp"
#include "isac/scenario.hpp"

namespace isac {

/// Position CRLB with its square root (the PEB). +infinity is a first-class
/// value for unobservable configurations, not an error.
struct PositionBound {
    double crlb = 0.0;  // [m^2]
    double peb = 0.0;   // [m]
    // the additive Fisher contributions that entered the bound
    double i_tau_bs = 0.0;
    double i_theta = 0.0;
    double i_tau_ue = 0.0;
};

struct VelocityBound {
    double crlb = 0.0;  // [m^2/s^2]
    double veb = 0.0;   // [m/s]
};

/// Position-independent coefficients of the closed forms. Exact (K^2-1) and
/// (M^2-1) factors are kept; FisherOptions::large_k_approx switches to the
/// bandwidth form K^2.
struct MonoCoeffs {
    double c1 = 0.0;  // multiplies r_B^6 / cos^2(theta)
    double c2 = 0.0;  // multiplies r_B^4
};
struct DelayOnlyCoeffs {
    double c3 = 0.0;  // multiplies r_B^2 r_U^2 / sin^2(psi)
    double c4 = 0.0;  // multiplies r_B^4 / (1 - cos(psi))
};
struct VelocityCoeffs {
    double c5 = 0.0;  // multiplies r_B^2 r_U^2 / sin^2(psi)
    double c6 = 0.0;  // multiplies r_B^4 / (1 - cos(psi))
};

MonoCoeffs mono_coeffs(const OfdmConfig& cfg, const LinkBudget& lb,
                       const FisherOptions& opts = {});
DelayOnlyCoeffs delay_only_coeffs(const OfdmConfig& cfg, const LinkBudget& lb,
                                  const FisherOptions& opts = {});
VelocityCoeffs velocity_coeffs(const OfdmConfig& cfg, const LinkBudget& lb);

/// Hybrid mono-/bi-static position CRLB in the polar parameterization.
PositionBound crlb_hybrid_position(const FisherSet& fs, const SceneGeometry& g,
                                   double c = kDefaultSpeedOfLight);

/// BS mono-static position CRLB from the closed coefficients.
PositionBound crlb_mono_position(const OfdmConfig& cfg, const LinkBudget& lb,
                                 const SceneGeometry& g,
                                 const FisherOptions& opts = {});

/// Mono bound from an already-assembled FisherSet (r_B^2/I_theta + c^2/(4 I_tauB)).
PositionBound crlb_mono_from_fisher(const FisherSet& fs, double r_b,
                                    double c = kDefaultSpeedOfLight);

/// Single-receive-antenna (delay-only) hybrid position CRLB.
PositionBound crlb_single_antenna_position(const FisherSet& fs, const SceneGeometry& g,
                                           double c = kDefaultSpeedOfLight);

/// Net CRLB reduction of fusing the UE delay; always >= 0, zero at psi = pi.
double crlb_fusion_gain(const FisherSet& fs, const SceneGeometry& g,
                        double c = kDefaultSpeedOfLight);

/// The I_tauU -> infinity limit: min{c^2/(4 I_tauB), r_B^2/I_theta}.
PositionBound crlb_position_limit(const FisherSet& fs, const SceneGeometry& g,
                                  double c = kDefaultSpeedOfLight);

/// Velocity CRLB; independent of the true velocity vector.
VelocityBound crlb_velocity(const OfdmConfig& cfg, const FisherSet& fs,
                            const SceneGeometry& g);

/// Bistatic angle minimizing the delay/Doppler fusion CRLB for a Fisher ratio
/// rho = I_B / I_U. Result in (pi/2, pi).
double optimal_bistatic_angle(double rho);

enum class BoundKind { position, velocity };

/// Ground-truth route: builds the Cartesian Jacobian, forms J' I J and returns
/// the trace of its 2x2 inverse. Cross-checks every closed form above.
double crlb_numeric_oracle(const OfdmConfig& cfg, const FisherSet& fs,
                           const SceneGeometry& g, BoundKind which);

}  // namespace isac

#endif
