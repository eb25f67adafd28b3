#ifndef ISAC_COVERAGE_HPP
#define ISAC_COVERAGE_HPP

#include <optional>
#include <vector>

#include "isac/crlb.hpp"

namespace isac {

struct BoundingBox {
    double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;

    bool empty() const { return x_max <= x_min || y_max <= y_min; }
};

enum class CoverageCriterion { mono, hybrid, joint };

struct CoverageQuery {
    double gamma_p = 1.0;               // PEB threshold [m]
    std::optional<double> gamma_v;      // VEB threshold [m/s], joint criterion only
    BoundingBox region;
    double cell = 1.0;                  // grid resolution [m]
    bool right_side_only = false;       // count only x > 0 cells
};

/// Boolean indicator grid plus the cell-counting area integral.
struct CoverageGrid {
    double area = 0.0;  // [m^2]
    int nx = 0, ny = 0;
    double x0 = 0.0, y0 = 0.0;  // center of cell (0, 0)
    double cell = 0.0;
    std::vector<std::uint8_t> covered;  // row-major, index iy * nx + ix

    bool at(int ix, int iy) const { return covered[static_cast<size_t>(iy) * nx + ix] != 0; }
};

/// Closed-form mono-static coverage area with its validity diagnostic.
struct MonoCoverage {
    double area = 0.0;       // [m^2], clamped at zero
    double raw_area = 0.0;   // signed value before clamping
    bool clamped = false;    // approximation broke down (negative raw area)
};

/// Leading and correction coefficients of the closed-form mono coverage,
/// recomputed from Gamma functions rather than hard-coded.
struct MonoCoverageCoeffs {
    double leading = 0.0;     // sqrt(pi) Gamma(5/6) / Gamma(4/3) * (pi^2/6)^(1/3)
    double correction = 0.0;  // pi / 96
};

MonoCoverageCoeffs mono_coverage_coeffs();

/// Both-lobe mono-static coverage area as a function of the PEB threshold.
MonoCoverage coverage_mono_closed(const OfdmConfig& cfg, const LinkBudget& lb,
                                  double gamma_p);

/// Polar-integration oracle for the mono coverage area: solves the exact
/// boundary c1 r^6 / cos^2(theta) + c2 r^4 = gamma_p^2 per angle and
/// integrates r^2 over both lobes.
double coverage_mono_polar(const OfdmConfig& cfg, const LinkBudget& lb, double gamma_p);

/// Indicator-grid coverage integral. hybrid/joint require a UE position;
/// joint additionally requires query.gamma_v.
CoverageGrid coverage_numeric(const OfdmConfig& cfg, const LinkBudget& lb,
                              const std::optional<Vec2>& q_u, const CoverageQuery& query,
                              CoverageCriterion criterion);

struct UeSweepPoint {
    double x_u = 0.0;
    double area = 0.0;
};

struct UeSweep {
    std::vector<UeSweepPoint> curve;
    double x_u_star = 0.0;  // argmax of the hybrid coverage area
};

/// Hybrid coverage area versus the UE position swept along the x-axis.
UeSweep optimal_ue_sweep(const OfdmConfig& cfg, const LinkBudget& lb,
                         const std::vector<double>& x_u_range, const CoverageQuery& query);

enum class UeRegionBranch { empty, partial_loop, full_loop, all_plane };

/// Admissible UE region around a fixed target: the set of UE positions whose
/// hybrid PEB is at or below gamma_p, parameterized by the bistatic angle psi
/// with the BS-target line as axis.
struct UeRegion {
    Vec2 q;
    double gamma_p = 0.0;
    UeRegionBranch branch = UeRegionBranch::empty;
    double area = 0.0;          // closed form [m^2]
    double area_numeric = 0.0;  // quadrature cross-check [m^2]
    double psi_lo = 0.0, psi_hi = 0.0;  // admissible half-range, mirrored in psi
    std::vector<double> psi;     // boundary samples over [psi_lo, psi_hi]
    std::vector<double> r_u;     // boundary radius at each sampled psi
};

UeRegion ue_admissible_region(const OfdmConfig& cfg, const LinkBudget& lb, const Vec2& q,
                              double gamma_p);

/// Lemma-4 style CDF of the best-UE hybrid PEB under a Poisson UE deployment
/// of density lambda [m^-2]: void probability of the admissible region.
double peb_cdf(const OfdmConfig& cfg, const LinkBudget& lb, const Vec2& q, double lambda,
               double gamma_p);

}  // namespace isac

#endif
