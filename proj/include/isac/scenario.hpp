#ifndef ISAC_SCENARIO_HPP
#define ISAC_SCENARIO_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace isac {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDefaultSpeedOfLight = 3.0e8;  // m/s

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    double norm() const { return std::hypot(x, y); }
    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
};

/// OFDM waveform and array parameters.
struct OfdmConfig {
    double fc = 24.0e9;            // carrier frequency [Hz]
    double delta_f = 120.0e3;      // subcarrier spacing [Hz]
    int subcarriers = 100;         // K
    int symbols = 14;              // M
    int tx_antennas = 4;           // N_T
    int rx_antennas = 4;           // N_R
    double cp_fraction = 1.0 / 14.0;  // T_cp / T
    double eta = 1.0;              // data-removal SNR penalty, linear >= 1
    double c = kDefaultSpeedOfLight;

    double lambda_c() const { return c / fc; }
    double symbol_duration() const { return 1.0 / delta_f; }                      // T
    double symbol_duration_cp() const { return (1.0 + cp_fraction) / delta_f; }   // T_s
    double bandwidth() const { return subcarriers * delta_f; }                    // W

    void validate() const {
        if (fc <= 0 || delta_f <= 0 || c <= 0)
            throw std::invalid_argument("OfdmConfig: fc, delta_f and c must be positive");
        if (subcarriers < 2 || symbols < 2)
            throw std::invalid_argument("OfdmConfig: need at least 2 subcarriers and 2 symbols");
        if (tx_antennas < 1 || rx_antennas < 1)
            throw std::invalid_argument("OfdmConfig: antenna counts must be >= 1");
        if (cp_fraction < 0)
            throw std::invalid_argument("OfdmConfig: cp_fraction must be >= 0");
        if (eta < 1.0)
            throw std::invalid_argument("OfdmConfig: eta must be >= 1");
    }
};

/// BS-anchored geometry of the BS-target-UE triangle.
///
/// psi is the bistatic angle at the target between the target->BS and
/// target->UE directions: cos(psi) = (-q)'(q_U - q) / (r_B r_U). With this
/// convention psi = pi means the UE lies on the BS-target ray beyond the
/// target (the tau_U gradient vanishes there) and psi = 0 means the UE sits
/// between BS and target or behind the BS on the same line.
struct SceneGeometry {
    Vec2 q;       // target position [m]
    Vec2 q_u;     // UE position [m]
    double r_b = 0.0;    // ||q||
    double r_u = 0.0;    // ||q - q_u||
    double theta = 0.0;  // target AoA at the BS [rad]
    double phi = 0.0;    // direction of the UE seen from the target [rad]
    double psi = 0.0;    // bistatic angle at the target [rad], in [0, pi]
};

SceneGeometry derive_geometry(const Vec2& q, const Vec2& q_u);

/// Distance-free SNR coefficients (sigma_N^2 normalized to 1, beamforming
/// gain folded in at beta = N_T).
struct LinkBudget {
    double ups_bar_bs = 0.0;  // linear; per-element BS SNR = ups_bar_bs / r_B^4
    double ups_bar_ue = 0.0;  // linear; per-element UE SNR = ups_bar_ue / (r_B^2 r_U^2)
    double beta_scale = 1.0;  // beamforming gain relative to the full-gain default
};

struct ReceiveSnr {
    double ups_bs = 0.0;  // linear per-resource-element SNR at each BS antenna
    double ups_ue = 0.0;  // linear per-resource-element SNR at the UE
};

ReceiveSnr receive_snr(const OfdmConfig& cfg, const LinkBudget& lb, const SceneGeometry& g);

/// One self-contained analysis scenario, loadable from JSON.
struct Scenario {
    OfdmConfig ofdm;
    LinkBudget link_budget;
    Vec2 target;
    Vec2 ue;
    bool has_ue = false;

    SceneGeometry geometry() const { return derive_geometry(target, ue); }
};

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text);

}  // namespace isac

#endif
