#ifndef ISAC_SIGNAL_SIM_HPP
#define ISAC_SIGNAL_SIM_HPP

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "isac/scenario.hpp"

namespace isac {

using cplx = std::complex<double>;

/// Ground-truth path parameters of the single target.
struct ChannelParams {
    cplx alpha_bs{0.0, 0.0};  // |alpha|^2 = per-element BS SNR
    cplx alpha_ue{0.0, 0.0};  // |alpha|^2 = per-element UE SNR
    double tau_bs = 0.0;      // 2 r_B / c [s]
    double tau_ue = 0.0;      // (r_B + r_U) / c [s]
    double fd_bs = 0.0;       // mono Doppler [Hz]
    double fd_ue = 0.0;       // bistatic Doppler [Hz]
    double theta = 0.0;       // AoA at the BS [rad]
    bool cp_ok = true;        // delays fit within the cyclic prefix
};

enum class Modulation { qpsk, qam16 };

struct SynthOptions {
    bool noiseless = false;
    Modulation modulation = Modulation::qpsk;
};

/// Demodulated resource grids at BS and UE plus the transmitted data symbols.
/// bs is indexed [antenna][subcarrier][symbol] flattened as n*K*M + k*M + m.
struct RxGrid {
    int n_r = 0;
    int k = 0;
    int m = 0;
    std::uint64_t seed = 0;
    bool data_removed = false;
    std::vector<cplx> bs;    // N_R * K * M
    std::vector<cplx> ue;    // K * M
    std::vector<cplx> data;  // K * M, unit mean power

    cplx& at_bs(int n, int kk, int mm) { return bs[(static_cast<size_t>(n) * k + kk) * m + mm]; }
    const cplx& at_bs(int n, int kk, int mm) const {
        return bs[(static_cast<size_t>(n) * k + kk) * m + mm];
    }
    cplx& at_ue(int kk, int mm) { return ue[static_cast<size_t>(kk) * m + mm]; }
    const cplx& at_ue(int kk, int mm) const { return ue[static_cast<size_t>(kk) * m + mm]; }
};

class Rng;

/// Maps geometry, velocity and link budget to the physical path parameters.
/// Path-gain phases are drawn uniformly when an RNG is supplied, zero otherwise.
ChannelParams truth_channel(const OfdmConfig& cfg, const SceneGeometry& g, const Vec2& v,
                            const ReceiveSnr& snr, Rng* rng = nullptr);

/// Synthesizes the demodulated per-resource-element grids with unit-variance
/// complex noise. Deterministic for a fixed (cfg, ch, seed).
RxGrid synthesize(const OfdmConfig& cfg, const ChannelParams& ch, std::uint64_t seed,
                  const SynthOptions& opts = {});

/// Element-wise division by the known data symbols.
RxGrid remove_data(const RxGrid& grid);

/// Binary grid dump: 8 x u32 header (magic, version, N_R, K, M, seed, flags,
/// reserved) followed by the BS then UE tensors as interleaved little-endian
/// complex64 (two float32 per sample). flags bit 0 marks a data-free grid.
void write_grid(const std::string& path, const RxGrid& grid);
RxGrid read_grid(const std::string& path);

}  // namespace isac

#endif
