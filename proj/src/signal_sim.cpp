#include "isac/signal_sim.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "isac/rng.hpp"

namespace isac {

namespace {

constexpr std::uint32_t kGridMagic = 0x49534143;  // "ISAC"
constexpr std::uint32_t kGridVersion = 1;

cplx draw_symbol(Modulation mod, Rng& rng) {
    if (mod == Modulation::qpsk) {
        // unit-modulus QPSK on the diagonal constellation
        static const double step = kPi / 2.0;
        const int s = static_cast<int>(rng.next_u64() & 3u);
        const double a = kPi / 4.0 + step * s;
        return {std::cos(a), std::sin(a)};
    }
    // 16-QAM, normalized to unit mean power
    static const double lev[4] = {-3.0, -1.0, 1.0, 3.0};
    const std::uint64_t bits = rng.next_u64();
    const double re = lev[bits & 3u];
    const double im = lev[(bits >> 2) & 3u];
    return cplx(re, im) / std::sqrt(10.0);
}

}  // namespace

ChannelParams truth_channel(const OfdmConfig& cfg, const SceneGeometry& g, const Vec2& v,
                            const ReceiveSnr& snr, Rng* rng) {
    if (g.r_b <= 0.0 || g.r_u <= 0.0)
        throw std::domain_error("truth_channel: r_B and r_U must be positive");
    ChannelParams ch;
    ch.theta = g.theta;
    ch.tau_bs = 2.0 * g.r_b / cfg.c;
    ch.tau_ue = (g.r_b + g.r_u) / cfg.c;

    // radial speeds: positive Doppler for an approaching target
    const double lam = cfg.lambda_c();
    const Vec2 ut = g.q / -g.r_b;               // target -> BS direction
    const Vec2 us = (g.q_u - g.q) / g.r_u;      // target -> UE direction
    ch.fd_bs = 2.0 * ut.dot(v) / lam;
    ch.fd_ue = (ut + us).dot(v) / lam;

    const double phase_bs = rng ? rng->uniform(0.0, 2.0 * kPi) : 0.0;
    const double phase_ue = rng ? rng->uniform(0.0, 2.0 * kPi) : 0.0;
    ch.alpha_bs = std::polar(std::sqrt(snr.ups_bs), phase_bs);
    ch.alpha_ue = std::polar(std::sqrt(snr.ups_ue), phase_ue);

    // model validity guard: delays must stay below T_s - T_cp = T
    const double t_guard = cfg.symbol_duration();
    ch.cp_ok = ch.tau_bs < t_guard && ch.tau_ue < t_guard;
    return ch;
}

RxGrid synthesize(const OfdmConfig& cfg, const ChannelParams& ch, std::uint64_t seed,
                  const SynthOptions& opts) {
    cfg.validate();
    RxGrid grid;
    grid.n_r = cfg.rx_antennas;
    grid.k = cfg.subcarriers;
    grid.m = cfg.symbols;
    grid.seed = seed;
    grid.bs.resize(static_cast<size_t>(grid.n_r) * grid.k * grid.m);
    grid.ue.resize(static_cast<size_t>(grid.k) * grid.m);
    grid.data.resize(grid.ue.size());

    Rng rng(seed);
    for (auto& d : grid.data) d = draw_symbol(opts.modulation, rng);

    const double ts = cfg.symbol_duration_cp();
    const double sin_theta = std::sin(ch.theta);

    // phase ramps across subcarriers and symbols
    std::vector<cplx> ramp_k_bs(grid.k), ramp_m_bs(grid.m), ramp_k_ue(grid.k),
        ramp_m_ue(grid.m);
    for (int kk = 0; kk < grid.k; ++kk) {
        ramp_k_bs[kk] = std::polar(1.0, -2.0 * kPi * kk * cfg.delta_f * ch.tau_bs);
        ramp_k_ue[kk] = std::polar(1.0, -2.0 * kPi * kk * cfg.delta_f * ch.tau_ue);
    }
    for (int mm = 0; mm < grid.m; ++mm) {
        ramp_m_bs[mm] = std::polar(1.0, 2.0 * kPi * mm * ts * ch.fd_bs);
        ramp_m_ue[mm] = std::polar(1.0, 2.0 * kPi * mm * ts * ch.fd_ue);
    }

    for (int n = 0; n < grid.n_r; ++n) {
        const cplx steer = std::polar(1.0, kPi * n * sin_theta);
        for (int kk = 0; kk < grid.k; ++kk) {
            const cplx base = ch.alpha_bs * steer * ramp_k_bs[kk];
            for (int mm = 0; mm < grid.m; ++mm)
                grid.at_bs(n, kk, mm) = base * ramp_m_bs[mm] * grid.data[kk * grid.m + mm];
        }
    }
    for (int kk = 0; kk < grid.k; ++kk) {
        const cplx base = ch.alpha_ue * ramp_k_ue[kk];
        for (int mm = 0; mm < grid.m; ++mm)
            grid.at_ue(kk, mm) = base * ramp_m_ue[mm] * grid.data[kk * grid.m + mm];
    }

    if (!opts.noiseless) {
        const double s = std::sqrt(0.5);  // unit variance per complex sample
        for (auto& v : grid.bs) v += cplx(s * rng.gaussian(), s * rng.gaussian());
        for (auto& v : grid.ue) v += cplx(s * rng.gaussian(), s * rng.gaussian());
    }
    return grid;
}

RxGrid remove_data(const RxGrid& grid) {
    RxGrid out = grid;
    const size_t km = grid.data.size();
    for (size_t i = 0; i < km; ++i)
        if (std::abs(grid.data[i]) == 0.0)
            throw std::domain_error("remove_data: zero-magnitude data symbol");
    for (int n = 0; n < grid.n_r; ++n)
        for (size_t i = 0; i < km; ++i)
            out.bs[n * km + i] = grid.bs[n * km + i] / grid.data[i];
    for (size_t i = 0; i < km; ++i) out.ue[i] = grid.ue[i] / grid.data[i];
    out.data_removed = true;
    return out;
}

void write_grid(const std::string& path, const RxGrid& grid) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out)
            throw std::runtime_error("write_grid: cannot open " + tmp);
        const std::uint32_t header[8] = {
            kGridMagic,
            kGridVersion,
            static_cast<std::uint32_t>(grid.n_r),
            static_cast<std::uint32_t>(grid.k),
            static_cast<std::uint32_t>(grid.m),
            static_cast<std::uint32_t>(grid.seed & 0xffffffffu),
            static_cast<std::uint32_t>(grid.data_removed ? 1 : 0),
            0u};
        out.write(reinterpret_cast<const char*>(header), sizeof(header));
        auto dump = [&out](const std::vector<cplx>& v) {
            for (const cplx& z : v) {
                const float re = static_cast<float>(z.real());
                const float im = static_cast<float>(z.imag());
                out.write(reinterpret_cast<const char*>(&re), sizeof(float));
                out.write(reinterpret_cast<const char*>(&im), sizeof(float));
            }
        };
        dump(grid.bs);
        dump(grid.ue);
        if (!out)
            throw std::runtime_error("write_grid: short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("write_grid: cannot rename " + tmp);
}

RxGrid read_grid(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("read_grid: cannot open " + path);
    std::uint32_t header[8];
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!in || header[0] != kGridMagic)
        throw std::runtime_error("read_grid: bad magic in " + path);
    if (header[1] != kGridVersion)
        throw std::runtime_error("read_grid: unsupported version");
    RxGrid grid;
    grid.n_r = static_cast<int>(header[2]);
    grid.k = static_cast<int>(header[3]);
    grid.m = static_cast<int>(header[4]);
    grid.seed = header[5];
    grid.data_removed = (header[6] & 1u) != 0;
    grid.bs.resize(static_cast<size_t>(grid.n_r) * grid.k * grid.m);
    grid.ue.resize(static_cast<size_t>(grid.k) * grid.m);
    grid.data.assign(grid.ue.size(), cplx(1.0, 0.0));
    auto slurp = [&in](std::vector<cplx>& v) {
        for (cplx& z : v) {
            float re = 0, im = 0;
            in.read(reinterpret_cast<char*>(&re), sizeof(float));
            in.read(reinterpret_cast<char*>(&im), sizeof(float));
            z = cplx(re, im);
        }
    };
    slurp(grid.bs);
    slurp(grid.ue);
    if (!in)
        throw std::runtime_error("read_grid: truncated file " + path);
    return grid;
}

}  // namespace isac
