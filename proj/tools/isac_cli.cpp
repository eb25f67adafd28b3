#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "isac/coverage.hpp"
#include "isac/crlb.hpp"
#include "isac/estimator.hpp"
#include "isac/scenario.hpp"

namespace {

constexpr const char* kToolVersion = "1.0.0";

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// every output file goes through temp + rename
void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out)
            throw IoError("cannot open " + tmp);
        out << content;
        if (!out)
            throw IoError("short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw IoError("cannot rename " + tmp);
}

std::string fmt(double v) {
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    if (std::isnan(v))
        return "nan";
    std::ostringstream ss;
    ss.imbue(std::locale::classic());
    ss.precision(10);
    ss << v;
    return ss.str();
}

nlohmann::json scenario_json(const isac::Scenario& s) {
    nlohmann::json j;
    j["ofdm"] = {{"fc_hz", s.ofdm.fc},
                 {"delta_f_hz", s.ofdm.delta_f},
                 {"subcarriers", s.ofdm.subcarriers},
                 {"symbols", s.ofdm.symbols},
                 {"tx_antennas", s.ofdm.tx_antennas},
                 {"rx_antennas", s.ofdm.rx_antennas},
                 {"cp_fraction", s.ofdm.cp_fraction},
                 {"eta", s.ofdm.eta},
                 {"c_mps", s.ofdm.c}};
    j["link_budget"] = {{"ups_bar_bs_db", isac::linear_to_db(s.link_budget.ups_bar_bs)},
                        {"ups_bar_ue_db", isac::linear_to_db(s.link_budget.ups_bar_ue)},
                        {"beta_scale", s.link_budget.beta_scale}};
    j["target"] = {s.target.x, s.target.y};
    if (s.has_ue)
        j["ue"] = {s.ue.x, s.ue.y};
    else
        j["ue"] = nullptr;
    return j;
}

struct Run {
    std::string command;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    int threads = 1;
    isac::Scenario scenario;
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    std::string path(const std::string& name) const { return out_dir + "/" + name; }

    void emit(const std::string& name, const std::string& content) {
        atomic_write(path(name), content);
        outputs.push_back(name);
    }

    void manifest(const nlohmann::json& extra) {
        nlohmann::json m;
        m["command"] = command;
        m["config"] = scenario_json(scenario);
        m["args"] = extra;
        m["master_seed"] = seed;
        m["tool_version"] = kToolVersion;
        m["outputs"] = outputs;
        m["duration_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        atomic_write(path(command + "-manifest.json"), m.dump(2) + "\n");
    }
};

isac::Vec2 to_vec(const std::vector<double>& v) { return {v[0], v[1]}; }

std::string pgm_from_values(const std::vector<double>& vals, int nx, int ny) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double v : vals)
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (!std::isfinite(lo))
        lo = hi = 0.0;
    const double span = hi > lo ? hi - lo : 1.0;
    std::string body;
    body.reserve(vals.size());
    // top row of the image is the largest y
    for (int iy = ny - 1; iy >= 0; --iy)
        for (int ix = 0; ix < nx; ++ix) {
            const double v = vals[static_cast<size_t>(iy) * nx + ix];
            const int g = std::isfinite(v)
                              ? static_cast<int>(255.0 * (v - lo) / span + 0.5)
                              : 255;
            body.push_back(static_cast<char>(g));
        }
    std::ostringstream head;
    head << "P5\n" << nx << " " << ny << "\n255\n";
    return head.str() + body;
}

std::string pgm_from_grid(const isac::CoverageGrid& g) {
    std::vector<double> vals(g.covered.size());
    for (size_t i = 0; i < vals.size(); ++i) vals[i] = g.covered[i] ? 255.0 : 0.0;
    return pgm_from_values(vals, g.nx, g.ny);
}

void cmd_peb_point(Run& run, const std::vector<double>& q_arg,
                   const std::vector<double>& qu_arg) {
    isac::Scenario& s = run.scenario;
    if (!q_arg.empty())
        s.target = to_vec(q_arg);
    if (!qu_arg.empty()) {
        s.ue = to_vec(qu_arg);
        s.has_ue = true;
    }
    const isac::SceneGeometry g = s.geometry();

    const double ups_bs =
        s.link_budget.ups_bar_bs * s.link_budget.beta_scale /
        (g.r_b * g.r_b * g.r_b * g.r_b * s.ofdm.eta);
    isac::FisherSet fs;
    fs.i_tau_bs = isac::fisher_delay_bs(s.ofdm, ups_bs);
    fs.i_theta = isac::fisher_angle(s.ofdm, ups_bs, g.theta);

    double peb_h = std::numeric_limits<double>::quiet_NaN();
    double veb = std::numeric_limits<double>::quiet_NaN();
    double psi = std::numeric_limits<double>::quiet_NaN();
    double rho = std::numeric_limits<double>::quiet_NaN();
    double psi_star = std::numeric_limits<double>::quiet_NaN();
    if (s.has_ue) {
        const isac::ReceiveSnr snr = isac::receive_snr(s.ofdm, s.link_budget, g);
        fs = isac::fisher_set(s.ofdm, snr, g.theta);
        peb_h = isac::crlb_hybrid_position(fs, g, s.ofdm.c).peb;
        veb = isac::crlb_velocity(s.ofdm, fs, g).veb;
        psi = g.psi;
        rho = fs.i_fd_bs / fs.i_fd_ue;
        psi_star = isac::optimal_bistatic_angle(rho);
    }
    const double peb_mono = isac::crlb_mono_from_fisher(fs, g.r_b, s.ofdm.c).peb;
    const double peb_limit = isac::crlb_position_limit(fs, g, s.ofdm.c).peb;

    std::ostringstream csv;
    csv << "peb_mono_m,peb_h_m,peb_limit_m,veb_mps,psi_rad,rho,psi_star_rad\n"
        << fmt(peb_mono) << ',' << fmt(peb_h) << ',' << fmt(peb_limit) << ',' << fmt(veb)
        << ',' << fmt(psi) << ',' << fmt(rho) << ',' << fmt(psi_star) << "\n";
    std::cout << csv.str();
    run.emit("peb_point.csv", csv.str());
    nlohmann::json args{{"q", {s.target.x, s.target.y}}, {"q_u", nullptr}};
    if (s.has_ue)
        args["q_u"] = {s.ue.x, s.ue.y};
    run.manifest(args);
}

void cmd_map(Run& run, const std::string& mode, const std::vector<double>& bbox,
             double cell) {
    const isac::Scenario& s = run.scenario;
    if (bbox.size() != 4 || bbox[1] <= bbox[0] || bbox[3] <= bbox[2])
        throw std::invalid_argument("map: bbox must be x_min,x_max,y_min,y_max, non-empty");
    if (cell <= 0.0)
        throw std::invalid_argument("map: cell must be positive");
    if (mode != "peb_mono" && !s.has_ue)
        throw std::invalid_argument("map: mode " + mode + " needs a UE in the scenario");

    const int nx = static_cast<int>(std::ceil((bbox[1] - bbox[0]) / cell));
    const int ny = static_cast<int>(std::ceil((bbox[3] - bbox[2]) / cell));
    std::vector<double> vals(static_cast<size_t>(nx) * ny);
    std::ostringstream csv;
    csv << "x_m,y_m,value\n";
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const isac::Vec2 q{bbox[0] + (ix + 0.5) * cell, bbox[2] + (iy + 0.5) * cell};
            double r_b = q.norm();
            double v;
            if (r_b < 1e-9) {
                v = 0.0;  // bounds vanish on top of the BS
            } else if (mode == "peb_mono") {
                const double ups_bs = s.link_budget.ups_bar_bs * s.link_budget.beta_scale /
                                      (r_b * r_b * r_b * r_b * s.ofdm.eta);
                isac::FisherSet fs;
                fs.i_tau_bs = isac::fisher_delay_bs(s.ofdm, ups_bs);
                fs.i_theta =
                    isac::fisher_angle(s.ofdm, ups_bs, std::atan2(q.y, q.x));
                v = isac::crlb_mono_from_fisher(fs, r_b, s.ofdm.c).peb;
            } else {
                isac::Vec2 ue = s.ue;
                if ((ue - q).norm() < 1e-6)
                    ue.x += 1e-6;
                const isac::SceneGeometry g = isac::derive_geometry(q, ue);
                const isac::ReceiveSnr snr = isac::receive_snr(s.ofdm, s.link_budget, g);
                const isac::FisherSet fs = isac::fisher_set(s.ofdm, snr, g.theta);
                v = mode == "peb_hybrid"
                        ? isac::crlb_hybrid_position(fs, g, s.ofdm.c).peb
                        : isac::crlb_velocity(s.ofdm, fs, g).veb;
            }
            vals[static_cast<size_t>(iy) * nx + ix] = v;
            csv << fmt(q.x) << ',' << fmt(q.y) << ',' << fmt(v) << "\n";
        }
    run.emit("map_" + mode + ".csv", csv.str());
    run.emit("map_" + mode + ".pgm", pgm_from_values(vals, nx, ny));
    run.manifest({{"mode", mode}, {"bbox", bbox}, {"cell", cell}});
}

void cmd_simulate(Run& run, const std::vector<double>& v_arg, std::vector<double> snr,
                  int trials) {
    const isac::Scenario& s = run.scenario;
    const isac::Vec2 v = v_arg.empty() ? isac::Vec2{20.0, 0.0} : to_vec(v_arg);
    if (snr.empty())
        snr = {0.0, 5.0, 10.0, 15.0, 20.0};
    isac::MonteCarloOptions opts;
    opts.threads = run.threads;
    const auto rows = isac::monte_carlo(s, v, snr, trials, run.seed, opts);

    std::ostringstream csv;
    csv << "snr_db,rmse_pos_mono_m,rmse_pos_h_m,rmse_vel_mps,peb_mono_m,peb_h_m,"
           "veb_mps,trials,seed\n";
    for (const auto& r : rows)
        csv << fmt(r.snr_db) << ',' << fmt(r.rmse_pos_mono) << ',' << fmt(r.rmse_pos_h)
            << ',' << fmt(r.rmse_vel) << ',' << fmt(r.peb_mono) << ',' << fmt(r.peb_h)
            << ',' << fmt(r.veb) << ',' << r.trials << ',' << r.seed << "\n";
    std::cout << csv.str();
    run.emit("simulate.csv", csv.str());
    run.manifest({{"v", {v.x, v.y}}, {"snr_db", snr}, {"trials", trials}});
}

void cmd_coverage(Run& run, std::vector<double> gammas, std::optional<double> gamma_v,
                  const std::vector<double>& qu_arg, const std::vector<double>& sweep_arg,
                  const std::vector<double>& bbox, double cell, bool right_side) {
    const isac::Scenario& s = run.scenario;
    if (gammas.empty())
        gammas = {1.0};
    std::optional<isac::Vec2> qu;
    if (!qu_arg.empty())
        qu = to_vec(qu_arg);
    else if (s.has_ue)
        qu = s.ue;

    isac::CoverageQuery query;
    query.gamma_v = gamma_v;
    query.region = {bbox[0], bbox[1], bbox[2], bbox[3]};
    query.cell = cell;
    query.right_side_only = right_side;

    std::ostringstream csv;
    csv << "gamma_p_m,mono_closed_m2,mono_numeric_m2,hybrid_m2,joint_m2\n";
    for (double gp : gammas) {
        query.gamma_p = gp;
        const isac::MonoCoverage closed = isac::coverage_mono_closed(s.ofdm, s.link_budget, gp);
        const isac::CoverageGrid mono = isac::coverage_numeric(
            s.ofdm, s.link_budget, std::nullopt, query, isac::CoverageCriterion::mono);
        double hybrid = std::numeric_limits<double>::quiet_NaN();
        double joint = std::numeric_limits<double>::quiet_NaN();
        if (qu) {
            hybrid = isac::coverage_numeric(s.ofdm, s.link_budget, qu, query,
                                            isac::CoverageCriterion::hybrid)
                         .area;
            if (gamma_v)
                joint = isac::coverage_numeric(s.ofdm, s.link_budget, qu, query,
                                               isac::CoverageCriterion::joint)
                            .area;
        }
        csv << fmt(gp) << ',' << fmt(closed.area) << ',' << fmt(mono.area) << ','
            << fmt(hybrid) << ',' << fmt(joint) << "\n";
    }
    std::cout << csv.str();
    run.emit("coverage.csv", csv.str());

    if (!sweep_arg.empty()) {
        if (sweep_arg.size() != 3 || sweep_arg[2] <= 0.0)
            throw std::invalid_argument("coverage: sweep must be start,stop,step");
        std::vector<double> xs;
        for (double x = sweep_arg[0]; x <= sweep_arg[1] + 1e-9; x += sweep_arg[2])
            xs.push_back(x);
        query.gamma_p = gammas.front();
        const isac::UeSweep sw = isac::optimal_ue_sweep(s.ofdm, s.link_budget, xs, query);
        std::ostringstream sc;
        sc << "x_u_m,hybrid_area_m2\n";
        for (const auto& p : sw.curve) sc << fmt(p.x_u) << ',' << fmt(p.area) << "\n";
        run.emit("coverage_sweep.csv", sc.str());
        std::cout << "x_u_star_m," << fmt(sw.x_u_star) << "\n";
    }
    nlohmann::json args{{"gamma_p", gammas},       {"gamma_v", nullptr},
                        {"bbox", bbox},            {"cell", cell},
                        {"right_side_only", right_side}, {"sweep", sweep_arg}};
    if (gamma_v)
        args["gamma_v"] = *gamma_v;
    run.manifest(args);
}

void cmd_ue_cdf(Run& run, const std::vector<double>& q_arg, std::vector<double> lambdas,
                const std::vector<double>& grid_arg) {
    isac::Scenario& s = run.scenario;
    if (!q_arg.empty())
        s.target = to_vec(q_arg);
    if (lambdas.empty())
        lambdas = {1e-4, 1e-3};
    std::vector<double> grid;
    if (grid_arg.size() == 3 && grid_arg[2] > 0.0) {
        for (double g = grid_arg[0]; g <= grid_arg[1] + 1e-12; g += grid_arg[2])
            grid.push_back(g);
    } else if (!grid_arg.empty()) {
        grid = grid_arg;
    } else {
        for (int i = 1; i <= 100; ++i) grid.push_back(0.01 * i);
    }

    std::ostringstream csv;
    csv << "lambda_per_m2,gamma_p_m,probability\n";
    for (double lam : lambdas)
        for (double gp : grid)
            csv << fmt(lam) << ',' << fmt(gp) << ','
                << fmt(isac::peb_cdf(s.ofdm, s.link_budget, s.target, lam, gp)) << "\n";
    std::cout << csv.str();
    run.emit("ue_cdf.csv", csv.str());
    run.manifest({{"q", {s.target.x, s.target.y}},
                  {"lambda", lambdas},
                  {"gamma_p_grid", grid_arg}});
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid mono-/bi-static OFDM sensing bounds, simulation and coverage"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string scenario_path;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    int threads = 1;
    app.add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    app.add_option("--seed", seed, "Master RNG seed");
    app.add_option("--threads", threads, "Worker thread count");
    app.add_option("--out", out_dir, "Output directory");

    std::vector<double> q_arg, qu_arg, v_arg, snr_arg, bbox{-300, 300, -300, 300};
    std::vector<double> gammas, sweep_arg, lambdas, grid_arg;
    double cell = 1.0, gamma_v_val = 0.0;
    bool right_side = false;
    int trials = 500;
    std::string mode = "peb_mono";

    auto* peb = app.add_subcommand("peb-point", "Bounds at a single target position");
    peb->add_option("--q", q_arg, "Target position x,y [m]")->expected(2);
    peb->add_option("--qu", qu_arg, "UE position x,y [m]")->expected(2);

    auto* map = app.add_subcommand("map", "Bound heatmap over a bounding box");
    map->add_option("--mode", mode, "peb_mono|peb_hybrid|veb")
        ->check(CLI::IsMember({"peb_mono", "peb_hybrid", "veb"}));
    map->add_option("--bbox", bbox, "x_min,x_max,y_min,y_max [m]")->expected(4);
    map->add_option("--cell", cell, "Grid cell size [m]");

    auto* sim = app.add_subcommand("simulate", "Monte-Carlo RMSE vs bound sweep");
    sim->add_option("--v", v_arg, "Target velocity vx,vy [m/s]")->expected(2);
    sim->add_option("--snr", snr_arg, "Per-element BS SNR sweep [dB]");
    sim->add_option("--trials", trials, "Trials per SNR point");

    auto* cov = app.add_subcommand("coverage", "Coverage areas and UE-position sweep");
    cov->add_option("--gamma-p", gammas, "PEB thresholds [m]");
    auto* gv_opt = cov->add_option("--gamma-v", gamma_v_val, "VEB threshold [m/s]");
    cov->add_option("--qu", qu_arg, "UE position x,y [m]")->expected(2);
    cov->add_option("--sweep", sweep_arg, "UE x-axis sweep start,stop,step [m]")->expected(3);
    cov->add_option("--bbox", bbox, "x_min,x_max,y_min,y_max [m]")->expected(4);
    cov->add_option("--cell", cell, "Grid cell size [m]");
    cov->add_flag("--right-side", right_side, "Count only the x > 0 half plane");

    auto* cdf = app.add_subcommand("ue-cdf", "Best-UE PEB CDF under Poisson deployment");
    cdf->add_option("--q", q_arg, "Target position x,y [m]")->expected(2);
    cdf->add_option("--lambda", lambdas, "UE densities [1/m^2]");
    cdf->add_option("--gamma-p", grid_arg, "Threshold grid start,stop,step or list [m]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int r = app.exit(e);
        return r == 0 ? 0 : 2;
    }

    Run run;
    run.out_dir = out_dir;
    run.seed = seed;
    run.threads = threads;
    try {
        run.scenario = isac::load_scenario(scenario_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (peb->parsed()) {
            run.command = "peb-point";
            cmd_peb_point(run, q_arg, qu_arg);
        } else if (map->parsed()) {
            run.command = "map";
            cmd_map(run, mode, bbox, cell);
        } else if (sim->parsed()) {
            run.command = "simulate";
            cmd_simulate(run, v_arg, snr_arg, trials);
        } else if (cov->parsed()) {
            run.command = "coverage";
            std::optional<double> gv;
            if (gv_opt->count() > 0)
                gv = gamma_v_val;
            cmd_coverage(run, gammas, gv, qu_arg, sweep_arg, bbox, cell, right_side);
        } else if (cdf->parsed()) {
            run.command = "ue-cdf";
            cmd_ue_cdf(run, q_arg, lambdas, grid_arg);
        }
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
