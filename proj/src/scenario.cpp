#include "isac/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace isac {

SceneGeometry derive_geometry(const Vec2& q, const Vec2& q_u) {
    SceneGeometry g;
    g.q = q;
    g.q_u = q_u;
    g.r_b = q.norm();
    if (g.r_b <= 0.0)
        throw std::domain_error("derive_geometry: target must not coincide with the BS");
    const Vec2 d = q_u - q;
    g.r_u = d.norm();
    g.theta = std::atan2(q.y, q.x);
    if (g.r_u > 0.0) {
        g.phi = std::atan2(d.y, d.x);
        const double cos_psi = (q * -1.0).dot(d) / (g.r_b * g.r_u);
        g.psi = std::acos(std::clamp(cos_psi, -1.0, 1.0));
    } else {
        // UE on top of the target; only meaningful for limit analyses
        g.phi = 0.0;
        g.psi = 0.0;
    }
    return g;
}

ReceiveSnr receive_snr(const OfdmConfig& cfg, const LinkBudget& lb, const SceneGeometry& g) {
    if (g.r_b <= 0.0)
        throw std::domain_error("receive_snr: r_B must be positive");
    if (g.r_u <= 0.0)
        throw std::domain_error("receive_snr: r_U must be positive (use the limit "
                                "operations for a co-located UE)");
    ReceiveSnr s;
    const double r_b2 = g.r_b * g.r_b;
    const double r_u2 = g.r_u * g.r_u;
    s.ups_bs = lb.ups_bar_bs * lb.beta_scale / (r_b2 * r_b2 * cfg.eta);
    s.ups_ue = lb.ups_bar_ue * lb.beta_scale / (r_b2 * r_u2 * cfg.eta);
    return s;
}

namespace {

Vec2 parse_vec2(const nlohmann::json& j, const char* what) {
    if (!j.is_array() || j.size() != 2)
        throw std::invalid_argument(std::string("scenario: ") + what +
                                    " must be a [x, y] array in meters");
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("scenario: malformed JSON: ") + e.what());
    }

    Scenario s;
    if (j.contains("ofdm")) {
        const auto& o = j.at("ofdm");
        s.ofdm.fc = o.value("fc_hz", s.ofdm.fc);
        s.ofdm.delta_f = o.value("delta_f_hz", s.ofdm.delta_f);
        s.ofdm.subcarriers = o.value("subcarriers", s.ofdm.subcarriers);
        s.ofdm.symbols = o.value("symbols", s.ofdm.symbols);
        s.ofdm.tx_antennas = o.value("tx_antennas", s.ofdm.tx_antennas);
        s.ofdm.rx_antennas = o.value("rx_antennas", s.ofdm.rx_antennas);
        s.ofdm.cp_fraction = o.value("cp_fraction", s.ofdm.cp_fraction);
        s.ofdm.eta = o.value("eta", s.ofdm.eta);
        s.ofdm.c = o.value("c_mps", s.ofdm.c);
    }
    s.ofdm.validate();

    if (!j.contains("link_budget"))
        throw std::invalid_argument("scenario: missing link_budget");
    const auto& l = j.at("link_budget");
    s.link_budget.ups_bar_bs = db_to_linear(l.at("ups_bar_bs_db").get<double>());
    s.link_budget.ups_bar_ue =
        l.contains("ups_bar_ue_db") ? db_to_linear(l.at("ups_bar_ue_db").get<double>())
                                    : s.link_budget.ups_bar_bs;
    s.link_budget.beta_scale = l.value("beta_scale", 1.0);
    if (s.link_budget.beta_scale <= 0.0 || s.link_budget.beta_scale > 1.0)
        throw std::invalid_argument("scenario: beta_scale must be in (0, 1]");

    if (!j.contains("target"))
        throw std::invalid_argument("scenario: missing target position");
    s.target = parse_vec2(j.at("target"), "target");
    if (j.contains("ue") && !j.at("ue").is_null()) {
        s.ue = parse_vec2(j.at("ue"), "ue");
        s.has_ue = true;
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("scenario: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

}  // namespace isac
