#include <doctest.h>

#include <cmath>

#include "isac/crlb.hpp"
#include "isac/rng.hpp"
#include "reference_config.hpp"

using namespace isac;

namespace {

const OfdmConfig cfg = ref_config();
const LinkBudget lb = ref_link_budget();

FisherSet fisher_at(const SceneGeometry& g) {
    return fisher_set(cfg, receive_snr(cfg, lb, g), g.theta);
}

}  // namespace

TEST_CASE("hybrid bound at the reference geometries") {
    {
        const SceneGeometry g = derive_geometry({200.0, 50.0}, {300.0, 0.0});
        const PositionBound b = crlb_hybrid_position(fisher_at(g), g, cfg.c);
        CHECK(b.peb == doctest::Approx(1.145802736190e-1).epsilon(1e-9));
    }
    {
        const SceneGeometry g = derive_geometry({200.0, 50.0}, {0.0, 300.0});
        const PositionBound b = crlb_hybrid_position(fisher_at(g), g, cfg.c);
        CHECK(b.peb == doctest::Approx(1.939381141826e-1).epsilon(1e-9));
    }
}

TEST_CASE("mono bound and its limit at the reference target") {
    const SceneGeometry g = derive_geometry({200.0, 50.0}, {0.0, 300.0});
    const FisherSet fs = fisher_at(g);
    CHECK(crlb_mono_from_fisher(fs, g.r_b, cfg.c).peb ==
          doctest::Approx(3.078461897049e-1).epsilon(1e-9));
    CHECK(crlb_position_limit(fs, g, cfg.c).peb ==
          doctest::Approx(3.484355047762e-2).epsilon(1e-9));
    // coefficient form agrees with the Fisher form
    const PositionBound coeff = crlb_mono_position(cfg, lb, g);
    CHECK(coeff.crlb ==
          doctest::Approx(crlb_mono_from_fisher(fs, g.r_b, cfg.c).crlb).epsilon(1e-12));
}

TEST_CASE("closed forms match the Jacobian oracle on random geometries") {
    Rng rng(0x5eedULL);
    for (int i = 0; i < 1000; ++i) {
        const Vec2 q{rng.uniform(-400.0, 400.0), rng.uniform(20.0, 400.0)};
        const Vec2 qu{rng.uniform(-400.0, 400.0), rng.uniform(-400.0, 400.0)};
        if (q.norm() < 10.0 || (qu - q).norm() < 10.0)
            continue;
        const SceneGeometry g = derive_geometry(q, qu);
        if (std::abs(std::sin(g.psi)) < 1e-2)
            continue;
        const FisherSet fs = fisher_at(g);

        const double hybrid = crlb_hybrid_position(fs, g, cfg.c).crlb;
        CHECK(hybrid ==
              doctest::Approx(crlb_numeric_oracle(cfg, fs, g, BoundKind::position))
                  .epsilon(1e-10));

        FisherSet mono = fs;
        mono.i_tau_ue = 0.0;
        CHECK(crlb_mono_from_fisher(fs, g.r_b, cfg.c).crlb ==
              doctest::Approx(crlb_numeric_oracle(cfg, mono, g, BoundKind::position))
                  .epsilon(1e-10));

        FisherSet single = fs;
        single.i_theta = 0.0;
        CHECK(crlb_single_antenna_position(fs, g, cfg.c).crlb ==
              doctest::Approx(crlb_numeric_oracle(cfg, single, g, BoundKind::position))
                  .epsilon(1e-10));

        CHECK(crlb_velocity(cfg, fs, g).crlb ==
              doctest::Approx(crlb_numeric_oracle(cfg, fs, g, BoundKind::velocity))
                  .epsilon(1e-9));
    }
}

TEST_CASE("fusion gain is non-negative and vanishes at psi = pi") {
    Rng rng(0xabcdULL);
    for (int i = 0; i < 2000; ++i) {
        const Vec2 q{rng.uniform(-300.0, 300.0), rng.uniform(10.0, 300.0)};
        const Vec2 qu{rng.uniform(-300.0, 300.0), rng.uniform(-300.0, 300.0)};
        if (q.norm() < 5.0 || (qu - q).norm() < 5.0)
            continue;
        const SceneGeometry g = derive_geometry(q, qu);
        const FisherSet fs = fisher_at(g);
        const double gain = crlb_fusion_gain(fs, g, cfg.c);
        CHECK(gain >= 0.0);
        // gain = C_mono - C_h by construction
        const double mono = crlb_mono_from_fisher(fs, g.r_b, cfg.c).crlb;
        const double hyb = crlb_hybrid_position(fs, g, cfg.c).crlb;
        CHECK(gain == doctest::Approx(mono - hyb).epsilon(1e-9));
    }
    // UE beyond the target on the BS-target ray: no fusion benefit
    const SceneGeometry g = derive_geometry({120.0, 90.0}, {240.0, 180.0});
    CHECK(g.psi == doctest::Approx(kPi));
    const FisherSet fs = fisher_at(g);
    const double mono = crlb_mono_from_fisher(fs, g.r_b, cfg.c).crlb;
    CHECK(std::abs(crlb_fusion_gain(fs, g, cfg.c)) < 1e-9 * mono);
    CHECK(crlb_hybrid_position(fs, g, cfg.c).crlb == doctest::Approx(mono).epsilon(1e-9));
}

TEST_CASE("hybrid bound never exceeds mono and never beats the limit") {
    Rng rng(0x777ULL);
    for (int i = 0; i < 2000; ++i) {
        const Vec2 q{rng.uniform(-300.0, 300.0), rng.uniform(10.0, 300.0)};
        const Vec2 qu{rng.uniform(-300.0, 300.0), rng.uniform(-300.0, 300.0)};
        if (q.norm() < 5.0 || (qu - q).norm() < 5.0)
            continue;
        const SceneGeometry g = derive_geometry(q, qu);
        const FisherSet fs = fisher_at(g);
        const double hyb = crlb_hybrid_position(fs, g, cfg.c).crlb;
        CHECK(hyb <= crlb_mono_from_fisher(fs, g.r_b, cfg.c).crlb * (1.0 + 1e-12));
        CHECK(hyb >= crlb_position_limit(fs, g, cfg.c).crlb * (1.0 - 1e-12));
    }
}

TEST_CASE("velocity bound diverges for collinear geometry") {
    const SceneGeometry g = derive_geometry({100.0, 0.0}, {250.0, 0.0});
    const VelocityBound vb = crlb_velocity(cfg, fisher_at(g), g);
    CHECK(std::isinf(vb.veb));
    // reference value away from the degenerate line
    const SceneGeometry g2 = derive_geometry({200.0, 50.0}, {0.0, 300.0});
    CHECK(crlb_velocity(cfg, fisher_at(g2), g2).veb ==
          doctest::Approx(9.892127388224e-1).epsilon(1e-9));
}

TEST_CASE("optimal bistatic angle") {
    CHECK(optimal_bistatic_angle(1.0) == doctest::Approx(1.743222324508).epsilon(1e-10));
    CHECK(optimal_bistatic_angle(0.1) == doctest::Approx(2.137287966667).epsilon(1e-10));
    CHECK(optimal_bistatic_angle(10.0) == doctest::Approx(1.594621617377).epsilon(1e-10));
    CHECK(optimal_bistatic_angle(100.0) == doctest::Approx(1.573283906943).epsilon(1e-10));
    for (double rho : {0.01, 0.5, 3.0, 42.0}) {
        const double psi = optimal_bistatic_angle(rho);
        CHECK(psi > kPi / 2.0);
        CHECK(psi < kPi);
    }
    CHECK_THROWS_AS(optimal_bistatic_angle(0.0), std::domain_error);
}

TEST_CASE("bounds are even in the UE mirror position") {
    const Vec2 q{150.0, 0.0};
    for (double dy : {40.0, 120.0, 280.0}) {
        const SceneGeometry up = derive_geometry(q, {60.0, dy});
        const SceneGeometry dn = derive_geometry(q, {60.0, -dy});
        CHECK(crlb_hybrid_position(fisher_at(up), up, cfg.c).crlb ==
              doctest::Approx(crlb_hybrid_position(fisher_at(dn), dn, cfg.c).crlb)
                  .epsilon(1e-12));
    }
}
