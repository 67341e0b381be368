#include <doctest.h>

#include <fstream>

#include "drm/config.hpp"
#include "helpers.hpp"

using namespace drm;
using nlohmann::json;

TEST_CASE("default run config is documented values") {
    const RunConfig cfg;
    CHECK(cfg.steps == 6);
    CHECK(cfg.mode == ScheduleMode::Parallel);
    CHECK(cfg.modeling_form == ModelingForm::TBplusD);
    CHECK(cfg.schedule.gamma0 == 0.5);
    CHECK(cfg.schedule.increment == 0.05);
    CHECK(cfg.dpt.patch == 16);
    CHECK(cfg.dpt.tau == 0.1);
    CHECK(cfg.dpt.rho == 0.5);
    CHECK_FALSE(cfg.kind.has_value());
    for (auto k : kAllKinds) CHECK(cfg.priors[k] == default_profile(k));
}

TEST_CASE("run config JSON round trip") {
    RunConfig cfg;
    cfg.steps = 3;
    cfg.mode = ScheduleMode::Serial;
    cfg.modeling_form = ModelingForm::HB;
    cfg.dpt.rho = 0.25;
    cfg.kind = DegradationKind::Haze;
    cfg.priors[DegradationKind::Rain].B = prior::Tikhonov{0.3, 1e-9, 100};
    cfg.priors[DegradationKind::Haze].D = prior::BoxClamp{-0.5, 0.5};
    cfg.input = "in.png";
    cfg.ref_pool = "pool";
    cfg.ref_seed = 12;
    cfg.dump_attention = true;
    const json j = to_json(cfg);
    const RunConfig back = run_config_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(back.priors[DegradationKind::Rain] == cfg.priors[DegradationKind::Rain]);
    CHECK(back.kind == cfg.kind);
}

TEST_CASE("partial configs override defaults only where given") {
    const RunConfig cfg = run_config_from_json(json{{"steps", 2}, {"dpt", {{"tau", 0.5}}}});
    CHECK(cfg.steps == 2);
    CHECK(cfg.dpt.tau == 0.5);
    CHECK(cfg.dpt.patch == 16);
}

TEST_CASE("unknown keys and bad values are rejected") {
    CHECK_THROWS_AS(run_config_from_json(json{{"stpes", 2}}), Error);
    CHECK_THROWS_AS(run_config_from_json(json{{"dpt", {{"patches", 8}}}}), Error);
    CHECK_THROWS_AS(run_config_from_json(json{{"priors", {{"snow", json::object()}}}}), Error);
    CHECK_THROWS_AS(run_config_from_json(json{{"priors", {{"rain", {{"B", {{"type", "wavelet"}}}}}}}}), Error);
    CHECK_THROWS_AS(run_config_from_json(json{{"priors", {{"rain", {{"B", {{"type", "soft"}, {"mu", 1}}}}}}}}),
                    Error);
    CHECK_THROWS_AS(run_config_from_json(json{{"steps", "six"}}), Error);
    CHECK_THROWS_AS(run_config_from_json(json{{"steps", 0}}), Error);
    CHECK_THROWS_AS(run_config_from_json(json{{"schedule", "zigzag"}}), Error);
    CHECK_THROWS_AS(run_config_from_json(json{{"kind", "snow"}}), Error);
    CHECK_THROWS_AS(run_config_from_json(json::array()), Error);
}

TEST_CASE("config files") {
    testing::TempDir dir("cfg");
    std::ofstream(dir / "ok.json") << R"({"steps": 4, "kind": "lowlight"})";
    const RunConfig cfg = load_run_config(dir / "ok.json");
    CHECK(cfg.steps == 4);
    CHECK(cfg.kind == DegradationKind::LowLight);
    std::ofstream(dir / "bad.json") << "{ not json";
    CHECK_THROWS_AS(load_run_config(dir / "bad.json"), Error);
    CHECK_THROWS_AS(load_run_config(dir / "missing.json"), Error);
}

TEST_CASE("simulation parameters round trip") {
    SimParams p{DegradationKind::Rain, 99};
    p.rain.angle_deg = -20;
    p.rain.streak_count = 40;
    const SimParams back = sim_params_from_json(to_json(p));
    CHECK(to_json(back) == to_json(p));
    CHECK_THROWS_AS(sim_params_from_json(json{{"rain", {{"angle", 3}}}}), Error);
    CHECK_THROWS_AS(sim_params_from_json(json{{"haze", {{"atmospheric_light", 0.1}}}}), Error);
}

TEST_CASE("hashing") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    const RunConfig cfg;
    CHECK(config_hash(cfg.solver_config(DegradationKind::Rain)) !=
          config_hash(cfg.solver_config(DegradationKind::Haze)));
}
