#include "drm/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace drm {

using nlohmann::json;

std::string_view to_string(ScheduleMode m) { return m == ScheduleMode::Parallel ? "parallel" : "serial"; }
std::string_view to_string(ModelingForm f) { return f == ModelingForm::TBplusD ? "tbd" : "hb"; }

std::optional<ScheduleMode> parse_schedule(std::string_view s) {
    if (s == "parallel") return ScheduleMode::Parallel;
    if (s == "serial") return ScheduleMode::Serial;
    return std::nullopt;
}

std::optional<ModelingForm> parse_modeling_form(std::string_view s) {
    if (s == "tbd") return ModelingForm::TBplusD;
    if (s == "hb") return ModelingForm::HB;
    return std::nullopt;
}

std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidArgument, "config: " + what); }

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) bad(where + " must be an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items()) {
        if (!keys.count(k)) bad("unknown key '" + k + "' in " + where);
    }
}

template <class T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        bad(std::string("bad value for '") + key + "': " + e.what());
    }
}

}  // namespace

json to_json(const PriorOperator& op) {
    return std::visit(
        [](const auto& p) -> json {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, prior::Identity>) return {{"type", "identity"}};
            if constexpr (std::is_same_v<P, prior::BoxClamp>) return {{"type", "box"}, {"lo", p.lo}, {"hi", p.hi}};
            if constexpr (std::is_same_v<P, prior::SoftThreshold>) return {{"type", "soft"}, {"lambda", p.lambda}};
            if constexpr (std::is_same_v<P, prior::Tikhonov>)
                return {{"type", "tikhonov"}, {"lambda", p.lambda}, {"cg_tol", p.cg_tol}, {"cg_max_iter", p.cg_max_iter}};
            if constexpr (std::is_same_v<P, prior::TotalVariation>)
                return {{"type", "tv"}, {"lambda", p.lambda}, {"inner_iters", p.inner_iters}};
        },
        op);
}

PriorOperator prior_from_json(const json& j) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) bad("prior needs a string 'type'");
    const auto type = j["type"].get<std::string>();
    if (type == "identity") {
        reject_unknown(j, {"type"}, "identity prior");
        return prior::Identity{};
    }
    if (type == "box") {
        reject_unknown(j, {"type", "lo", "hi"}, "box prior");
        prior::BoxClamp p;
        read(j, "lo", p.lo);
        read(j, "hi", p.hi);
        if (p.lo > p.hi) bad("box prior needs lo <= hi");
        return p;
    }
    if (type == "soft") {
        reject_unknown(j, {"type", "lambda"}, "soft prior");
        prior::SoftThreshold p;
        read(j, "lambda", p.lambda);
        if (p.lambda < 0) bad("soft prior lambda must be >= 0");
        return p;
    }
    if (type == "tikhonov") {
        reject_unknown(j, {"type", "lambda", "cg_tol", "cg_max_iter"}, "tikhonov prior");
        prior::Tikhonov p;
        read(j, "lambda", p.lambda);
        read(j, "cg_tol", p.cg_tol);
        read(j, "cg_max_iter", p.cg_max_iter);
        if (p.lambda < 0 || !(p.cg_tol > 0) || p.cg_max_iter < 1) bad("tikhonov prior parameters out of range");
        return p;
    }
    if (type == "tv") {
        reject_unknown(j, {"type", "lambda", "inner_iters"}, "tv prior");
        prior::TotalVariation p;
        read(j, "lambda", p.lambda);
        read(j, "inner_iters", p.inner_iters);
        if (p.lambda < 0 || p.inner_iters < 0) bad("tv prior parameters out of range");
        return p;
    }
    bad("unknown prior type '" + type + "'");
}

namespace {

json profile_json(const TaskPriorProfile& p) { return {{"B", to_json(p.B)}, {"T", to_json(p.T)}, {"D", to_json(p.D)}}; }

json schedule_json(const PenaltySchedule& s) {
    return {{"alpha0", s.alpha0}, {"beta0", s.beta0}, {"gamma0", s.gamma0}, {"increment", s.increment}};
}

json dpt_json(const DptConfig& d) { return {{"patch", d.patch}, {"tau", d.tau}, {"rho", d.rho}}; }

}  // namespace

json to_json(const SolverConfig& cfg) {
    return {{"steps", cfg.steps},
            {"schedule", to_string(cfg.mode)},
            {"modeling_form", to_string(cfg.modeling_form)},
            {"eps", cfg.eps},
            {"penalty", schedule_json(cfg.schedule)},
            {"dpt", dpt_json(cfg.dpt)},
            {"priors", profile_json(cfg.priors)}};
}

std::string config_hash(const SolverConfig& cfg) { return fnv1a_hex(to_json(cfg).dump()); }

json to_json(const SimParams& p) {
    return {{"kind", to_string(p.kind)},
            {"seed", p.seed},
            {"rain",
             {{"streak_count", p.rain.streak_count},
              {"angle_deg", p.rain.angle_deg},
              {"length_px", p.rain.length_px},
              {"intensity", p.rain.intensity}}},
            {"haze", {{"atmospheric_light", p.haze.atmospheric_light}, {"depth_scale", p.haze.depth_scale}}},
            {"lowlight",
             {{"gamma_exponent", p.lowlight.gamma_exponent}, {"spatial_smoothness", p.lowlight.spatial_smoothness}}}};
}

SimParams sim_params_from_json(const json& j) {
    reject_unknown(j, {"kind", "seed", "rain", "haze", "lowlight"}, "simulation parameters");
    SimParams p;
    if (j.contains("kind")) {
        const auto k = parse_kind(j["kind"].get<std::string>());
        if (!k) bad("unknown kind");
        p.kind = *k;
    }
    read(j, "seed", p.seed);
    if (j.contains("rain")) {
        const auto& r = j["rain"];
        reject_unknown(r, {"streak_count", "angle_deg", "length_px", "intensity"}, "rain");
        read(r, "streak_count", p.rain.streak_count);
        read(r, "angle_deg", p.rain.angle_deg);
        read(r, "length_px", p.rain.length_px);
        read(r, "intensity", p.rain.intensity);
    }
    if (j.contains("haze")) {
        const auto& h = j["haze"];
        reject_unknown(h, {"atmospheric_light", "depth_scale"}, "haze");
        read(h, "atmospheric_light", p.haze.atmospheric_light);
        read(h, "depth_scale", p.haze.depth_scale);
    }
    if (j.contains("lowlight")) {
        const auto& l = j["lowlight"];
        reject_unknown(l, {"gamma_exponent", "spatial_smoothness"}, "lowlight");
        read(l, "gamma_exponent", p.lowlight.gamma_exponent);
        read(l, "spatial_smoothness", p.lowlight.spatial_smoothness);
    }
    p.validate();
    return p;
}

SolverConfig RunConfig::solver_config(DegradationKind k) const {
    SolverConfig cfg;
    cfg.steps = steps;
    cfg.schedule = schedule;
    cfg.mode = mode;
    cfg.modeling_form = modeling_form;
    cfg.priors = priors[k];
    cfg.dpt = dpt;
    cfg.eps = eps;
    return cfg;
}

json to_json(const RunConfig& cfg) {
    json priors = json::object();
    for (auto k : kAllKinds) priors[std::string(to_string(k))] = profile_json(cfg.priors[k]);
    return {{"steps", cfg.steps},
            {"schedule", to_string(cfg.mode)},
            {"modeling_form", to_string(cfg.modeling_form)},
            {"eps", cfg.eps},
            {"penalty", schedule_json(cfg.schedule)},
            {"dpt", dpt_json(cfg.dpt)},
            {"priors", priors},
            {"kind", cfg.kind ? std::string(to_string(*cfg.kind)) : std::string("auto")},
            {"seed", cfg.seed},
            {"input", cfg.input},
            {"output", cfg.output},
            {"ref_degraded", cfg.ref_degraded},
            {"ref_clean", cfg.ref_clean},
            {"ref_pool", cfg.ref_pool},
            {"ref_seed", cfg.ref_seed},
            {"gt", cfg.gt},
            {"dump_intermediate", cfg.dump_intermediate},
            {"dump_attention", cfg.dump_attention}};
}

RunConfig run_config_from_json(const json& j, RunConfig cfg) {
    reject_unknown(j,
                   {"steps", "schedule", "modeling_form", "eps", "penalty", "dpt", "priors", "kind", "seed", "input",
                    "output", "ref_degraded", "ref_clean", "ref_pool", "ref_seed", "gt", "dump_intermediate",
                    "dump_attention"},
                   "run config");
    read(j, "steps", cfg.steps);
    if (j.contains("schedule")) {
        const auto m = parse_schedule(j["schedule"].get<std::string>());
        if (!m) bad("schedule must be parallel or serial");
        cfg.mode = *m;
    }
    if (j.contains("modeling_form")) {
        const auto f = parse_modeling_form(j["modeling_form"].get<std::string>());
        if (!f) bad("modeling_form must be tbd or hb");
        cfg.modeling_form = *f;
    }
    read(j, "eps", cfg.eps);
    if (j.contains("penalty")) {
        const auto& p = j["penalty"];
        reject_unknown(p, {"alpha0", "beta0", "gamma0", "increment"}, "penalty");
        read(p, "alpha0", cfg.schedule.alpha0);
        read(p, "beta0", cfg.schedule.beta0);
        read(p, "gamma0", cfg.schedule.gamma0);
        read(p, "increment", cfg.schedule.increment);
    }
    if (j.contains("dpt")) {
        const auto& d = j["dpt"];
        reject_unknown(d, {"patch", "tau", "rho"}, "dpt");
        read(d, "patch", cfg.dpt.patch);
        read(d, "tau", cfg.dpt.tau);
        read(d, "rho", cfg.dpt.rho);
    }
    if (j.contains("priors")) {
        const auto& pr = j["priors"];
        reject_unknown(pr, {"rain", "haze", "lowlight"}, "priors");
        for (auto k : kAllKinds) {
            const std::string name(to_string(k));
            if (!pr.contains(name)) continue;
            const auto& prof = pr[name];
            reject_unknown(prof, {"B", "T", "D"}, "priors." + name);
            if (prof.contains("B")) cfg.priors[k].B = prior_from_json(prof["B"]);
            if (prof.contains("T")) cfg.priors[k].T = prior_from_json(prof["T"]);
            if (prof.contains("D")) cfg.priors[k].D = prior_from_json(prof["D"]);
        }
    }
    if (j.contains("kind")) {
        const auto name = j["kind"].get<std::string>();
        if (name == "auto") {
            cfg.kind.reset();
        } else {
            const auto k = parse_kind(name);
            if (!k) bad("kind must be auto, rain, haze or lowlight");
            cfg.kind = *k;
        }
    }
    read(j, "seed", cfg.seed);
    read(j, "input", cfg.input);
    read(j, "output", cfg.output);
    read(j, "ref_degraded", cfg.ref_degraded);
    read(j, "ref_clean", cfg.ref_clean);
    read(j, "ref_pool", cfg.ref_pool);
    read(j, "ref_seed", cfg.ref_seed);
    read(j, "gt", cfg.gt);
    read(j, "dump_intermediate", cfg.dump_intermediate);
    read(j, "dump_attention", cfg.dump_attention);
    cfg.solver_config(DegradationKind::Rain).validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Unreadable, "cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, "config: malformed JSON in " + path.string() + ": " + e.what());
    }
    return run_config_from_json(j);
}

}  // namespace drm
