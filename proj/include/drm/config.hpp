#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "drm/degrade.hpp"
#include "drm/estimate.hpp"
#include "drm/solver.hpp"

namespace drm {

/// One TaskPriorProfile per degradation kind.
struct PriorTable {
    std::array<TaskPriorProfile, 3> profiles{default_profile(DegradationKind::Rain),
                                             default_profile(DegradationKind::Haze),
                                             default_profile(DegradationKind::LowLight)};

    const TaskPriorProfile& operator[](DegradationKind k) const { return profiles[static_cast<int>(k)]; }
    TaskPriorProfile& operator[](DegradationKind k) { return profiles[static_cast<int>(k)]; }
};

/// Everything a `restore` run needs. Serialized as a JSON object whose
/// top-level keys are the fields below; `penalty`, `dpt` and `priors` are
/// nested objects. Unknown keys are rejected at every level.
struct RunConfig {
    int steps = 6;
    PenaltySchedule schedule;
    ScheduleMode mode = ScheduleMode::Parallel;
    ModelingForm modeling_form = ModelingForm::TBplusD;
    DptConfig dpt;
    double eps = kInvertEps;
    PriorTable priors;

    std::optional<DegradationKind> kind;  // nullopt selects the classifier
    std::uint64_t seed = 0;

    std::string input;
    std::string output;
    std::string ref_degraded;
    std::string ref_clean;
    std::string ref_pool;
    std::uint64_t ref_seed = 0;
    std::string gt;
    std::string dump_intermediate;
    bool dump_attention = false;

    SolverConfig solver_config(DegradationKind k) const;
};

nlohmann::json to_json(const PriorOperator& op);
PriorOperator prior_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SolverConfig& cfg);
nlohmann::json to_json(const SimParams& p);
SimParams sim_params_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RunConfig& cfg);
/// Starts from `base` and overrides every key present in `j`.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path);

std::string_view to_string(ScheduleMode m);
std::string_view to_string(ModelingForm f);
std::optional<ScheduleMode> parse_schedule(std::string_view s);
std::optional<ModelingForm> parse_modeling_form(std::string_view s);

/// FNV-1a 64-bit of `text`, as 16 hex digits.
std::string fnv1a_hex(std::string_view text);

}  // namespace drm
