#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drm/degrade.hpp"
#include "drm/dpt.hpp"
#include "drm/kind.hpp"
#include "drm/priors.hpp"
#include "drm/state.hpp"

namespace drm {

/// Penalty at step k (1-based) is base + increment * (k - 1).
struct PenaltySchedule {
    double alpha0 = 0.5;
    double beta0 = 0.5;
    double gamma0 = 0.5;
    double increment = 0.05;

    double alpha(int k) const { return alpha0 + increment * (k - 1); }
    double beta(int k) const { return beta0 + increment * (k - 1); }
    double gamma(int k) const { return gamma0 + increment * (k - 1); }

    void validate() const;
};

enum class ScheduleMode { Parallel, Serial };
/// TBplusD models O = T*B + D. HB keeps D frozen at 0 (O = H*B).
enum class ModelingForm { TBplusD, HB };

struct SolverConfig {
    int steps = 6;
    PenaltySchedule schedule;
    ScheduleMode mode = ScheduleMode::Parallel;
    ModelingForm modeling_form = ModelingForm::TBplusD;
    TaskPriorProfile priors;
    DptConfig dpt;
    double eps = kInvertEps;

    void validate() const;
};

struct ReferencePair {
    Image degraded;  // O_ref
    Image clean;     // B_ref
};

// Closed-form minimizers of the per-pixel quadratic subproblems. They return
// the raw formula; range clamps are applied by step().

/// Z = (T O + gamma B_prev - T D) / (gamma + T^2).
Image update_Z(const Image& O, const Image& B_prev, const Image& T_prev, const Image& D_prev, double gamma);
/// P = (O_ref B_ref + alpha T_prev - Q_prev B_ref) / (B_ref^2 + alpha).
Image update_P(const Image& O_ref, const Image& B_ref, const Image& T_prev, const Image& Q_prev, double alpha);
/// Q = (O_ref + beta D_prev - P_prev B_ref) / (beta + 1).
Image update_Q(const Image& O_ref, const Image& B_ref, const Image& P_prev, const Image& D_prev, double beta);

/// What one step produced besides the new state.
struct StepRecord {
    double gamma = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    bool updated_matrices = false;
    Image T_hat;  // reference-oriented matrices; empty when not updated
    Image D_hat;
    AttentionMatrix attention;
};

/// One parallel-mode step: Z, B, and, while k < steps, P, Q, the T/D prior
/// and the transfer. Returns the state with k incremented.
SolverState step(const SolverState& state, const Image& O, const ReferencePair& ref, const SolverConfig& cfg,
                 StepRecord* record = nullptr);

/// Restoration half of a step (Z then B) at penalty gamma.
void restoration_update(SolverState& s, const Image& O, const SolverConfig& cfg, double gamma);
/// Degradation-modeling half of a step (P, Q, prior, transfer) at (alpha, beta),
/// using s.B as the target for feature matching.
void modeling_update(SolverState& s, const ReferencePair& ref, const SolverConfig& cfg, double alpha, double beta,
                     StepRecord* record);

/// Filled by the caller that chose the kind; run() sets only config_hash.
struct RestorationMetadata {
    DegradationKind kind = DegradationKind::Rain;
    bool kind_was_classified = false;
    std::string config_hash;
    std::string reference_id;
};

struct RestorationResult {
    Image B;                     // final estimate
    std::vector<Image> trace_B;  // B_1 .. B_S
    std::vector<Image> trace_T;  // T after each restoration step
    std::vector<Image> trace_D;
    std::vector<Image> trace_T_hat;  // reference-oriented matrices per modeling update
    std::vector<Image> trace_D_hat;
    std::vector<AttentionMatrix> attention;
    std::vector<double> gamma_used;
    std::vector<double> energy_restoration;  // after each restoration update
    std::vector<double> energy_degradation;  // after each modeling update
    RestorationMetadata metadata;
};

/// Runs the configured schedule from an explicit initialization.
///   Parallel: steps interleaved updates (matrices skipped at the final step).
///   Serial:   steps modeling updates with B frozen at B0, then steps
///             restoration updates with (T, D) frozen; the penalty schedule
///             restarts for the second phase.
RestorationResult run(const Image& O, const ReferencePair& ref, const DegradationMatrices& initial,
                      const SolverConfig& cfg);

/// Stable 64-bit hash over every field of the config, as hex.
std::string config_hash(const SolverConfig& cfg);

}  // namespace drm
