#include "drm/solver.hpp"

#include <algorithm>
#include <cmath>

#include "drm/estimate.hpp"
#include "drm/oracle.hpp"

namespace drm {

void PenaltySchedule::validate() const {
    if (!(alpha0 > 0.0 && beta0 > 0.0 && gamma0 > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "penalty schedule bases must be > 0");
    }
    if (!(increment >= 0.0)) throw Error(ErrorCode::InvalidArgument, "penalty increment must be >= 0");
}

void SolverConfig::validate() const {
    if (steps < 1) throw Error(ErrorCode::InvalidArgument, "steps must be >= 1");
    if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be > 0");
    schedule.validate();
    dpt.validate();
}

namespace {

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be > 0");
}

}  // namespace

Image update_Z(const Image& O, const Image& B_prev, const Image& T_prev, const Image& D_prev, double gamma) {
    require_positive(gamma, "update_Z: gamma");
    require_same_shape("update_Z B_prev", B_prev, O);
    require_same_shape("update_Z T_prev", T_prev, O);
    require_same_shape("update_Z D_prev", D_prev, O);
    Image Z(O.height(), O.width());
    for (std::size_t i = 0; i < Z.size(); ++i) {
        const double t = T_prev[i];
        Z[i] = (t * O[i] + gamma * B_prev[i] - t * D_prev[i]) / (gamma + t * t);
    }
    return Z;
}

Image update_P(const Image& O_ref, const Image& B_ref, const Image& T_prev, const Image& Q_prev, double alpha) {
    require_positive(alpha, "update_P: alpha");
    require_same_shape("update_P B_ref", B_ref, O_ref);
    require_same_shape("update_P T_prev", T_prev, O_ref);
    require_same_shape("update_P Q_prev", Q_prev, O_ref);
    Image P(O_ref.height(), O_ref.width());
    for (std::size_t i = 0; i < P.size(); ++i) {
        const double b = B_ref[i];
        P[i] = (O_ref[i] * b + alpha * T_prev[i] - Q_prev[i] * b) / (b * b + alpha);
    }
    return P;
}

Image update_Q(const Image& O_ref, const Image& B_ref, const Image& P_prev, const Image& D_prev, double beta) {
    require_positive(beta, "update_Q: beta");
    require_same_shape("update_Q B_ref", B_ref, O_ref);
    require_same_shape("update_Q P_prev", P_prev, O_ref);
    require_same_shape("update_Q D_prev", D_prev, O_ref);
    Image Q(O_ref.height(), O_ref.width());
    for (std::size_t i = 0; i < Q.size(); ++i) {
        Q[i] = (O_ref[i] + beta * D_prev[i] - P_prev[i] * B_ref[i]) / (beta + 1.0);
    }
    return Q;
}

void restoration_update(SolverState& s, const Image& O, const SolverConfig& cfg, double gamma) {
    s.Z = clamped(update_Z(O, s.B, s.T, s.D, gamma), 0.0, 1.0);
    s.B = apply_prior_B(cfg.priors, s.Z, gamma);
}

void modeling_update(SolverState& s, const ReferencePair& ref, const SolverConfig& cfg, double alpha, double beta,
                     StepRecord* record) {
    const bool hb = cfg.modeling_form == ModelingForm::HB;
    // Q uses the previous P, as both auxiliaries are updated from the
    // previous iterate.
    Image P = update_P(ref.degraded, ref.clean, s.T, s.Q, alpha);
    Image Q = hb ? Image(s.Q.height(), s.Q.width(), 0.0) : update_Q(ref.degraded, ref.clean, s.P, s.D, beta);
    auto [T_hat, D_hat] = apply_prior_TD(cfg.priors, P, Q, alpha, beta);
    if (hb) std::fill(D_hat.values().begin(), D_hat.values().end(), 0.0);

    DptOutput moved = transfer(T_hat, D_hat, s.B, ref.clean, s.T, s.D, cfg.dpt);
    s.P = std::move(P);
    s.Q = std::move(Q);
    s.T = std::move(moved.T);
    s.D = hb ? Image(s.D.height(), s.D.width(), 0.0) : std::move(moved.D);
    if (record) {
        record->updated_matrices = true;
        record->alpha = alpha;
        record->beta = beta;
        record->T_hat = std::move(T_hat);
        record->D_hat = std::move(D_hat);
        record->attention = std::move(moved.attention);
    }
}

namespace {

void check_inputs(const SolverState& state, const Image& O, const ReferencePair& ref) {
    state.validate();
    require_same_shape("solver O vs state", O, state.B);
    require_same_shape("solver O_ref vs O", ref.degraded, O);
    require_same_shape("solver B_ref vs O", ref.clean, O);
}

}  // namespace

SolverState step(const SolverState& state, const Image& O, const ReferencePair& ref, const SolverConfig& cfg,
                 StepRecord* record) {
    cfg.validate();
    check_inputs(state, O, ref);
    if (state.k >= cfg.steps) throw Error(ErrorCode::InvalidArgument, "step: state already at the final step");
    SolverState next = state;
    const int k = state.k + 1;
    const double gamma = cfg.schedule.gamma(k);
    if (record) *record = StepRecord{};
    if (record) record->gamma = gamma;
    restoration_update(next, O, cfg, gamma);
    if (k < cfg.steps) modeling_update(next, ref, cfg, cfg.schedule.alpha(k), cfg.schedule.beta(k), record);
    next.k = k;
    return next;
}

RestorationResult run(const Image& O, const ReferencePair& ref, const DegradationMatrices& initial,
                      const SolverConfig& cfg) {
    cfg.validate();
    DegradationMatrices M0 = initial;
    if (cfg.modeling_form == ModelingForm::HB) M0.D = Image(O.height(), O.width(), 0.0);
    SolverState s = init_state(O, M0);
    check_inputs(s, O, ref);

    RestorationResult out;
    out.metadata.config_hash = config_hash(cfg);
    auto record_restoration = [&](const Image& T_used, const Image& D_used, double gamma) {
        out.trace_B.push_back(s.B);
        out.trace_T.push_back(s.T);
        out.trace_D.push_back(s.D);
        out.gamma_used.push_back(gamma);
        out.energy_restoration.push_back(oracle::energy_restoration(O, s.B, s.Z, T_used, D_used, gamma, cfg.priors.B));
    };
    auto record_modeling = [&](StepRecord& rec) {
        out.energy_degradation.push_back(oracle::energy_degradation(ref.degraded, ref.clean, s.P, s.Q, rec.T_hat,
                                                                    rec.D_hat, rec.alpha, rec.beta, cfg.priors.T,
                                                                    cfg.priors.D));
        out.trace_T_hat.push_back(std::move(rec.T_hat));
        out.trace_D_hat.push_back(std::move(rec.D_hat));
        out.attention.push_back(std::move(rec.attention));
    };

    if (cfg.mode == ScheduleMode::Parallel) {
        for (int k = 1; k <= cfg.steps; ++k) {
            const Image T_used = s.T, D_used = s.D;
            StepRecord rec;
            s = step(s, O, ref, cfg, &rec);
            out.trace_B.push_back(s.B);
            out.trace_T.push_back(s.T);
            out.trace_D.push_back(s.D);
            out.gamma_used.push_back(rec.gamma);
            out.energy_restoration.push_back(
                oracle::energy_restoration(O, s.B, s.Z, T_used, D_used, rec.gamma, cfg.priors.B));
            if (rec.updated_matrices) record_modeling(rec);
        }
    } else {
        for (int k = 1; k <= cfg.steps; ++k) {
            StepRecord rec;
            modeling_update(s, ref, cfg, cfg.schedule.alpha(k), cfg.schedule.beta(k), &rec);
            record_modeling(rec);
        }
        for (int k = 1; k <= cfg.steps; ++k) {
            const double gamma = cfg.schedule.gamma(k);
            const Image T_used = s.T, D_used = s.D;
            restoration_update(s, O, cfg, gamma);
            record_restoration(T_used, D_used, gamma);
        }
        s.k = cfg.steps;
    }
    out.B = s.B;
    return out;
}

}  // namespace drm
