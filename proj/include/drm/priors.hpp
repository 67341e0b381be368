#pragma once

#include <utility>
#include <variant>

#include "drm/image.hpp"
#include "drm/kind.hpp"

namespace drm {

namespace prior {

struct Identity {
    friend bool operator==(const Identity&, const Identity&) = default;
};

/// Projection onto [lo, hi].
struct BoxClamp {
    double lo = 0.0;
    double hi = 1.0;
    friend bool operator==(const BoxClamp&, const BoxClamp&) = default;
};

/// lambda * ||x||_1.
struct SoftThreshold {
    double lambda = 0.0;
    friend bool operator==(const SoftThreshold&, const SoftThreshold&) = default;
};

/// lambda * x^T L x with L the 4-neighbour graph Laplacian (reflective
/// boundary), solved per channel by conjugate gradients.
struct Tikhonov {
    double lambda = 0.0;
    double cg_tol = 1e-10;
    int cg_max_iter = 2000;
    friend bool operator==(const Tikhonov&, const Tikhonov&) = default;
};

/// lambda * isotropic TV, per channel. Approximate: a fixed number of
/// dual projection iterations.
struct TotalVariation {
    double lambda = 0.0;
    int inner_iters = 50;
    friend bool operator==(const TotalVariation&, const TotalVariation&) = default;
};

}  // namespace prior

using PriorOperator =
    std::variant<prior::Identity, prior::BoxClamp, prior::SoftThreshold, prior::Tikhonov, prior::TotalVariation>;

/// True for kinds whose prox is computed exactly (TV is approximate).
bool is_exact(const PriorOperator& op);

/// argmin_x lambda*Phi(x) + gamma/2 ||z - x||^2.
/// Throws InvalidArgument for gamma <= 0 and ConvergenceError when CG
/// misses its residual target within cg_max_iter.
Image prox(const PriorOperator& op, const Image& z, double gamma);

/// Applies the 4-neighbour graph Laplacian to each channel.
Image apply_laplacian(const Image& x);

struct TaskPriorProfile {
    PriorOperator B = prior::Identity{};
    PriorOperator T = prior::Identity{};
    PriorOperator D = prior::Identity{};
    friend bool operator==(const TaskPriorProfile&, const TaskPriorProfile&) = default;
};

/// Default per-kind profiles:
///   Rain     B: TV 0.05, T: BoxClamp(1,1), D: SoftThreshold 0.05
///   Haze     B: TV 0.02, T: Tikhonov 0.5,  D: Tikhonov 0.5
///   LowLight B: TV 0.02, T: Tikhonov 1.0,  D: SoftThreshold 0.5
TaskPriorProfile default_profile(DegradationKind kind);

/// clamp(prox(profile.B, Z, gamma), 0, 1).
Image apply_prior_B(const TaskPriorProfile& profile, const Image& Z, double gamma);

/// (clamp(prox(T, P, alpha), 1e-3, 1), clamp(prox(D, Q, beta), -1, 1)).
std::pair<Image, Image> apply_prior_TD(const TaskPriorProfile& profile, const Image& P, const Image& Q,
                                       double alpha, double beta);

}  // namespace drm
