#include "drm/priors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "drm/degrade.hpp"

namespace drm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double dot(const Image& a, const Image& b) {
    return std::inner_product(a.values().begin(), a.values().end(), b.values().begin(), 0.0);
}

Image soft_threshold(const Image& z, double t) {
    Image out = z;
    for (double& v : out.values()) v = std::copysign(std::max(std::abs(v) - t, 0.0), v);
    return out;
}

// (gamma I + 2 lambda L) x = gamma z by CG, warm-started at z.
Image tikhonov_solve(const prior::Tikhonov& op, const Image& z, double gamma) {
    if (op.lambda == 0.0) return z;
    auto apply = [&](const Image& x) {
        Image y = apply_laplacian(x);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = gamma * x[i] + 2.0 * op.lambda * y[i];
        return y;
    };
    Image rhs = z;
    for (double& v : rhs.values()) v *= gamma;
    const double target = op.cg_tol * std::sqrt(dot(rhs, rhs));

    Image x = z;
    Image r = apply(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
    double rr = dot(r, r);
    if (std::sqrt(rr) <= target) return x;
    Image p = r;
    for (int it = 0; it < op.cg_max_iter; ++it) {
        const Image Ap = apply(p);
        const double step = rr / dot(p, Ap);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] += step * p[i];
            r[i] -= step * Ap[i];
        }
        const double rr_next = dot(r, r);
        if (std::sqrt(rr_next) <= target) return x;
        const double beta = rr_next / rr;
        rr = rr_next;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
    }
    throw ConvergenceError("Tikhonov CG did not converge in " + std::to_string(op.cg_max_iter) +
                               " iterations, residual " + std::to_string(std::sqrt(rr)),
                           std::sqrt(rr));
}

// Dual projection for min_x TV(x) + 1/(2 theta) ||x - z||^2, theta = lambda / gamma.
Image tv_denoise(const prior::TotalVariation& op, const Image& z, double gamma) {
    if (op.lambda == 0.0) return z;
    const double theta = op.lambda / gamma;
    constexpr double tau = 0.125;
    const int h = z.height(), w = z.width();
    Image px(h, w), py(h, w), div(h, w);
    auto divergence = [&] {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                for (int c = 0; c < kChannels; ++c) {
                    double d = 0.0;
                    if (x < w - 1) d += px.at(y, x, c);
                    if (x > 0) d -= px.at(y, x - 1, c);
                    if (y < h - 1) d += py.at(y, x, c);
                    if (y > 0) d -= py.at(y - 1, x, c);
                    div.at(y, x, c) = d;
                }
            }
        }
    };
    for (int it = 0; it < op.inner_iters; ++it) {
        divergence();
        // u = div p - z / theta; update p with the projected gradient of u.
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                for (int c = 0; c < kChannels; ++c) {
                    const double u = div.at(y, x, c) - z.at(y, x, c) / theta;
                    const double gx = x < w - 1 ? (div.at(y, x + 1, c) - z.at(y, x + 1, c) / theta) - u : 0.0;
                    const double gy = y < h - 1 ? (div.at(y + 1, x, c) - z.at(y + 1, x, c) / theta) - u : 0.0;
                    const double norm = 1.0 + tau * std::hypot(gx, gy);
                    px.at(y, x, c) = (px.at(y, x, c) + tau * gx) / norm;
                    py.at(y, x, c) = (py.at(y, x, c) + tau * gy) / norm;
                }
            }
        }
    }
    divergence();
    Image out = z;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = z[i] - theta * div[i];
    return out;
}

}  // namespace

bool is_exact(const PriorOperator& op) { return !std::holds_alternative<prior::TotalVariation>(op); }

Image apply_laplacian(const Image& x) {
    const int h = x.height(), w = x.width();
    Image out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int xx = 0; xx < w; ++xx) {
            for (int c = 0; c < kChannels; ++c) {
                const double v = x.at(y, xx, c);
                double acc = 0.0;
                if (xx > 0) acc += v - x.at(y, xx - 1, c);
                if (xx < w - 1) acc += v - x.at(y, xx + 1, c);
                if (y > 0) acc += v - x.at(y - 1, xx, c);
                if (y < h - 1) acc += v - x.at(y + 1, xx, c);
                out.at(y, xx, c) = acc;
            }
        }
    }
    return out;
}

Image prox(const PriorOperator& op, const Image& z, double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw Error(ErrorCode::InvalidArgument, "prox: gamma must be a positive finite value");
    }
    if (!z.all_finite()) throw Error(ErrorCode::InvalidArgument, "prox: input holds non-finite values");
    return std::visit(overloaded{
                          [&](const prior::Identity&) { return z; },
                          [&](const prior::BoxClamp& b) { return clamped(z, b.lo, b.hi); },
                          [&](const prior::SoftThreshold& s) { return soft_threshold(z, s.lambda / gamma); },
                          [&](const prior::Tikhonov& t) { return tikhonov_solve(t, z, gamma); },
                          [&](const prior::TotalVariation& t) { return tv_denoise(t, z, gamma); },
                      },
                      op);
}

TaskPriorProfile default_profile(DegradationKind kind) {
    switch (kind) {
        case DegradationKind::Rain:
            return {prior::TotalVariation{0.05}, prior::BoxClamp{1.0, 1.0}, prior::SoftThreshold{0.05}};
        case DegradationKind::Haze:
            return {prior::TotalVariation{0.02}, prior::Tikhonov{0.5}, prior::Tikhonov{0.5}};
        case DegradationKind::LowLight:
            return {prior::TotalVariation{0.02}, prior::Tikhonov{1.0}, prior::SoftThreshold{0.5}};
    }
    return {};
}

Image apply_prior_B(const TaskPriorProfile& profile, const Image& Z, double gamma) {
    return clamped(prox(profile.B, Z, gamma), 0.0, 1.0);
}

std::pair<Image, Image> apply_prior_TD(const TaskPriorProfile& profile, const Image& P, const Image& Q,
                                       double alpha, double beta) {
    require_same_shape("apply_prior_TD", P, Q);
    return {clamped(prox(profile.T, P, alpha), kTransmissionFloor, 1.0), clamped(prox(profile.D, Q, beta), -1.0, 1.0)};
}

}  // namespace drm
