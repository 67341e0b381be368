#include "drm/dpt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "drm/degrade.hpp"

namespace drm {

void DptConfig::validate() const {
    if (patch < 1) throw Error(ErrorCode::InvalidArgument, "dpt.patch must be >= 1");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw Error(ErrorCode::InvalidArgument, "dpt.tau must be > 0");
    if (!(rho >= 0.0 && rho <= 1.0)) throw Error(ErrorCode::InvalidArgument, "dpt.rho must be in [0, 1]");
}

FeatureGrid extract_features(const Image& img, int patch) { return downsample_avg(img, patch); }

AttentionMatrix patch_attention(const FeatureGrid& target, const FeatureGrid& reference, double tau) {
    if (target.dim != reference.dim) throw Error(ErrorCode::ShapeMismatch, "patch_attention: feature dims differ");
    AttentionMatrix a;
    a.rows = static_cast<int>(target.cells());
    a.cols = static_cast<int>(reference.cells());
    a.weights.assign(static_cast<std::size_t>(a.rows) * a.cols, 0.0);
    std::vector<double> logits(a.cols);
    for (int i = 0; i < a.rows; ++i) {
        double top = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < a.cols; ++j) {
            double d2 = 0.0;
            for (int d = 0; d < target.dim; ++d) {
                const double diff = target.data[static_cast<std::size_t>(i) * target.dim + d] -
                                    reference.data[static_cast<std::size_t>(j) * reference.dim + d];
                d2 += diff * diff;
            }
            logits[j] = -d2 / tau;
            top = std::max(top, logits[j]);
        }
        double sum = 0.0;
        for (int j = 0; j < a.cols; ++j) sum += logits[j] = std::exp(logits[j] - top);
        for (int j = 0; j < a.cols; ++j) a.weights[static_cast<std::size_t>(i) * a.cols + j] = logits[j] / sum;
    }
    return a;
}

Image upsample_bilinear(const FeatureGrid& grid, int height, int width) {
    Image out(height, width);
    const double sy = static_cast<double>(grid.rows) / height;
    const double sx = static_cast<double>(grid.cols) / width;
    for (int y = 0; y < height; ++y) {
        const double gy = std::clamp((y + 0.5) * sy - 0.5, 0.0, grid.rows - 1.0);
        const int y0 = static_cast<int>(std::floor(gy));
        const int y1 = std::min(y0 + 1, grid.rows - 1);
        const double fy = gy - y0;
        for (int x = 0; x < width; ++x) {
            const double gx = std::clamp((x + 0.5) * sx - 0.5, 0.0, grid.cols - 1.0);
            const int x0 = static_cast<int>(std::floor(gx));
            const int x1 = std::min(x0 + 1, grid.cols - 1);
            const double fx = gx - x0;
            for (int c = 0; c < kChannels; ++c) {
                const double top = (1 - fx) * grid.at(y0, x0, c) + fx * grid.at(y0, x1, c);
                const double bottom = (1 - fx) * grid.at(y1, x0, c) + fx * grid.at(y1, x1, c);
                out.at(y, x, c) = (1 - fy) * top + fy * bottom;
            }
        }
    }
    return out;
}

namespace {

FeatureGrid mix(const AttentionMatrix& a, const FeatureGrid& payload, const FeatureGrid& target_shape) {
    FeatureGrid out = target_shape;
    std::fill(out.data.begin(), out.data.end(), 0.0);
    for (int i = 0; i < a.rows; ++i) {
        for (int j = 0; j < a.cols; ++j) {
            const double w = a.at(i, j);
            if (w == 0.0) continue;
            for (int d = 0; d < out.dim; ++d) {
                out.data[static_cast<std::size_t>(i) * out.dim + d] +=
                    w * payload.data[static_cast<std::size_t>(j) * payload.dim + d];
            }
        }
    }
    return out;
}

}  // namespace

DptOutput transfer(const Image& T_hat, const Image& D_hat, const Image& B_k, const Image& B_ref,
                   const Image& T_prev, const Image& D_prev, const DptConfig& cfg) {
    cfg.validate();
    require_same_shape("dpt T_hat vs B_ref", T_hat, B_ref);
    require_same_shape("dpt D_hat vs B_ref", D_hat, B_ref);
    require_same_shape("dpt T_prev vs B_k", T_prev, B_k);
    require_same_shape("dpt D_prev vs B_k", D_prev, B_k);

    const FeatureGrid f_tgt = extract_features(B_k, cfg.patch);
    const FeatureGrid f_ref = extract_features(B_ref, cfg.patch);
    DptOutput out;
    out.attention = patch_attention(f_tgt, f_ref, cfg.tau);

    const FeatureGrid t_cells = mix(out.attention, downsample_avg(T_hat, cfg.patch), f_tgt);
    const FeatureGrid d_cells = mix(out.attention, downsample_avg(D_hat, cfg.patch), f_tgt);
    out.T_transfer = upsample_bilinear(t_cells, B_k.height(), B_k.width());
    out.D_transfer = upsample_bilinear(d_cells, B_k.height(), B_k.width());

    out.T = Image(B_k.height(), B_k.width());
    out.D = Image(B_k.height(), B_k.width());
    for (std::size_t i = 0; i < out.T.size(); ++i) {
        out.T[i] = std::clamp((1.0 - cfg.rho) * T_prev[i] + cfg.rho * out.T_transfer[i], kTransmissionFloor, 1.0);
        out.D[i] = std::clamp((1.0 - cfg.rho) * D_prev[i] + cfg.rho * out.D_transfer[i], -1.0, 1.0);
    }
    return out;
}

}  // namespace drm
