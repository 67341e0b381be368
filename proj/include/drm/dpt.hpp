#pragma once

#include <vector>

#include "drm/image.hpp"

namespace drm {

struct DptConfig {
    int patch = 16;     // feature pooling factor
    double tau = 0.1;   // softmax temperature
    double rho = 0.5;   // weight of the transferred matrices in the blend

    void validate() const;
};

/// Average-pooled patch features, dim 3.
FeatureGrid extract_features(const Image& img, int patch);

/// Row-stochastic target-by-reference attention.
struct AttentionMatrix {
    int rows = 0;  // target patches
    int cols = 0;  // reference patches
    std::vector<double> weights;

    double at(int i, int j) const { return weights[static_cast<std::size_t>(i) * cols + j]; }
};

/// a[i][j] = softmax_j(-||f_tgt[i] - f_ref[j]||^2 / tau).
AttentionMatrix patch_attention(const FeatureGrid& target, const FeatureGrid& reference, double tau);

/// Bilinear upsampling of a patch grid to height x width, sampling each
/// pixel centre in grid coordinates and clamping at the grid border.
Image upsample_bilinear(const FeatureGrid& grid, int height, int width);

struct DptOutput {
    Image T;
    Image D;
    AttentionMatrix attention;
    Image T_transfer;  // full-resolution transfer before blending
    Image D_transfer;
};

/// Converts reference-oriented matrices (T_hat, D_hat) into target-relevant
/// ones: features of B_k query features of B_ref, the attention mixes the
/// pooled T_hat / D_hat, and the upsampled result is blended with the
/// previous matrices:
///   T = clamp((1 - rho) T_prev + rho T_tr, 1e-3, 1)
///   D = clamp((1 - rho) D_prev + rho D_tr, -1, 1)
DptOutput transfer(const Image& T_hat, const Image& D_hat, const Image& B_k, const Image& B_ref,
                   const Image& T_prev, const Image& D_prev, const DptConfig& cfg);

}  // namespace drm
