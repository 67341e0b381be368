#pragma once

#include "drm/image.hpp"

namespace drm {

/// Iterate set of the joint unfolding: restoration variables (B, Z),
/// degradation matrices (T, D), their auxiliaries (P, Q) and the step index.
struct SolverState {
    Image B;
    Image Z;
    Image T;
    Image D;
    Image P;
    Image Q;
    int k = 0;

    /// Shapes equal, finite, T in [1e-3, 1]. Throws on violation.
    void validate() const;
};

}  // namespace drm
