#include <doctest.h>

#include "drm/degrade.hpp"
#include "drm/estimate.hpp"
#include "drm/filters.hpp"
#include "drm/synth.hpp"
#include "helpers.hpp"

using namespace drm;

TEST_CASE("classifier thresholds on constant images") {
    CHECK(classify(Image(32, 32, 0.05)) == DegradationKind::LowLight);
    CHECK(classify(Image(32, 32, 0.8)) == DegradationKind::Haze);
    const ImageStatistics s = image_statistics(Image(32, 32, 0.8));
    CHECK(s.mean_luminance == doctest::Approx(0.8));
    CHECK(s.dark_channel_mean == doctest::Approx(0.8));
}

TEST_CASE("classifier thresholds are configurable") {
    ClassifierConfig cfg;
    cfg.lowlight_luminance = 0.9;
    CHECK(classify(Image(16, 16, 0.8), cfg) == DegradationKind::LowLight);
}

TEST_CASE("classifier on a small simulated suite") {
    int correct = 0, total = 0;
    for (auto kind : kAllKinds) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const Simulation s = simulate(synthesize_clean(64, 64, seed), SimParams{kind, seed});
            correct += classify(s.degraded) == kind;
            ++total;
        }
    }
    CHECK(correct >= 28);
}

TEST_CASE("rain estimate: black region gives zero D, T = 1") {
    Image O(32, 32, 0.0);
    for (int y = 0; y < 32; ++y) {
        for (int c = 0; c < 3; ++c) O.at(y, 20, c) = 0.7;
    }
    const DegradationMatrices M = estimate_initial(O, DegradationKind::Rain);
    CHECK(M.D.at(5, 5, 0) == 0.0);
    CHECK(M.D.at(5, 20, 0) == doctest::Approx(0.7));
    for (double t : M.T.values()) CHECK(t == 1.0);
}

TEST_CASE("haze estimate: zero dark channel gives T = 1") {
    Image O(40, 40, 0.6);
    for (int y = 0; y < 40; ++y) {
        for (int x = 0; x < 40; ++x) O.at(y, x, 2) = 0.0;
    }
    const DegradationMatrices M = estimate_initial(O, DegradationKind::Haze);
    CHECK(M.T.at(20, 20, 0) == doctest::Approx(1.0));
    CHECK(M.valid_for(O));
}

TEST_CASE("haze estimate tracks the simulated transmission") {
    const Image B = synthesize_clean(64, 64, 3);
    const Simulation s = simulate(B, SimParams{DegradationKind::Haze, 3});
    const DegradationMatrices M = estimate_initial(s.degraded, DegradationKind::Haze);
    CHECK(std::abs(M.T.mean() - s.matrices.T.mean()) < 0.25);
    const auto A = estimate_airlight(s.degraded);
    for (double a : A) {
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);
    }
}

TEST_CASE("lowlight estimate on a uniform 0.25 transmission") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Image B = synthesize_clean(64, 64, seed);
        const DegradationMatrices truth{Image(64, 64, 0.25), Image(64, 64, 0.0)};
        const DegradationMatrices M = estimate_initial(apply_model(B, truth), DegradationKind::LowLight);
        CHECK(std::abs(M.T.mean() - 0.25) <= 0.1);
        for (double d : M.D.values()) CHECK(d == 0.0);
    }
}

TEST_CASE("init_state copies its inputs bit for bit") {
    const Image O = testing::random_image(9, 7, 4);
    const DegradationMatrices M0 = estimate_initial(O, DegradationKind::Haze);
    const SolverState s = init_state(O, M0);
    CHECK(s.B == O);
    CHECK(s.Z == O);
    CHECK(s.T == M0.T);
    CHECK(s.D == M0.D);
    CHECK(s.P == s.T);
    CHECK(s.Q == s.D);
    CHECK(s.k == 0);
    CHECK_NOTHROW(s.validate());
    CHECK_THROWS_AS(init_state(O, identity_matrices(3, 3)), Error);
}

TEST_CASE("filters") {
    using namespace drm::filters;
    SUBCASE("median removes an isolated impulse") {
        Image img(9, 9, 0.2);
        img.at(4, 4, 1) = 1.0;
        CHECK(median_filter(img, 5).at(4, 4, 1) == doctest::Approx(0.2));
    }
    SUBCASE("blur preserves constants") {
        Plane p{10, 12, std::vector<double>(120, 0.4)};
        for (double v : gaussian_blur(p, 2.0).data) CHECK(v == doctest::Approx(0.4));
    }
    SUBCASE("dark channel is the windowed channel minimum") {
        Image img(7, 7, 0.9);
        img.at(3, 3, 0) = 0.1;
        const Plane d = dark_channel(img, 3);
        CHECK(d.at(2, 2) == doctest::Approx(0.1));
        CHECK(d.at(0, 0) == doctest::Approx(0.9));
    }
}
