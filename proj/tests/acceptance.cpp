// Acceptance suite. Prints one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance N [M ...]  run only the listed criteria
//
// Exit status is 0 iff every selected criterion passes.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "drm/degrade.hpp"
#include "drm/dpt.hpp"
#include "drm/estimate.hpp"
#include "drm/metrics.hpp"
#include "drm/oracle.hpp"
#include "drm/solver.hpp"
#include "drm/synth.hpp"
#include "helpers.hpp"

using namespace drm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v, int digits = 4) {
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

struct Scene {
    DegradationKind kind;
    Image clean;
    Simulation sim;
    ReferencePair ref;
};

/// Target from seed, reference pair of the same kind from seed + 1000.
Scene make_scene(DegradationKind kind, std::uint64_t seed, int size = 64) {
    Scene s{kind, synthesize_clean(size, size, seed), {}, {}};
    s.sim = simulate(s.clean, SimParams{kind, seed});
    const Image ref_clean = synthesize_clean(size, size, seed + 1000);
    s.ref = {simulate(ref_clean, SimParams{kind, seed + 1000}).degraded, ref_clean};
    return s;
}

/// Fixed 20-image suite mixing all three kinds.
std::vector<Scene> mixed_suite() {
    std::vector<Scene> suite;
    for (std::uint64_t i = 0; i < 20; ++i) suite.push_back(make_scene(kAllKinds[i % 3], 100 + i));
    return suite;
}

bool clamp_inactive(const Image& B, const DegradationMatrices& M) {
    for (std::size_t i = 0; i < B.size(); ++i) {
        const double o = M.T[i] * B[i] + M.D[i];
        if (o < 0.0 || o > 1.0) return false;
    }
    return true;
}

// 1. Closed form vs golden-section oracle.
Outcome criterion1() {
    const auto t0 = Clock::now();
    const oracle::UpdateFunctions fns;
    const std::uint64_t seed = 20240601;
    const auto z = oracle::check_update_Z(fns, 1000, seed);
    const auto p = oracle::check_update_P(fns, 1000, seed + 1);
    const auto q = oracle::check_update_Q(fns, 1000, seed + 2);
    const double t = seconds_since(t0);
    const double worst = std::max({z.max_abs_error, p.max_abs_error, q.max_abs_error});
    const bool interior = z.boundary_hits + p.boundary_hits + q.boundary_hits == 0;
    return {worst <= 1e-8 && interior && t <= 10.0,
            "max|err| Z " + num(z.max_abs_error) + ", P " + num(p.max_abs_error) + ", Q " + num(q.max_abs_error) +
                " over 3x1000 instances, " + num(t, 3) + " s"};
}

// 2. Energy descent per alternation with exact priors.
Outcome criterion2() {
    const auto t0 = Clock::now();
    std::size_t traces = 0, violations = 0;
    double worst = 0.0;
    for (auto kind : kAllKinds) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const Scene s = make_scene(kind, seed);
            SolverConfig cfg;
            cfg.priors = default_profile(kind);
            cfg.priors.B = prior::Tikhonov{0.02};  // exact stand-in for the TV image prior
            const auto e = oracle::alternation_energies(s.sim.degraded, s.ref,
                                                        estimate_initial(s.sim.degraded, kind), cfg);
            for (const auto* group : {&e.restoration, &e.degradation}) {
                for (const auto& trace : *group) {
                    const auto r = oracle::check_descent(trace, 1e-9);
                    ++traces;
                    violations += r.violations.size();
                    worst = std::max(worst, r.worst_increase);
                }
            }
        }
    }
    const double t = seconds_since(t0);
    return {violations == 0 && t <= 60.0, std::to_string(traces) + " alternations on 60 instances, " +
                                              std::to_string(violations) + " increases (worst " + num(worst) +
                                              "), " + num(t, 3) + " s"};
}

// 3. One step from ground-truth matrices.
Outcome criterion3() {
    double worst = 1e9;
    int used = 0;
    std::map<DegradationKind, double> per_kind;
    for (auto kind : kAllKinds) per_kind[kind] = 1e9;
    for (auto kind : kAllKinds) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const Scene s = make_scene(kind, seed);
            if (!clamp_inactive(s.clean, s.sim.matrices)) continue;
            SolverConfig cfg;
            cfg.steps = 1;
            cfg.priors = {prior::Identity{}, prior::Identity{}, prior::Identity{}};
            cfg.dpt.rho = 0.0;
            cfg.schedule.gamma0 = 0.5;
            const RestorationResult r = run(s.sim.degraded, s.ref, s.sim.matrices, cfg);
            const double p = psnr(r.B, s.clean);
            worst = std::min(worst, p);
            per_kind[kind] = std::min(per_kind[kind], p);
            ++used;
        }
    }
    std::string detail = std::to_string(used) + " clamp-free images, min PSNR(B1) " + num(worst) + " dB (";
    for (auto kind : kAllKinds) {
        detail += std::string(to_string(kind)) + " ";
        detail += per_kind[kind] < 1e9 ? num(per_kind[kind]) : std::string("none clamp-free");
        detail += kind == DegradationKind::LowLight ? "" : ", ";
    }
    detail += "); need >= 50";
    return {used > 0 && worst >= 50.0, detail};
}

// 4. Mean PSNR non-decreasing in S.
Outcome criterion4() {
    const auto t0 = Clock::now();
    const auto suite = mixed_suite();
    std::vector<double> mean(6, 0.0);
    for (const auto& s : suite) {
        const DegradationKind kind = classify(s.sim.degraded);
        const DegradationMatrices M0 = estimate_initial(s.sim.degraded, kind);
        for (int S = 1; S <= 6; ++S) {
            SolverConfig cfg;
            cfg.steps = S;
            cfg.priors = default_profile(kind);
            mean[S - 1] += psnr(run(s.sim.degraded, s.ref, M0, cfg).B, s.clean) / static_cast<double>(suite.size());
        }
    }
    bool pass = seconds_since(t0) <= 300.0;
    std::string detail = "mean PSNR S=1..6:";
    for (int S = 0; S < 6; ++S) {
        detail += " " + num(mean[S], 5);
        if (S > 0 && mean[S] - mean[S - 1] < -0.05) pass = false;
    }
    return {pass, detail + " dB, " + num(seconds_since(t0), 3) + " s"};
}

// 5. TBplusD beats HB on haze.
Outcome criterion5() {
    double tbd = 0.0, hb = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Scene s = make_scene(DegradationKind::Haze, 200 + seed);
        const DegradationMatrices M0 = estimate_initial(s.sim.degraded, DegradationKind::Haze);
        SolverConfig cfg;
        cfg.priors = default_profile(DegradationKind::Haze);
        tbd += psnr(run(s.sim.degraded, s.ref, M0, cfg).B, s.clean) / 20.0;
        cfg.modeling_form = ModelingForm::HB;
        hb += psnr(run(s.sim.degraded, s.ref, M0, cfg).B, s.clean) / 20.0;
    }
    return {tbd >= hb, "haze mean PSNR TBplusD " + num(tbd, 5) + " dB vs HB " + num(hb, 5) + " dB"};
}

// 6. Loss floors.
Outcome criterion6() {
    const Scene s = make_scene(DegradationKind::Haze, 7);
    const LossWeights w = step_weights(WeightSchedule::Exp, 6);
    const double lres = l_res(std::vector<Image>(6, s.clean), s.clean, w);
    // Ground-truth matrices of the reference pair.
    const Simulation ref = simulate(s.ref.clean, SimParams{DegradationKind::Haze, 1007});
    const double ldeg = l_deg(std::vector<std::pair<Image, Image>>(5, {ref.matrices.T, ref.matrices.D}),
                              ref.degraded, s.ref.clean, w);
    double werr = 0.0;
    const double pow2[] = {2, 4, 8, 16, 32, 64};
    for (int k = 0; k < 6; ++k) werr = std::max(werr, std::abs(w.weights[k] - pow2[k] / 126.0));
    const bool pass = std::abs(lres - 1e-3) <= 1e-12 && std::abs(ldeg - 1e-3) <= 1e-12 && werr <= 1e-12;
    return {pass, "l_res-1e-3 = " + num(lres - 1e-3) + ", l_deg-1e-3 = " + num(ldeg - 1e-3) +
                      ", max weight error " + num(werr)};
}

// 7. Metric identities.
Outcome criterion7() {
    const Image x = testing::random_image(64, 64, 3, 0.0, 0.9);
    Image y = x;
    for (double& v : y.values()) v += 0.1;
    const Image u = synthesize_clean(64, 64, 4), v = testing::random_image(64, 64, 5);
    const double p = psnr(x, y);
    const double self = ssim(u, u);
    const double asym = std::abs(ssim(u, v) - ssim(v, u));
    const bool pass = std::abs(p - 20.0) <= 1e-9 && std::abs(self - 1.0) <= 1e-9 && asym <= 1e-12;
    return {pass, "PSNR(+0.1) - 20 = " + num(p - 20.0) + ", ssim(x,x) - 1 = " + num(self - 1.0) +
                      ", |ssim(x,y) - ssim(y,x)| = " + num(asym)};
}

// 8. invert_model undoes apply_model.
Outcome criterion8() {
    double worst = 0.0;
    std::size_t checked = 0;
    for (auto kind : kAllKinds) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const Scene s = make_scene(kind, seed);
            const Image I = invert_model(s.sim.degraded, s.sim.matrices);
            for (std::size_t i = 0; i < I.size(); ++i) {
                const double raw = s.sim.matrices.T[i] * s.clean[i] + s.sim.matrices.D[i];
                if (s.sim.matrices.T[i] < 0.1 || raw < 0.0 || raw > 1.0) continue;
                worst = std::max(worst, std::abs(I[i] - s.clean[i]));
                ++checked;
            }
        }
    }
    return {checked > 0 && worst <= 1e-3, std::to_string(checked) + " samples, max |I - B| " + num(worst)};
}

// 9. Classifier accuracy.
Outcome criterion9() {
    int correct = 0;
    std::map<DegradationKind, int> hits;
    for (auto kind : kAllKinds) {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const Simulation s = simulate(synthesize_clean(64, 64, seed), SimParams{kind, seed});
            if (classify(s.degraded) == kind) {
                ++correct;
                ++hits[kind];
            }
        }
    }
    const double acc = correct / 300.0;
    return {acc >= 0.95, "accuracy " + num(100 * acc) + "% (rain " + std::to_string(hits[DegradationKind::Rain]) +
                             ", haze " + std::to_string(hits[DegradationKind::Haze]) + ", lowlight " +
                             std::to_string(hits[DegradationKind::LowLight]) + " of 100)"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

/// Relative path -> contents for every regular file under dir.
std::map<std::string, std::string> tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
    }
    return out;
}

int sh(const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); }

// 10. Bitwise determinism of the restore command.
Outcome criterion10() {
    testing::TempDir dir("accept10");
    const std::string exe = DRM_IR_EXE;
    const fs::path root = dir.path();
    if (sh(exe + " simulate --kind rain --generate 3 --size 48x48 --seed 5 --out " + (root / "sim").string()) != 0) {
        return {false, "simulate failed"};
    }
    auto restore = [&](const std::string& tag) {
        return sh(exe + " restore --in " + (root / "sim/degraded").string() + " --ref-pool " +
                  (root / "sim").string() + " --ref-seed 3 --out " + (root / tag / "out").string() +
                  " --dump-intermediate " + (root / tag / "dump").string() + " --dump-attention --gt " +
                  (root / "sim/clean").string());
    };
    if (restore("a") != 0 || restore("b") != 0) return {false, "restore failed"};
    const auto out_a = tree(root / "a/out"), out_b = tree(root / "b/out");
    const auto dump_a = tree(root / "a/dump"), dump_b = tree(root / "b/dump");
    std::size_t files = 0, differing = 0;
    for (const auto* pair : {&out_a, &dump_a}) files += pair->size();
    for (const auto& [name, bytes] : out_a) {
        if (name == "run-manifest.json") continue;  // records its own output paths
        if (!out_b.count(name) || out_b.at(name) != bytes) ++differing;
    }
    for (const auto& [name, bytes] : dump_a) {
        if (!dump_b.count(name) || dump_b.at(name) != bytes) ++differing;
    }
    const bool same_sets = out_a.size() == out_b.size() && dump_a.size() == dump_b.size();
    return {same_sets && differing == 0 && dump_a.size() >= 3 * 6 * 4,
            std::to_string(files) + " files per run, " + std::to_string(differing) + " differ"};
}

// 11. DPT identity and blend contract.
Outcome criterion11() {
    const Image B = synthesize_clean(64, 64, 1), Bref = synthesize_clean(64, 64, 2);
    const Image That = testing::random_image(64, 64, 3, 0.05, 1.0), Dhat = testing::random_image(64, 64, 4, -0.3, 0.3);
    const Image Tprev = testing::random_image(64, 64, 5, -0.2, 1.2), Dprev = testing::random_image(64, 64, 6, -1.5, 1.5);

    const DptOutput zero = transfer(That, Dhat, B, Bref, Tprev, Dprev, {16, 0.1, 0.0});
    const bool identity = zero.T == clamped(Tprev, kTransmissionFloor, 1.0) && zero.D == clamped(Dprev, -1.0, 1.0);

    const Image small = synthesize_clean(12, 12, 7);
    const DptOutput one = transfer(Image(12, 12, 0.5), Image(12, 12, 0.0), small, synthesize_clean(12, 12, 8),
                                   Image(12, 12, 0.3), Image(12, 12, 0.0), {16, 0.1, 0.5});
    double blend_err = 0.0;
    for (double t : one.T.values()) blend_err = std::max(blend_err, std::abs(t - 0.4));

    double row_err = 0.0;
    const DptOutput full = transfer(That, Dhat, B, Bref, Tprev, Dprev, {16, 0.1, 0.5});
    for (const auto* a : {&full.attention, &one.attention}) {
        for (int i = 0; i < a->rows; ++i) {
            double sum = 0.0;
            for (int j = 0; j < a->cols; ++j) sum += a->at(i, j);
            row_err = std::max(row_err, std::abs(sum - 1.0));
        }
    }
    return {identity && blend_err <= 1e-12 && row_err <= 1e-12,
            std::string("rho=0 identity ") + (identity ? "exact" : "broken") + ", blend error " + num(blend_err) +
                ", max |row sum - 1| " + num(row_err)};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>> kCriteria = {
    {"closed-form updates match the numeric oracle", criterion1},
    {"energy descent per alternation", criterion2},
    {"one step from ground-truth matrices reaches 50 dB", criterion3},
    {"mean PSNR non-decreasing in S", criterion4},
    {"TBplusD >= HB on haze", criterion5},
    {"loss floor identities", criterion6},
    {"metric correctness", criterion7},
    {"invert/apply round trip", criterion8},
    {"classifier accuracy >= 95%", criterion9},
    {"restore is bitwise deterministic", criterion10},
    {"DPT identity and blend contract", criterion11},
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        const int n = std::atoi(argv[i]);
        if (n < 1 || n > static_cast<int>(kCriteria.size())) {
            std::cerr << "unknown criterion '" << argv[i] << "'\n";
            return 2;
        }
        selected.push_back(n);
    }
    if (selected.empty()) {
        for (int n = 1; n <= static_cast<int>(kCriteria.size()); ++n) selected.push_back(n);
    }
    bool all = true;
    for (int n : selected) {
        const auto& [name, fn] = kCriteria[n - 1];
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << "criterion " << std::setw(2) << n << " " << (o.pass ? "PASS" : "FAIL") << "  " << name << ": "
                  << o.detail << std::endl;
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
