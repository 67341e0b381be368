#include "drm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "drm/estimate.hpp"
#include "drm/synth.hpp"

namespace drm::oracle {

double numeric_argmin_scalar(const std::function<long double(long double)>& objective, double lo, double hi,
                             double tol) {
    if (!(lo < hi)) throw Error(ErrorCode::InvalidArgument, "numeric_argmin_scalar: lo must be < hi");
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "numeric_argmin_scalar: tol must be > 0");
    const long double inv_phi = (std::sqrt(5.0L) - 1.0L) / 2.0L;
    long double a = lo, b = hi;
    long double c = b - inv_phi * (b - a);
    long double d = a + inv_phi * (b - a);
    long double fc = objective(c), fd = objective(d);
    for (int it = 0; it < 200 && (b - a) > tol; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    return static_cast<double>((a + b) / 2.0L);
}

namespace {

double squared_norm_diff(const Image& a, const Image& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double graph_laplacian_form(const Image& x) {
    double s = 0.0;
    for (int y = 0; y < x.height(); ++y) {
        for (int xx = 0; xx < x.width(); ++xx) {
            for (int c = 0; c < kChannels; ++c) {
                if (xx + 1 < x.width()) {
                    const double d = x.at(y, xx + 1, c) - x.at(y, xx, c);
                    s += d * d;
                }
                if (y + 1 < x.height()) {
                    const double d = x.at(y + 1, xx, c) - x.at(y, xx, c);
                    s += d * d;
                }
            }
        }
    }
    return s;
}

double isotropic_tv(const Image& x) {
    double s = 0.0;
    for (int y = 0; y < x.height(); ++y) {
        for (int xx = 0; xx < x.width(); ++xx) {
            for (int c = 0; c < kChannels; ++c) {
                const double gx = xx + 1 < x.width() ? x.at(y, xx + 1, c) - x.at(y, xx, c) : 0.0;
                const double gy = y + 1 < x.height() ? x.at(y + 1, xx, c) - x.at(y, xx, c) : 0.0;
                s += std::hypot(gx, gy);
            }
        }
    }
    return s;
}

}  // namespace

double prior_energy(const PriorOperator& op, const Image& x) {
    if (const auto* s = std::get_if<prior::SoftThreshold>(&op)) {
        double l1 = 0.0;
        for (double v : x.values()) l1 += std::abs(v);
        return s->lambda * l1;
    }
    if (const auto* t = std::get_if<prior::Tikhonov>(&op)) return t->lambda * graph_laplacian_form(x);
    if (const auto* t = std::get_if<prior::TotalVariation>(&op)) return t->lambda * isotropic_tv(x);
    return 0.0;
}

double energy_restoration(const Image& O, const Image& B, const Image& Z, const Image& T, const Image& D,
                          double gamma, const PriorOperator& prior_B) {
    for (const Image* a : {&B, &Z, &T, &D}) require_same_shape("energy_restoration", O, *a);
    double data = 0.0;
    for (std::size_t i = 0; i < O.size(); ++i) {
        const double r = O[i] - (T[i] * Z[i] + D[i]);
        data += r * r;
    }
    return 0.5 * data + prior_energy(prior_B, B) + 0.5 * gamma * squared_norm_diff(Z, B);
}

double energy_degradation(const Image& O_ref, const Image& B_ref, const Image& P, const Image& Q, const Image& T,
                          const Image& D, double alpha, double beta, const PriorOperator& prior_T,
                          const PriorOperator& prior_D) {
    for (const Image* a : {&B_ref, &P, &Q, &T, &D}) require_same_shape("energy_degradation", O_ref, *a);
    double data = 0.0;
    for (std::size_t i = 0; i < O_ref.size(); ++i) {
        const double r = O_ref[i] - (P[i] * B_ref[i] + Q[i]);
        data += r * r;
    }
    return 0.5 * data + prior_energy(prior_T, T) + prior_energy(prior_D, D) + 0.5 * alpha * squared_norm_diff(P, T) +
           0.5 * beta * squared_norm_diff(Q, D);
}

DescentReport check_descent(const std::vector<double>& trace, double slack) {
    if (!(slack >= 0.0)) throw Error(ErrorCode::InvalidArgument, "check_descent: slack must be >= 0");
    DescentReport report;
    for (std::size_t i = 1; i < trace.size(); ++i) {
        const double increase = trace[i] - trace[i - 1];
        report.worst_increase = std::max(report.worst_increase, increase);
        if (increase > slack) {
            report.pass = false;
            report.violations.push_back(i);
        }
    }
    return report;
}

Image dense_tikhonov(const Image& z, double lambda, double gamma) {
    const int h = z.height(), w = z.width();
    const int n = h * w;
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) * gamma;
    auto idx = [w](int y, int x) { return y * w + x; };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int i = idx(y, x);
            const int nbrs[4][2] = {{y - 1, x}, {y + 1, x}, {y, x - 1}, {y, x + 1}};
            for (const auto& nb : nbrs) {
                if (nb[0] < 0 || nb[0] >= h || nb[1] < 0 || nb[1] >= w) continue;
                A(i, i) += 2.0 * lambda;
                A(i, idx(nb[0], nb[1])) -= 2.0 * lambda;
            }
        }
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Image out(h, w);
    for (int c = 0; c < kChannels; ++c) {
        Eigen::VectorXd rhs(n);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) rhs(idx(y, x)) = gamma * z.at(y, x, c);
        const Eigen::VectorXd sol = lu.solve(rhs);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) out.at(y, x, c) = sol(idx(y, x));
    }
    return out;
}

namespace {

constexpr double kBracketLo = -2.0;
constexpr double kBracketHi = 3.0;
constexpr double kSearchTol = 1e-12;

Image scalar(double v) { return Image(1, 1, v); }

// Shared driver: draw an instance, get the closed form on a 1x1 image,
// minimize the scalar objective numerically, record the gap.
template <class Draw>
OracleAgreement agreement(std::size_t instances, std::uint64_t seed, Draw&& draw) {
    std::mt19937_64 rng(seed);
    OracleAgreement out;
    for (std::size_t n = 0; n < instances; ++n) {
        const auto [closed, objective] = draw(rng);
        const double numeric = numeric_argmin_scalar(objective, kBracketLo, kBracketHi, kSearchTol);
        if (numeric - kBracketLo < 1e-6 || kBracketHi - numeric < 1e-6) ++out.boundary_hits;
        out.max_abs_error = std::max(out.max_abs_error, std::abs(closed - numeric));
        ++out.instances;
    }
    return out;
}

using Objective = std::function<long double(long double)>;

}  // namespace

OracleAgreement check_update_Z(const UpdateFunctions& fns, std::size_t instances, std::uint64_t seed) {
    return agreement(instances, seed, [&](std::mt19937_64& rng) {
        const double O = uniform01(rng), B = uniform01(rng), T = uniform(rng, 1e-3, 1.0);
        const double D = uniform(rng, -0.2, 0.5), gamma = uniform(rng, 0.5, 0.75);
        const double closed = fns.z(scalar(O), scalar(B), scalar(T), scalar(D), gamma)[0];
        Objective f = [=](long double z) {
            const long double r = O - (T * z + D);
            return 0.5L * r * r + 0.5L * gamma * (z - B) * (z - B);
        };
        return std::pair{closed, f};
    });
}

OracleAgreement check_update_P(const UpdateFunctions& fns, std::size_t instances, std::uint64_t seed) {
    return agreement(instances, seed, [&](std::mt19937_64& rng) {
        const double O = uniform01(rng), Bref = uniform01(rng), T = uniform(rng, 1e-3, 1.0);
        const double Q = uniform(rng, -0.2, 0.5), alpha = uniform(rng, 0.5, 0.75);
        const double closed = fns.p(scalar(O), scalar(Bref), scalar(T), scalar(Q), alpha)[0];
        Objective f = [=](long double p) {
            const long double r = O - (p * Bref + Q);
            return 0.5L * r * r + 0.5L * alpha * (p - T) * (p - T);
        };
        return std::pair{closed, f};
    });
}

OracleAgreement check_update_Q(const UpdateFunctions& fns, std::size_t instances, std::uint64_t seed) {
    return agreement(instances, seed, [&](std::mt19937_64& rng) {
        const double O = uniform01(rng), Bref = uniform01(rng), P = uniform(rng, 1e-3, 1.0);
        const double D = uniform(rng, -0.2, 0.5), beta = uniform(rng, 0.5, 0.75);
        const double closed = fns.q(scalar(O), scalar(Bref), scalar(P), scalar(D), beta)[0];
        Objective f = [=](long double q) {
            const long double r = O - (P * Bref + q);
            return 0.5L * r * r + 0.5L * beta * (q - D) * (q - D);
        };
        return std::pair{closed, f};
    });
}

AlternationEnergies alternation_energies(const Image& O, const ReferencePair& ref, const DegradationMatrices& initial,
                                         const SolverConfig& cfg, const UpdateFunctions& fns) {
    cfg.validate();
    SolverState s = init_state(O, initial);
    const auto& pr = cfg.priors;
    AlternationEnergies out;
    for (int k = 1; k <= cfg.steps; ++k) {
        const double gamma = cfg.schedule.gamma(k);
        std::vector<double> er;
        er.push_back(energy_restoration(O, s.B, s.Z, s.T, s.D, gamma, pr.B));
        s.Z = clamped(fns.z(O, s.B, s.T, s.D, gamma), 0.0, 1.0);
        er.push_back(energy_restoration(O, s.B, s.Z, s.T, s.D, gamma, pr.B));
        s.B = apply_prior_B(pr, s.Z, gamma);
        er.push_back(energy_restoration(O, s.B, s.Z, s.T, s.D, gamma, pr.B));
        out.restoration.push_back(std::move(er));
        if (k == cfg.steps) break;

        const double alpha = cfg.schedule.alpha(k), beta = cfg.schedule.beta(k);
        std::vector<double> ed;
        ed.push_back(energy_degradation(ref.degraded, ref.clean, s.P, s.Q, s.T, s.D, alpha, beta, pr.T, pr.D));
        Image P = fns.p(ref.degraded, ref.clean, s.T, s.Q, alpha);
        Image Q = fns.q(ref.degraded, ref.clean, s.P, s.D, beta);
        ed.push_back(energy_degradation(ref.degraded, ref.clean, P, Q, s.T, s.D, alpha, beta, pr.T, pr.D));
        auto [T_hat, D_hat] = apply_prior_TD(pr, P, Q, alpha, beta);
        ed.push_back(energy_degradation(ref.degraded, ref.clean, P, Q, T_hat, D_hat, alpha, beta, pr.T, pr.D));
        out.degradation.push_back(std::move(ed));

        DptOutput moved = transfer(T_hat, D_hat, s.B, ref.clean, s.T, s.D, cfg.dpt);
        s.P = std::move(P);
        s.Q = std::move(Q);
        s.T = std::move(moved.T);
        s.D = std::move(moved.D);
    }
    return out;
}

namespace {

std::string fmt_err(const char* label, double v) {
    std::ostringstream os;
    os << label << std::scientific << v;
    return os.str();
}

CheckResult agreement_check(const char* name, const OracleAgreement& a, double tol) {
    std::ostringstream os;
    os << a.instances << " instances, max |closed - numeric| = " << std::scientific << a.max_abs_error;
    if (a.boundary_hits) os << ", " << a.boundary_hits << " bracket hits";
    return {name, a.max_abs_error <= tol && a.boundary_hits == 0, os.str()};
}

// Exact-prox optimality: no small perturbation lowers the prox objective.
CheckResult prox_optimality(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const PriorOperator ops[] = {prior::Identity{}, prior::BoxClamp{0.2, 0.8}, prior::SoftThreshold{0.1}};
    std::size_t failures = 0, trials = 0;
    for (const auto& op : ops) {
        for (int n = 0; n < 100; ++n) {
            Image z(4, 4);
            for (double& v : z.values()) v = uniform(rng, -1.0, 2.0);
            const double gamma = uniform(rng, 0.5, 1.0);
            const Image x = prox(op, z, gamma);
            auto objective = [&](const Image& v) {
                if (const auto* b = std::get_if<prior::BoxClamp>(&op)) {
                    for (double e : v.values())
                        if (e < b->lo || e > b->hi) return std::numeric_limits<double>::infinity();
                }
                return prior_energy(op, v) + 0.5 * gamma * squared_norm_diff(z, v);
            };
            const double fx = objective(x);
            for (int p = 0; p < 10; ++p) {
                Image moved = x;
                double norm = 0.0;
                std::vector<double> delta(x.size());
                for (double& d : delta) {
                    d = uniform(rng, -1.0, 1.0);
                    norm += d * d;
                }
                const double scale = uniform(rng, 0.0, 1e-3) / std::sqrt(norm);
                for (std::size_t i = 0; i < x.size(); ++i) moved[i] += scale * delta[i];
                ++trials;
                if (fx > objective(moved) + 1e-12) ++failures;
            }
        }
    }
    return {"prox optimality (identity, box, soft-threshold)", failures == 0,
            std::to_string(trials) + " perturbations, " + std::to_string(failures) + " improved on the prox"};
}

CheckResult tikhonov_vs_dense(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int size : {4, 8, 12, 16}) {
        Image z(size, size);
        for (double& v : z.values()) v = uniform01(rng);
        const double lambda = 0.2, gamma = 1.0;
        const Image cg = prox(prior::Tikhonov{lambda, 1e-13, 5000}, z, gamma);
        const Image dense = dense_tikhonov(z, lambda, gamma);
        for (std::size_t i = 0; i < cg.size(); ++i) worst = std::max(worst, std::abs(cg[i] - dense[i]));
    }
    return {"tikhonov CG vs dense solve (<= 16x16)", worst <= 1e-8, fmt_err("max abs diff = ", worst)};
}

CheckResult descent_check(const UpdateFunctions& fns, std::uint64_t seed) {
    double worst = 0.0;
    bool pass = true;
    int cases = 0;
    for (auto kind : kAllKinds) {
        for (int i = 0; i < 2; ++i) {
            const Image B = synthesize_clean(32, 32, seed + 17 * i);
            const Image Bref = synthesize_clean(32, 32, seed + 17 * i + 1000);
            SimParams sp;
            sp.kind = kind;
            sp.seed = seed + i;
            const auto target = simulate(B, sp);
            sp.seed += 500;
            const auto reference = simulate(Bref, sp);
            SolverConfig cfg;
            cfg.priors = default_profile(kind);
            cfg.priors.B = prior::Tikhonov{0.02};
            cfg.dpt.patch = 8;
            const auto e = alternation_energies(target.degraded, {reference.degraded, Bref},
                                                estimate_initial(target.degraded, kind), cfg, fns);
            for (const auto* group : {&e.restoration, &e.degradation}) {
                for (const auto& trace : *group) {
                    const auto r = check_descent(trace, 1e-9);
                    pass = pass && r.pass;
                    worst = std::max(worst, r.worst_increase);
                }
            }
            ++cases;
        }
    }
    return {"energy descent per alternation (exact priors)", pass,
            std::to_string(cases) + " runs, " + fmt_err("worst increase = ", worst)};
}

CheckResult checker_self_test() {
    const bool ok = check_descent({3.0, 2.0, 1.0}, 1e-9).pass && check_descent({1.0, 1.0, 1.0}, 0.0).pass &&
                    !check_descent({3.0, 2.0, 2.001, 1.0}, 1e-9).pass &&
                    check_descent({3.0, 2.0, 2.001, 1.0}, 1e-9).violations == std::vector<std::size_t>{2};
    return {"descent checker self-test", ok, ok ? "pass/fail contract holds" : "checker misreports"};
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
    std::vector<CheckResult> results;
    results.push_back(agreement_check("update_Z vs golden-section",
                                      check_update_Z(options.updates, options.instances, options.seed), 1e-8));
    results.push_back(agreement_check("update_P vs golden-section",
                                      check_update_P(options.updates, options.instances, options.seed + 1), 1e-8));
    results.push_back(agreement_check("update_Q vs golden-section",
                                      check_update_Q(options.updates, options.instances, options.seed + 2), 1e-8));
    results.push_back(prox_optimality(options.seed + 3));
    results.push_back(tikhonov_vs_dense(options.seed + 4));
    results.push_back(descent_check(options.updates, options.seed + 5));
    results.push_back(checker_self_test());
    return results;
}

}  // namespace drm::oracle
