#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "drm/image.hpp"
#include "drm/priors.hpp"
#include "drm/solver.hpp"

// Independent evaluators used to check the solver: brute-force scalar
// minimization, direct energy evaluation, dense linear solves and descent
// checks. Nothing here calls into the closed-form update path.
namespace drm::oracle {

/// Golden-section search on [lo, hi] in extended precision. Stops when the
/// bracket is narrower than tol or after 200 iterations.
double numeric_argmin_scalar(const std::function<long double(long double)>& objective, double lo, double hi,
                             double tol);

/// lambda * Phi(x) for the operator's analytic prior; 0 for Identity and
/// BoxClamp (the indicator is satisfied by construction).
double prior_energy(const PriorOperator& op, const Image& x);

/// 1/2 ||O - (T Z + D)||^2 + lambda Phi(B) + gamma/2 ||Z - B||^2.
double energy_restoration(const Image& O, const Image& B, const Image& Z, const Image& T, const Image& D,
                          double gamma, const PriorOperator& prior_B);

/// 1/2 ||O_ref - (P B_ref + Q)||^2 + Psi(T, D) + alpha/2 ||P - T||^2 + beta/2 ||Q - D||^2,
/// with Psi(T, D) = prior_energy(prior_T, T) + prior_energy(prior_D, D).
double energy_degradation(const Image& O_ref, const Image& B_ref, const Image& P, const Image& Q, const Image& T,
                          const Image& D, double alpha, double beta, const PriorOperator& prior_T,
                          const PriorOperator& prior_D);

struct EnergyTrace {
    std::vector<double> restoration;
    std::vector<double> degradation;
};

struct DescentReport {
    bool pass = true;
    std::vector<std::size_t> violations;  // index i where trace[i] > trace[i-1] + slack
    double worst_increase = 0.0;
};

DescentReport check_descent(const std::vector<double>& trace, double slack);

/// Dense LU solve of (gamma I + 2 lambda L) x = gamma z, per channel.
Image dense_tikhonov(const Image& z, double lambda, double gamma);

/// The solver entry points the verification suite exercises. Defaults point
/// at the library implementation; tests and the CLI fault hook swap them.
struct UpdateFunctions {
    std::function<Image(const Image&, const Image&, const Image&, const Image&, double)> z = update_Z;
    std::function<Image(const Image&, const Image&, const Image&, const Image&, double)> p = update_P;
    std::function<Image(const Image&, const Image&, const Image&, const Image&, double)> q = update_Q;
};

struct OracleAgreement {
    double max_abs_error = 0.0;
    std::size_t instances = 0;
    std::size_t boundary_hits = 0;  // numeric minimizer landed on the bracket edge
};

/// Seeded random scalar instances of each quadratic subproblem compared
/// against golden-section minimization over [-2, 3].
OracleAgreement check_update_Z(const UpdateFunctions& fns, std::size_t instances, std::uint64_t seed);
OracleAgreement check_update_P(const UpdateFunctions& fns, std::size_t instances, std::uint64_t seed);
OracleAgreement check_update_Q(const UpdateFunctions& fns, std::size_t instances, std::uint64_t seed);

/// Energies around each alternation of a parallel run with the given
/// initialization. Penalties are fixed within each step:
///   restoration: [E(Z_{k-1}, B_{k-1}), E(Z_k, B_{k-1}), E(Z_k, B_k)]
///   degradation: [E(P_{k-1}, Q_{k-1}, T_{k-1}, D_{k-1}), E(P_k, Q_k, T_{k-1}, D_{k-1}),
///                 E(P_k, Q_k, T_hat_k, D_hat_k)]
/// The transfer between steps is outside both alternations.
struct AlternationEnergies {
    std::vector<std::vector<double>> restoration;
    std::vector<std::vector<double>> degradation;
};

AlternationEnergies alternation_energies(const Image& O, const ReferencePair& ref, const DegradationMatrices& initial,
                                         const SolverConfig& cfg, const UpdateFunctions& fns = {});

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyOptions {
    std::size_t instances = 1000;
    std::uint64_t seed = 20240601;
    UpdateFunctions updates;
};

/// Full oracle suite: closed-form agreement, prox optimality, CG vs dense
/// solve, energy descent, descent-checker self-test.
std::vector<CheckResult> run_verification(const VerifyOptions& options);

}  // namespace drm::oracle
