#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "su11/algebra.hpp"
#include "su11/propagate.hpp"
#include "su11/synthesis.hpp"

namespace su11 {

struct Problem {
    AlgebraElement A, B;
    GroupElement target;
};

struct NotControllableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SearchConfig {
    double costate_bound = 1.0;  // starts drawn from |s_i| <= bound
    int starts = 64;
    double tolerance = 1e-6;     // accepted Frobenius residual
    double max_T = 60.0;
    double min_T = 1e-2;
    std::uint64_t seed = 1;
    bool free_time = true;       // free final time (adds the transversality condition c1 = 0)
    double fixed_T = 0.0;        // used when free_time is false
    double step = kDefaultStep;  // propagation step for polishing and verification
    double scan_step = 1e-2;     // coarse step for the distance scan and first refinement
    int seeds_per_start = 4;     // distance minima refined per start
    double seed_distance = 3.0;  // only minima below this distance are refined
    int max_evaluations = 400;   // per local refinement
    double lm_tolerance = 1e-13;
    int threads = 0;             // 0: hardware concurrency
    bool use_endpoint_constraint = true;
};

struct Candidate {
    Costate costate;
    double T = 0.0;
    ExtremalControl control;
    double J = 0.0;
    double residual = 0.0;           // Frobenius distance at T
    double extremal_residual = 0.0;  // max |du/dt^2 - f(u)| / (1 + |f(u)|) along the law
    bool endpoint_ok = false;
    bool abnormal = false;

    nlohmann::json summary() const;
};

// Frobenius distance at T under the synthesized closed-form law of S.
double residual(const Costate& s, double T, const Problem& pb, double step = kDefaultStep);
// Both conserved quantities agree between 0 and T when evaluated with the transported costate.
bool endpoint_filter(const Costate& s, double T, const Problem& pb, double tol = 1e-6, double step = kDefaultStep);
// Same check on a state reached by an arbitrary control (X(T) given).
bool endpoint_filter(const Costate& s, const GroupElement& xT, const Problem& pb, double tol = 1e-6);

// Closed form of du/dt^2 = f(u) along the law on [0, T] (central differences).
double extremal_equation_residual(const ExtremalControl& law, double T, int samples = 400);

// Linear constraint <S, n> = 0 implied by the first endpoint relation when its quadratic part vanishes
// (the control generator is invariant under conjugation by X_f up to sign); empty otherwise.
std::optional<AlgebraElement> endpoint_linear_constraint(const Problem& pb, double tol = 1e-9);

// The constraint specialized to A = Kz, B = -Kx + Ky, X_f = exp(-2Kx + 2Ky): sz = k (sx + sy).
double example2_manifold_coefficient();
double example2_manifold(double sx, double sy);

struct SolveReport {
    std::vector<Candidate> candidates;  // cost-sorted
    int starts = 0;
    int refinements = 0;
    bool found() const { return !candidates.empty(); }
};

// Throws NotControllableError when the system fails the controllability test.
SolveReport solve(const Problem& pb, const SearchConfig& cfg);

// Abnormal candidate (constant control -alpha/gamma) when X_f lies on its one-parameter subgroup.
std::optional<Candidate> abnormal_candidate(const Problem& pb, double max_T, double step = kDefaultStep);

}  // namespace su11
