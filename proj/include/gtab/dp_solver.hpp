#pragma once

/**
 * @file dp_solver.hpp
 * @brief Backward induction for the normalized Bellman recursion of the
 *        batched Gaussian two-armed bandit under a symmetric prior.
 *
 * r(u, t1, t2) = min_l r^(l)(u, t1, t2),
 * r^(1) = eps g^(1)(u, t1, t2) + E r(u - x, t1 + eps, t2),  x ~ N(0, eps t2^2 / (t (t + eps))),
 * and symmetrically for arm 2, with r = 0 on t1 + t2 = 1. The two forced
 * turn-by-turn packets contribute 2 eps sum_i pi_i w_i in closed form; the
 * rest of the risk is the expectation of r(., eps, eps) under N(0, eps / 2).
 */

#include "gtab/core.hpp"
#include "gtab/tables.hpp"

namespace gtab {

struct DpConfig {
    double epsilon = 0.02;
    SymmetricPrior prior = SymmetricPrior::two_point(1.6);
    UGrid grid = UGrid(4.0, 0.01);

    /// Throws ConfigError naming the violated constraint.
    Lattice validate() const;
};

struct RiskParts {
    double total = 0.0;
    double no_initial = 0.0;
};

struct SolveOutput {
    ValueTable value;
    StrategyTable strategy;
    double bayes_risk = 0.0;
    double bayes_risk_no_initial = 0.0;
};

struct SolveOptions {
    /// Keep every slice; otherwise only the initial slice (1, 1) survives.
    bool retain_values = true;
};

/// Closed-form cost of the two forced packets: 2 eps sum_i pi_i w_i.
double initial_stage_cost(const SymmetricPrior& prior, double eps);

SolveOutput solve_invariant(const DpConfig& cfg, const SolveOptions& options = {});

/// Bayes risk from a table holding the (1, 1) slice.
RiskParts assemble_bayes_risk(const ValueTable& value, const SymmetricPrior& prior);

/// Argmin action per state, ties to arm 1; needs a complete table.
StrategyTable extract_strategy(const ValueTable& value);

/// Result of the horizon-N, batch-M problem in dimensional units.
class DimensionalSolution {
public:
    DimensionalSolution(long horizon, long batch, SolveOutput invariant);

    long horizon() const { return N_; }
    long batch() const { return M_; }
    const SolveOutput& invariant() const { return inv_; }

    /// R^B = sqrt(N) * r.
    double bayes_risk() const;
    double bayes_risk_no_initial() const;

    /// R_M(U, n1, n2) = sqrt(N) * r(U / sqrt(N), n1 / N, n2 / N).
    double value(double U, long n1, long n2) const;
    Arm action(double U, long n1, long n2) const;

private:
    std::pair<int, int> packets(long n1, long n2) const;

    long N_;
    long M_;
    SolveOutput inv_;
};

/**
 * Dimensional wrapper: prior atoms are on the half-gap v with support bound
 * C; the problem is mapped to eps = M / N, solved, and rescaled.
 */
DimensionalSolution solve_dimensional(long horizon, long batch, std::span<const PriorAtom> v_atoms,
                                      double C, const UGrid& grid);

}  // namespace gtab
