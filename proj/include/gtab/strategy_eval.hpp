#pragma once

/**
 * @file strategy_eval.hpp
 * @brief Expected loss of a fixed, possibly randomized, strategy under a
 *        symmetric prior, by the same backward recursion with the min
 *        replaced by the strategy's mixture of the two arm-wise terms.
 */

#include <functional>
#include <optional>
#include <vector>

#include "gtab/core.hpp"
#include "gtab/dp_solver.hpp"
#include "gtab/tables.hpp"

namespace gtab {

/// Probability of choosing arm 1 at every decision state and grid node.
class EvalStrategy {
public:
    using Rule = std::function<double(int k1, int k2, double u)>;

    static EvalStrategy from_table(const StrategyTable& table);
    static EvalStrategy constant(const Lattice& lattice, const UGrid& grid, double prob_arm_one);
    static EvalStrategy from_rule(const Lattice& lattice, const UGrid& grid, const Rule& rule);
    /// Starts with no state defined; fill with set_row.
    static EvalStrategy empty(const Lattice& lattice, const UGrid& grid);

    const Lattice& lattice() const { return lattice_; }
    const UGrid& grid() const { return grid_; }

    bool defined(int k1, int k2) const;
    /// Throws StructureError if the state has no probabilities.
    std::span<const double> row(int k1, int k2) const;
    void set_row(int k1, int k2, std::vector<double> prob_arm_one);

private:
    EvalStrategy(Lattice lattice, UGrid grid);

    Lattice lattice_;
    UGrid grid_;
    std::vector<std::vector<double>> sigma_;
};

struct EvalResult {
    double total_loss = 0.0;
    double loss_no_initial = 0.0;
};

/// Normalized expected loss N^{-1/2} L_N(sigma, rho) of `strategy` under `prior`.
EvalResult evaluate(const EvalStrategy& strategy, const SymmetricPrior& prior, double eps,
                    const UGrid& grid);

struct CurveRow {
    double d = 0.0;
    double bayes_risk = 0.0;
    double expected_loss = 0.0;
    double bayes_risk_no_init = 0.0;
    double expected_loss_no_init = 0.0;
};

/**
 * Risk and expected-loss curves over two-point priors {+-d}. With a strategy,
 * expected losses are those of that fixed strategy; with std::nullopt the
 * per-d Bayes strategy is used, so the loss columns equal the risk columns.
 */
std::vector<CurveRow> risk_curve(const std::optional<EvalStrategy>& strategy,
                                 std::span<const double> d_values, double eps, const UGrid& grid);

}  // namespace gtab
