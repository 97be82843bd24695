#pragma once

/**
 * @file pde_limit.hpp
 * @brief Explicit finite-difference scheme for the small-eps limit of the
 *        Bellman recursion (an obstacle-type second-order equation in u).
 *
 * Each step replaces the Gaussian transition by next + eps * c_l * D2(next),
 * c_l = t_other^2 / (2 t (t + eps)), and takes the pointwise minimum over
 * arms. Values vanish on t1 + t2 = 1 and outside the u-domain.
 */

#include <optional>

#include "gtab/core.hpp"
#include "gtab/tables.hpp"

namespace gtab {

struct PdeConfig {
    double epsilon = 0.001;
    double du = 0.032;
    double u_max = 2.3;
    SymmetricPrior prior = SymmetricPrior::two_point(1.57);

    /// Grid actually used: spacing du, extended to reach at least u_max.
    UGrid grid() const { return UGrid::covering(u_max, du); }

    /// Enforces eps * c_max / du^2 <= 1/2 with c_max = 1/2.
    Lattice validate() const;
};

struct PdeOptions {
    bool retain_values = false;
    bool build_strategy = false;
};

struct PdeOutput {
    ValueTable value;
    std::optional<StrategyTable> strategy;
    double limit_risk = 0.0;
    double limit_risk_no_initial = 0.0;
};

PdeOutput pde_solve(const PdeConfig& cfg, const PdeOptions& options = {});

}  // namespace gtab
