#include "gtab/strategy_eval.hpp"

#include <sstream>

#include "gtab/errors.hpp"
#include "parallel.hpp"
#include "sweep.hpp"

namespace gtab {

EvalStrategy::EvalStrategy(Lattice lattice, UGrid grid)
    : lattice_(lattice), grid_(grid), sigma_(lattice.decision_state_count()) {}

EvalStrategy EvalStrategy::empty(const Lattice& lattice, const UGrid& grid) {
    return EvalStrategy(lattice, grid);
}

EvalStrategy EvalStrategy::from_table(const StrategyTable& table) {
    EvalStrategy s(table.lattice(), table.grid());
    const int P = table.lattice().packets();
    for (int K = 2; K <= P - 1; ++K) {
        for (int k1 = 1; k1 <= K - 1; ++k1) {
            const auto actions = table.row(k1, K - k1);
            std::vector<double> p(actions.size());
            for (std::size_t i = 0; i < actions.size(); ++i) {
                p[i] = actions[i] == static_cast<std::uint8_t>(Arm::One) ? 1.0 : 0.0;
            }
            s.set_row(k1, K - k1, std::move(p));
        }
    }
    return s;
}

EvalStrategy EvalStrategy::constant(const Lattice& lattice, const UGrid& grid,
                                    double prob_arm_one) {
    return from_rule(lattice, grid, [prob_arm_one](int, int, double) { return prob_arm_one; });
}

EvalStrategy EvalStrategy::from_rule(const Lattice& lattice, const UGrid& grid, const Rule& rule) {
    EvalStrategy s(lattice, grid);
    const int P = lattice.packets();
    for (int K = 2; K <= P - 1; ++K) {
        for (int k1 = 1; k1 <= K - 1; ++k1) {
            std::vector<double> p(grid.size());
            for (int i = 0; i < grid.size(); ++i) p[i] = rule(k1, K - k1, grid.point(i));
            s.set_row(k1, K - k1, std::move(p));
        }
    }
    return s;
}

bool EvalStrategy::defined(int k1, int k2) const {
    return lattice_.contains(k1, k2) && !lattice_.terminal(k1, k2) &&
           !sigma_[lattice_.index(k1, k2)].empty();
}

std::span<const double> EvalStrategy::row(int k1, int k2) const {
    if (!defined(k1, k2)) {
        std::ostringstream os;
        os << "strategy undefined at reachable state (k1, k2) = (" << k1 << ", " << k2 << ")";
        throw StructureError(os.str());
    }
    return sigma_[lattice_.index(k1, k2)];
}

void EvalStrategy::set_row(int k1, int k2, std::vector<double> prob_arm_one) {
    if (lattice_.terminal(k1, k2)) {
        throw StructureError("strategy: terminal states carry no decision");
    }
    if (static_cast<int>(prob_arm_one.size()) != grid_.size()) {
        throw StructureError("strategy row length does not match the u-grid");
    }
    for (double p : prob_arm_one) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ConfigError("strategy probability of arm 1 must lie in [0, 1]");
        }
    }
    sigma_[lattice_.index(k1, k2)] = std::move(prob_arm_one);
}

EvalResult evaluate(const EvalStrategy& strategy, const SymmetricPrior& prior, double eps,
                    const UGrid& grid) {
    const Lattice lattice = Lattice::from_epsilon(eps);
    if (!(strategy.lattice() == lattice)) {
        throw StructureError("strategy lattice does not match 1/eps");
    }
    if (!(strategy.grid() == grid)) {
        throw StructureError("strategy u-grid does not match the evaluation grid");
    }
    const detail::ConvolutionContinuation cont(lattice, grid);
    auto combine = [&](int k1, int k2, const detail::Candidates& c, std::span<double> out) {
        const auto sigma = strategy.row(k1, k2);
        for (int i = 0; i < grid.size(); ++i) {
            const double p = sigma[i];
            // Skip the unused branch so an overflowed loss cannot turn into 0 * inf.
            if (p == 1.0) {
                out[i] = c.one[i];
            } else if (p == 0.0) {
                out[i] = c.two[i];
            } else {
                out[i] = p * c.one[i] + (1.0 - p) * c.two[i];
            }
        }
    };
    auto emit = [](int, int, std::span<const double>) {};
    const auto initial = detail::backward_sweep(lattice, grid, prior, cont, combine, emit);

    const double continuation = detail::gaussian_expectation(initial, grid, 0.5 * lattice.epsilon());
    return {initial_stage_cost(prior, lattice.epsilon()) + continuation, continuation};
}

std::vector<CurveRow> risk_curve(const std::optional<EvalStrategy>& strategy,
                                 std::span<const double> d_values, double eps, const UGrid& grid) {
    std::vector<CurveRow> rows(d_values.size());
    for (double d : d_values) {
        if (!(d > 0.0)) throw ConfigError("risk_curve: d values must be positive");
    }
    detail::parallel_for(d_values.size(), [&](std::size_t j) {
        const double d = d_values[j];
        const SymmetricPrior prior = SymmetricPrior::two_point(d);
        const SolveOutput dp = solve_invariant(DpConfig{eps, prior, grid}, {false});
        CurveRow row{d, dp.bayes_risk, dp.bayes_risk, dp.bayes_risk_no_initial,
                     dp.bayes_risk_no_initial};
        if (strategy) {
            const EvalResult loss = evaluate(*strategy, prior, eps, grid);
            row.expected_loss = loss.total_loss;
            row.expected_loss_no_init = loss.loss_no_initial;
        }
        rows[j] = row;
    });
    return rows;
}

}  // namespace gtab
