#include "gtab/dp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gtab/errors.hpp"
#include "sweep.hpp"

namespace gtab {

namespace {

double max_transition_sigma(const Lattice& lattice) {
    double vmax = 0.0;
    const int P = lattice.packets();
    for (int K = 2; K <= P - 1; ++K) {
        for (int k1 = 1; k1 <= K - 1; ++k1) {
            const double t1 = lattice.t(k1);
            const double t2 = lattice.t(K - k1);
            vmax = std::max({vmax, transition_variance(lattice.epsilon(), Arm::One, t1, t2),
                             transition_variance(lattice.epsilon(), Arm::Two, t1, t2)});
        }
    }
    return std::sqrt(vmax);
}

}  // namespace

Lattice DpConfig::validate() const {
    Lattice lattice = Lattice::from_epsilon(epsilon);
    if (lattice.packets() > 2) {
        const double sigma = max_transition_sigma(lattice);
        if (grid.du() > 3.0 * sigma) {
            std::ostringstream os;
            os << "u-grid too coarse: du = " << grid.du() << " exceeds 3 x largest kernel sigma "
               << sigma;
            throw ConfigError(os.str());
        }
    }
    return lattice;
}

double initial_stage_cost(const SymmetricPrior& prior, double eps) {
    return 2.0 * eps * prior.mean_abs();
}

RiskParts assemble_bayes_risk(const ValueTable& value, const SymmetricPrior& prior) {
    const double eps = value.epsilon();
    const double cont = detail::gaussian_expectation(value.slice(1, 1), value.grid(), 0.5 * eps);
    return {initial_stage_cost(prior, eps) + cont, cont};
}

SolveOutput solve_invariant(const DpConfig& cfg, const SolveOptions& options) {
    const Lattice lattice = cfg.validate();
    const UGrid& grid = cfg.grid;
    ValueTable table(lattice, grid, cfg.prior, Scheme::Convolution);
    StrategyTable strategy(lattice, grid);
    const detail::ConvolutionContinuation cont(lattice, grid);

    auto combine = [&](int k1, int k2, const detail::Candidates& c, std::span<double> out) {
        const int n = grid.size();
        for (int i = 0; i < n; ++i) {
            const bool first = c.one[i] <= c.two[i];
            out[i] = first ? c.one[i] : c.two[i];
            strategy.set(k1, k2, i, first ? Arm::One : Arm::Two);
        }
    };
    auto emit = [&](int k1, int k2, std::span<const double> slice) {
        if (options.retain_values || (k1 == 1 && k2 == 1)) {
            table.store(k1, k2, std::vector<double>(slice.begin(), slice.end()));
        }
    };
    detail::backward_sweep(lattice, grid, cfg.prior, cont, combine, emit);

    const RiskParts risk = assemble_bayes_risk(table, cfg.prior);
    return {std::move(table), std::move(strategy), risk.total, risk.no_initial};
}

StrategyTable extract_strategy(const ValueTable& value) {
    if (!value.complete()) {
        throw StructureError("extract_strategy: value table must retain every slice");
    }
    const Lattice& lattice = value.lattice();
    const UGrid& grid = value.grid();
    const auto cont = detail::make_continuation(value.scheme(), lattice, grid);
    StrategyTable strategy(lattice, grid);
    detail::Candidates c(grid.size());
    const int P = lattice.packets();
    for (int K = 2; K <= P - 1; ++K) {
        for (int k1 = 1; k1 <= K - 1; ++k1) {
            const int k2 = K - k1;
            detail::compute_candidates(value.prior(), *cont, lattice, grid, k1, k2,
                                       value.slice(k1 + 1, k2), value.slice(k1, k2 + 1), c);
            for (int i = 0; i < grid.size(); ++i) {
                strategy.set(k1, k2, i, c.one[i] <= c.two[i] ? Arm::One : Arm::Two);
            }
        }
    }
    return strategy;
}

DimensionalSolution::DimensionalSolution(long horizon, long batch, SolveOutput invariant)
    : N_(horizon), M_(batch), inv_(std::move(invariant)) {}

double DimensionalSolution::bayes_risk() const {
    return std::sqrt(static_cast<double>(N_)) * inv_.bayes_risk;
}

double DimensionalSolution::bayes_risk_no_initial() const {
    return std::sqrt(static_cast<double>(N_)) * inv_.bayes_risk_no_initial;
}

std::pair<int, int> DimensionalSolution::packets(long n1, long n2) const {
    if (n1 % M_ != 0 || n2 % M_ != 0) {
        throw ConfigError("dimensional state: n1 and n2 must be multiples of M");
    }
    return {static_cast<int>(n1 / M_), static_cast<int>(n2 / M_)};
}

double DimensionalSolution::value(double U, long n1, long n2) const {
    const auto [k1, k2] = packets(n1, n2);
    const double root = std::sqrt(static_cast<double>(N_));
    return root * inv_.value.value_at(k1, k2, U / root);
}

Arm DimensionalSolution::action(double U, long n1, long n2) const {
    const auto [k1, k2] = packets(n1, n2);
    return inv_.strategy.lookup(k1, k2, U / std::sqrt(static_cast<double>(N_)));
}

DimensionalSolution solve_dimensional(long horizon, long batch, std::span<const PriorAtom> v_atoms,
                                      double C, const UGrid& grid) {
    if (batch <= 0 || horizon <= 0 || horizon % batch != 0) {
        throw ConfigError("solve_dimensional: N must be a positive multiple of M");
    }
    DpConfig cfg{static_cast<double>(batch) / static_cast<double>(horizon),
                 SymmetricPrior::from_dimensional(v_atoms, C, horizon), grid};
    return DimensionalSolution(horizon, batch, solve_invariant(cfg));
}

}  // namespace gtab
