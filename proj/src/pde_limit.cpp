#include "gtab/pde_limit.hpp"

#include <sstream>

#include "gtab/dp_solver.hpp"
#include "gtab/errors.hpp"
#include "sweep.hpp"

namespace gtab {

namespace {
constexpr double kMaxDiffusionCoefficient = 0.5;
}

Lattice PdeConfig::validate() const {
    Lattice lattice = Lattice::from_epsilon(epsilon);
    if (!(du > 0.0) || !(u_max > 0.0)) {
        throw ConfigError("pde: du and u_max must be positive");
    }
    const double courant = lattice.epsilon() * kMaxDiffusionCoefficient / (du * du);
    if (courant > 0.5 * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "pde: explicit scheme unstable, eps * c_max / du^2 = " << courant
           << " > 1/2 (need du >= sqrt(eps))";
        throw ConfigError(os.str());
    }
    return lattice;
}

PdeOutput pde_solve(const PdeConfig& cfg, const PdeOptions& options) {
    const Lattice lattice = cfg.validate();
    const UGrid grid = cfg.grid();
    ValueTable table(lattice, grid, cfg.prior, Scheme::Diffusion);
    std::optional<StrategyTable> strategy;
    if (options.build_strategy) strategy.emplace(lattice, grid);
    const detail::DiffusionContinuation cont(lattice, grid);

    auto combine = [&](int k1, int k2, const detail::Candidates& c, std::span<double> out) {
        for (int i = 0; i < grid.size(); ++i) {
            const bool first = c.one[i] <= c.two[i];
            out[i] = first ? c.one[i] : c.two[i];
            if (strategy) strategy->set(k1, k2, i, first ? Arm::One : Arm::Two);
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

}  // namespace gtab
