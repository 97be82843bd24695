#include "gtab/prior_search.hpp"

#include <algorithm>
#include <cmath>

#include "gtab/dp_solver.hpp"
#include "gtab/errors.hpp"
#include "gtab/pde_limit.hpp"
#include "gtab/strategy_eval.hpp"
#include "parallel.hpp"

namespace gtab {

Backend parse_backend(const std::string& name) {
    if (name == "dp") return Backend::Dp;
    if (name == "pde") return Backend::Pde;
    throw ConfigError("unknown backend '" + name + "' (expected dp or pde)");
}

std::string to_string(Backend b) { return b == Backend::Dp ? "dp" : "pde"; }

PriorRisk make_backend(const BackendConfig& cfg) {
    if (cfg.kind == Backend::Dp) {
        DpConfig base{cfg.epsilon, SymmetricPrior::two_point(1.0), cfg.grid};
        base.validate();
        return [base](const SymmetricPrior& prior) {
            DpConfig c = base;
            c.prior = prior;
            return solve_invariant(c, {false}).bayes_risk;
        };
    }
    PdeConfig base{cfg.epsilon, cfg.pde_du, cfg.pde_u_max, SymmetricPrior::two_point(1.0)};
    base.validate();
    return [base](const SymmetricPrior& prior) {
        PdeConfig c = base;
        c.prior = prior;
        return pde_solve(c).limit_risk;
    };
}

double CachedRisk::operator()(double d) const {
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(d); it != cache_.end()) return it->second;
    }
    const double r = risk_(SymmetricPrior::two_point(d));
    std::lock_guard lock(mutex_);
    cache_.emplace(d, r);
    return r;
}

std::size_t CachedRisk::evaluations() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
}

std::vector<CurvePoint> scan(double d_min, double d_max, double step, const CachedRisk& risk) {
    if (!(d_min > 0.0) || !(d_max >= d_min)) {
        throw ConfigError("scan: need 0 < d_min <= d_max");
    }
    std::size_t count = 1;
    if (d_max > d_min) {
        if (!(step > 0.0)) throw ConfigError("scan: step must be positive");
        count = static_cast<std::size_t>(std::floor((d_max - d_min) / step + 1e-3)) + 1;
    }
    std::vector<CurvePoint> curve(count);
    for (std::size_t i = 0; i < count; ++i) curve[i].d = d_min + static_cast<double>(i) * step;
    detail::parallel_for(count, [&](std::size_t i) { curve[i].risk = risk(curve[i].d); });
    return curve;
}

Refined refine(const std::vector<CurvePoint>& curve, const std::function<double(double)>& risk,
               double tolerance) {
    if (curve.empty()) throw ConfigError("refine: empty curve");
    if (!(tolerance > 0.0)) throw ConfigError("refine: tolerance must be positive");
    const auto best = std::max_element(curve.begin(), curve.end(),
                                       [](const auto& a, const auto& b) { return a.risk < b.risk; });
    const auto j = static_cast<std::size_t>(best - curve.begin());
    if (j == 0 || j + 1 == curve.size()) {
        return {best->d, best->risk, true};
    }

    constexpr double kInvPhi = 0.6180339887498949;
    double a = curve[j - 1].d;
    double b = curve[j + 1].d;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = risk(x1);
    double f2 = risk(x2);
    Refined out{best->d, best->risk, false};
    auto keep = [&out](double x, double f) {
        if (f > out.risk_star) out = {x, f, false};
    };
    keep(x1, f1);
    keep(x2, f2);
    while (0.5 * (b - a) > tolerance) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = risk(x1);
            keep(x1, f1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = risk(x2);
            keep(x2, f2);
        }
    }
    return out;
}

SaddleReport saddle_check(double d_star, double eps, const UGrid& grid,
                          const std::vector<double>& d_values, double cutoff, double tolerance) {
    const SymmetricPrior worst = SymmetricPrior::two_point(d_star);
    const SolveOutput dp = solve_invariant(DpConfig{eps, worst, grid});
    const EvalStrategy frozen = EvalStrategy::from_table(dp.strategy);

    SaddleReport report;
    report.d_star = d_star;
    report.risk_star = dp.bayes_risk;
    report.cutoff = cutoff;
    report.tolerance = tolerance;
    report.loss_at_d_star = evaluate(frozen, worst, eps, grid).total_loss;
    report.equality_holds = std::abs(report.loss_at_d_star - report.risk_star) <= tolerance;

    report.entries.resize(d_values.size());
    detail::parallel_for(d_values.size(), [&](std::size_t i) {
        const double d = d_values[i];
        const EvalResult r = evaluate(frozen, SymmetricPrior::two_point(d), eps, grid);
        SaddleEntry e{d, r.total_loss, r.loss_no_initial, false, false};
        e.exceeds = r.total_loss > report.risk_star + tolerance;
        e.initial_stage_attributed = e.exceeds && r.loss_no_initial <= report.risk_star + tolerance;
        report.entries[i] = e;
    });

    report.inequality_holds = true;
    report.max_loss_within_cutoff = report.loss_at_d_star;
    for (const auto& e : report.entries) {
        if (e.d > cutoff) continue;
        report.max_loss_within_cutoff = std::max(report.max_loss_within_cutoff, e.expected_loss);
        if (e.exceeds) report.inequality_holds = false;
    }
    return report;
}

MultiAtomResult search_multi_atom(const SymmetricPrior& start, const PriorRisk& risk, double step,
                                  double min_step, int max_sweeps) {
    if (!(step > 0.0) || !(min_step > 0.0)) {
        throw ConfigError("search_multi_atom: step sizes must be positive");
    }
    const double c = start.support_bound();
    std::vector<PriorAtom> atoms(start.atoms().begin(), start.atoms().end());

    auto try_risk = [&](const std::vector<PriorAtom>& cand) -> double {
        try {
            return risk(SymmetricPrior(cand, c));
        } catch (const ConfigError&) {
            return -1.0;
        }
    };

    MultiAtomResult out{atoms, try_risk(atoms), 0};
    while (out.sweeps < max_sweeps && step >= min_step) {
        ++out.sweeps;
        bool improved = false;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            for (double dir : {1.0, -1.0}) {
                auto cand = out.atoms;
                cand[i].w += dir * step;
                const double r = try_risk(cand);
                if (r > out.risk) {
                    out.atoms = cand;
                    out.risk = r;
                    improved = true;
                }
            }
        }
        const double shift = std::min(0.25, step);
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            for (std::size_t j = 0; j < atoms.size(); ++j) {
                if (i == j || out.atoms[i].weight <= shift) continue;
                auto cand = out.atoms;
                cand[i].weight -= shift;
                cand[j].weight += shift;
                const double r = try_risk(cand);
                if (r > out.risk) {
                    out.atoms = cand;
                    out.risk = r;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return out;
}

}  // namespace gtab
