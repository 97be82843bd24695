#pragma once

// Backward sweep shared by the Bellman solver, the strategy evaluator and the
// finite-difference limit solver. Anti-diagonals k1 + k2 = K are processed
// from the terminal one downward; only two diagonals are live at a time.

#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "gtab/core.hpp"
#include "gtab/errors.hpp"
#include "gtab/tables.hpp"

namespace gtab::detail {

/// Continuation term of r^(l): maps the successor slice to its expectation.
class Continuation {
public:
    virtual ~Continuation() = default;
    virtual void apply(Arm arm, int k1, int k2, std::span<const double> next,
                       std::span<double> out) const = 0;
};

/// Exact Gaussian transition: convolution with the discrete kernel.
class ConvolutionContinuation final : public Continuation {
public:
    ConvolutionContinuation(const Lattice& lattice, const UGrid& grid)
        : lattice_(lattice), grid_(grid) {}

    void apply(Arm arm, int k1, int k2, std::span<const double> next,
               std::span<double> out) const override {
        const double v =
            transition_variance(lattice_.epsilon(), arm, lattice_.t(k1), lattice_.t(k2));
        gaussian_kernel(v, grid_).apply(next, out);
    }

private:
    Lattice lattice_;
    UGrid grid_;
};

/// Second-order Taylor replacement: next + eps * c_l * D2(next), Dirichlet zero outside.
class DiffusionContinuation final : public Continuation {
public:
    DiffusionContinuation(const Lattice& lattice, const UGrid& grid)
        : lattice_(lattice), grid_(grid) {}

    /// c_l = t_other^2 / (2 t (t + eps)).
    double coefficient(Arm arm, int k1, int k2) const {
        return 0.5 * transition_variance(lattice_.epsilon(), arm, lattice_.t(k1), lattice_.t(k2)) /
               lattice_.epsilon();
    }

    void apply(Arm arm, int k1, int k2, std::span<const double> next,
               std::span<double> out) const override {
        const double du = grid_.du();
        const double lambda = lattice_.epsilon() * coefficient(arm, k1, k2) / (du * du);
        const int n = static_cast<int>(next.size());
        for (int i = 0; i < n; ++i) {
            const double lo = i > 0 ? next[i - 1] : 0.0;
            const double hi = i + 1 < n ? next[i + 1] : 0.0;
            out[i] = next[i] + lambda * ((lo + hi) - 2.0 * next[i]);
        }
    }

private:
    Lattice lattice_;
    UGrid grid_;
};

inline std::unique_ptr<Continuation> make_continuation(Scheme scheme, const Lattice& lattice,
                                                       const UGrid& grid) {
    if (scheme == Scheme::Convolution) {
        return std::make_unique<ConvolutionContinuation>(lattice, grid);
    }
    return std::make_unique<DiffusionContinuation>(lattice, grid);
}

/// Scratch for r^(1), r^(2) at one state.
struct Candidates {
    explicit Candidates(int n) : one(n), two(n), g(n) {}
    std::vector<double> one;
    std::vector<double> two;
    std::vector<double> g;
};

/// r^(l) = eps * g^(l) + continuation of the successor slice, for both arms.
inline void compute_candidates(const SymmetricPrior& prior, const Continuation& cont,
                               const Lattice& lattice, const UGrid& grid, int k1, int k2,
                               std::span<const double> next_after_one,
                               std::span<const double> next_after_two, Candidates& c) {
    const double eps = lattice.epsilon();
    const double t1 = lattice.t(k1);
    const double t2 = lattice.t(k2);
    const int n = grid.size();

    cont.apply(Arm::One, k1, k2, next_after_one, c.one);
    one_step_loss_slice(prior, Arm::One, t1, t2, grid, c.g);
    for (int i = 0; i < n; ++i) c.one[i] += eps * c.g[i];

    cont.apply(Arm::Two, k1, k2, next_after_two, c.two);
    one_step_loss_slice(prior, Arm::Two, t1, t2, grid, c.g);
    for (int i = 0; i < n; ++i) c.two[i] += eps * c.g[i];
}

/**
 * Runs the sweep. `combine(k1, k2, candidates, out)` writes the state's value
 * slice; `emit(k1, k2, slice)` sees every finished slice, terminal ones
 * included. Returns the slice at (1, 1).
 */
template <class Combine, class Emit>
std::vector<double> backward_sweep(const Lattice& lattice, const UGrid& grid,
                                   const SymmetricPrior& prior, const Continuation& cont,
                                   Combine&& combine, Emit&& emit) {
    const int P = lattice.packets();
    const int n = grid.size();

    // next[k1] holds the slice at (k1, K + 1 - k1).
    std::vector<std::vector<double>> next(P + 1);
    for (int k1 = 1; k1 <= P - 1; ++k1) {
        next[k1].assign(n, 0.0);
        emit(k1, P - k1, std::span<const double>(next[k1]));
    }

    Candidates cand(n);
    std::vector<std::vector<double>> cur(P + 1);
    for (int K = P - 1; K >= 2; --K) {
        for (int k1 = 1; k1 <= K - 1; ++k1) {
            const int k2 = K - k1;
            compute_candidates(prior, cont, lattice, grid, k1, k2, next[k1 + 1], next[k1], cand);
            cur[k1].resize(n);
            combine(k1, k2, cand, std::span<double>(cur[k1]));
            for (double v : cur[k1]) {
                if (std::isnan(v)) throw InternalError("backward sweep produced NaN");
            }
            emit(k1, k2, std::span<const double>(cur[k1]));
        }
        std::swap(next, cur);
        for (int k1 = K; k1 <= P; ++k1) next[k1].clear();
    }
    return next[1];
}

/// integral r(u) f_{variance}(u) du, r read by linear interpolation on the grid.
inline double gaussian_expectation(std::span<const double> values, const UGrid& grid,
                                   double variance) {
    const double sigma = std::sqrt(variance);
    constexpr int kIntervals = 4096;
    const double a = -8.0 * sigma;
    const double h = 16.0 * sigma / kIntervals;
    const double norm = 1.0 / std::sqrt(2.0 * M_PI * variance);
    double acc = 0.0;
    for (int j = 0; j <= kIntervals; ++j) {
        const double u = a + j * h;
        const double f = norm * std::exp(-0.5 * u * u / variance) * interpolate(values, grid, u);
        const double coef = (j == 0 || j == kIntervals) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
        acc += coef * f;
    }
    return acc * h / 3.0;
}

}  // namespace gtab::detail
