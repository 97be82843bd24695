#pragma once

// Test-only reference implementations. Nothing here calls into the library's
// recursion, kernels or loss functions.

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace oracle {

/// Composite Simpson rule on [a, b] with an even number of intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
    if (intervals % 2 == 1) ++intervals;
    const double h = (b - a) / intervals;
    double acc = f(a) + f(b);
    for (int j = 1; j < intervals; ++j) acc += (j % 2 == 1 ? 4.0 : 2.0) * f(a + j * h);
    return acc * h / 3.0;
}

inline double normal_pdf(double x, double var) {
    return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * M_PI * var);
}

/// Symmetric discrete prior as plain (w, weight) pairs.
using Atoms = std::vector<std::pair<double, double>>;

/**
 * Continuous-u backward recursion over packets (k1, k2) with P = 1/eps:
 * value = min over arms of eps * expected regret weight + Gaussian
 * expectation of the successor, evaluated by recursive dense quadrature.
 * Exponential cost in depth; meant for P <= 4.
 */
class BruteForceBellman {
public:
    BruteForceBellman(int packets, Atoms atoms, int intervals = 1200)
        : P_(packets), eps_(1.0 / packets), atoms_(std::move(atoms)), intervals_(intervals) {}

    double value(double u, int k1, int k2) const {
        if (k1 + k2 == P_) return 0.0;
        return std::min(arm_value(u, k1, k2, 1), arm_value(u, k1, k2, 2));
    }

    double arm_value(double u, int k1, int k2, int arm) const {
        const double t1 = k1 * eps_;
        const double t2 = k2 * eps_;
        const double t = t1 + t2;
        double g = 0.0;
        for (const auto& [w, pi] : atoms_) {
            const double sign = arm == 1 ? -1.0 : 1.0;
            // mass pi/2 at +w: integral over w > 0 of 2 w exp(...) rho(w)
            g += 2.0 * w * (0.5 * pi) * std::exp(sign * 2.0 * u * w - 2.0 * w * w * t1 * t2 / t);
        }
        const int n1 = arm == 1 ? k1 + 1 : k1;
        const int n2 = arm == 1 ? k2 : k2 + 1;
        double cont = 0.0;
        if (n1 + n2 < P_) {
            const double other = arm == 1 ? t2 : t1;
            const double var = eps_ * other * other / (t * (t + eps_));
            const double s = std::sqrt(var);
            cont = simpson([&](double x) { return value(u - x, n1, n2) * normal_pdf(x, var); },
                           -10.0 * s, 10.0 * s, intervals_);
        }
        return eps_ * g + cont;
    }

    /// 4 eps int_0^c w rho + E r(u, eps, eps) under N(0, eps / 2).
    double risk() const {
        double first = 0.0;
        for (const auto& [w, pi] : atoms_) first += 4.0 * eps_ * w * 0.5 * pi;
        const double var = 0.5 * eps_;
        const double s = std::sqrt(var);
        const double cont = simpson([&](double u) { return value(u, 1, 1) * normal_pdf(u, var); },
                                    -10.0 * s, 10.0 * s, intervals_);
        return first + cont;
    }

private:
    int P_;
    double eps_;
    Atoms atoms_;
    int intervals_;
};

}  // namespace oracle
