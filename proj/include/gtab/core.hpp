#pragma once

/**
 * @file core.hpp
 * @brief Domain types shared by every solver: priors, normalized states,
 *        the u-grid, one-step losses and Gaussian transition kernels.
 *
 * All quantities live in the normalized ("invariant") scale: time is the
 * fraction of the horizon already processed, the history statistic u and the
 * half mean-difference w are scaled by the square root of the horizon.
 */

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace gtab {

enum class Arm : std::uint8_t { One = 1, Two = 2 };

constexpr Arm other(Arm a) { return a == Arm::One ? Arm::Two : Arm::One; }
constexpr int arm_index(Arm a) { return static_cast<int>(a); }

/// Dimensional Gaussian bandit parameter theta = (m1, m2) restricted to |m1 - m2| <= 2C.
struct DimensionalParams {
    double m1 = 0.0;
    double m2 = 0.0;
    double C = 1.0;

    static DimensionalParams make(double m1, double m2, double C);

    double mean() const { return 0.5 * (m1 + m2); }
    double half_gap() const { return 0.5 * (m1 - m2); }
};

struct PriorAtom {
    double w = 0.0;       ///< normalized half-difference of means, > 0
    double weight = 0.0;  ///< probability of the pair {-w, +w}
};

/**
 * Finite symmetric prior on the normalized half-difference w.
 *
 * Each atom (w, pi) places mass pi/2 at +w and pi/2 at -w. Weights sum to one
 * and every atom lies in (0, c]; c may be infinite.
 */
class SymmetricPrior {
public:
    SymmetricPrior(std::vector<PriorAtom> atoms,
                   double support_bound = std::numeric_limits<double>::infinity());

    /// Two-point prior: mass 1/2 at each of +d and -d.
    static SymmetricPrior two_point(double d);

    /// Prior on the dimensional half-gap v, rescaled to w = v * sqrt(N).
    static SymmetricPrior from_dimensional(std::span<const PriorAtom> v_atoms, double C,
                                           long horizon);

    std::span<const PriorAtom> atoms() const { return atoms_; }
    double support_bound() const { return c_; }

    /// Sum of pi_i * w_i, i.e. 2 * integral_0^c w rho(w) dw.
    double mean_abs() const;

private:
    std::vector<PriorAtom> atoms_;
    double c_;
};

/// Normalized control history (u, t1, t2).
struct InvariantState {
    double u = 0.0;
    double t1 = 0.0;
    double t2 = 0.0;

    double t() const { return t1 + t2; }
};

/// Raw control history in packets of M items over a horizon of N.
struct DimensionalState {
    double X1 = 0.0;
    double X2 = 0.0;
    long n1 = 0;
    long n2 = 0;
    long N = 0;
    long M = 1;

    void validate() const;
    /// U = (X1 n2 - X2 n1) / n, zero before any observation.
    double U() const;
};

InvariantState to_invariant(const DimensionalState& s);

/// Canonical dimensional representative of an invariant state: X1 = U, X2 = -U
/// (zero pooled income). U, n1 and n2 are recovered exactly.
DimensionalState from_invariant(const InvariantState& s, long N, long M);

/**
 * Uniform symmetric grid {-u_max, ..., 0, ..., +u_max} with spacing du.
 * Holds 2 * half_points() + 1 nodes; node half_points() is u = 0.
 */
class UGrid {
public:
    UGrid(double u_max, double du);

    /// Smallest symmetric grid of spacing du that reaches at least u_max.
    static UGrid covering(double u_max, double du);
    /// Grid with 2 * half + 1 nodes.
    static UGrid from_half_points(int half, double du);

    double u_max() const { return static_cast<double>(half_) * du_; }
    double du() const { return du_; }
    int half_points() const { return half_; }
    int center() const { return half_; }
    int size() const { return 2 * half_ + 1; }
    double point(int i) const { return static_cast<double>(i - half_) * du_; }

    /// Nearest node, clamped to the grid; exact midpoints round toward u = 0.
    int nearest_index(double u) const;

    bool operator==(const UGrid& o) const { return half_ == o.half_ && du_ == o.du_; }

private:
    UGrid(int half, double du, bool);

    int half_;
    double du_;
};

/// One-step loss g^(l)(u, t1, t2) = sum_i pi_i w_i exp((-1)^l 2 u w_i - 2 w_i^2 t1 t2 / t).
double one_step_loss(const SymmetricPrior& prior, Arm arm, const InvariantState& s);

/// g^(l) at every grid node for fixed (t1, t2).
void one_step_loss_slice(const SymmetricPrior& prior, Arm arm, double t1, double t2,
                         const UGrid& grid, std::span<double> out);

/// Variance of the u-increment when `arm` is applied at (t1, t2) for one packet:
/// eps * t_other^2 / (t (t + eps)), t_other being the pulls of the other arm.
double transition_variance(double eps, Arm arm, double t1, double t2);

/**
 * Discrete centered Gaussian on grid offsets, truncated at six standard
 * deviations and renormalized. Stored as the half {w_0, w_1, ..., w_J};
 * the full kernel is symmetric.
 */
class GaussianKernel {
public:
    GaussianKernel() = default;

    double variance() const { return variance_; }
    bool is_delta() const { return half_.size() == 1; }
    int reach() const { return static_cast<int>(half_.size()) - 1; }
    std::span<const double> half_weights() const { return half_; }

    /// Weight at signed grid offset j; zero beyond the reach.
    double weight(int offset) const;

    /// out[i] = sum_j weight(j) * in[i - j], zero outside [0, in.size()).
    void apply(std::span<const double> in, std::span<double> out) const;

private:
    friend GaussianKernel gaussian_kernel(double variance, const UGrid& grid);

    double variance_ = 0.0;
    std::vector<double> half_{1.0};
};

GaussianKernel gaussian_kernel(double variance, const UGrid& grid);

/// Linear interpolation of a grid function; zero beyond +-u_max.
double interpolate(std::span<const double> values, const UGrid& grid, double u);

}  // namespace gtab
