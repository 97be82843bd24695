#pragma once

/**
 * @file prior_search.hpp
 * @brief Worst-case prior search over two-point priors {+-d}, golden-section
 *        refinement of the maximizer, and a saddle-point check of the
 *        resulting minimax strategy.
 */

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "gtab/core.hpp"

namespace gtab {

enum class Backend { Dp, Pde };

Backend parse_backend(const std::string& name);
std::string to_string(Backend b);

struct BackendConfig {
    Backend kind = Backend::Dp;
    double epsilon = 0.02;
    /// Used by the dp backend; the pde backend builds its own grid.
    UGrid grid = UGrid(4.0, 0.01);
    /// pde backend spacing and domain.
    double pde_du = 0.032;
    double pde_u_max = 2.3;
};

/// Bayes risk of a prior (dp) or its small-eps limit (pde).
using PriorRisk = std::function<double(const SymmetricPrior&)>;

PriorRisk make_backend(const BackendConfig& cfg);

/// Memoizes risk(d) for two-point priors; safe to share across threads.
class CachedRisk {
public:
    explicit CachedRisk(PriorRisk risk) : risk_(std::move(risk)) {}

    double operator()(double d) const;
    std::size_t evaluations() const;

private:
    PriorRisk risk_;
    mutable std::mutex mutex_;
    mutable std::map<double, double> cache_;
};

struct CurvePoint {
    double d = 0.0;
    double risk = 0.0;
};

/// Risk at d_min, d_min + step, ..., up to d_max (inclusive within step / 1000).
std::vector<CurvePoint> scan(double d_min, double d_max, double step, const CachedRisk& risk);

struct Refined {
    double d_star = 0.0;
    double risk_star = 0.0;
    /// Scan maximum sits at an end of the range; not refined.
    bool on_boundary = false;
};

/// Golden-section maximization on the bracket around the scan maximum.
Refined refine(const std::vector<CurvePoint>& curve, const std::function<double(double)>& risk,
               double tolerance);

struct SaddleEntry {
    double d = 0.0;
    double expected_loss = 0.0;
    double expected_loss_no_init = 0.0;
    /// Loss above risk_star + tolerance.
    bool exceeds = false;
    /// Exceedance disappears once the forced initial packets are removed.
    bool initial_stage_attributed = false;
};

struct SaddleReport {
    double d_star = 0.0;
    double risk_star = 0.0;
    double loss_at_d_star = 0.0;
    double max_loss_within_cutoff = 0.0;
    double cutoff = 0.0;
    double tolerance = 0.0;
    bool equality_holds = false;
    bool inequality_holds = false;
    std::vector<SaddleEntry> entries;
};

/**
 * Freezes the Bayes strategy at d_star and evaluates it on every d in
 * `d_values`. Violations are reported, never thrown.
 */
SaddleReport saddle_check(double d_star, double eps, const UGrid& grid,
                          const std::vector<double>& d_values, double cutoff, double tolerance);

struct MultiAtomResult {
    std::vector<PriorAtom> atoms;
    double risk = 0.0;
    int sweeps = 0;
};

/**
 * Experimental: coordinate ascent over atom locations and weights, starting
 * from `start`. Locations move by +-step (halved when a sweep stalls); weights
 * shift mass between pairs of atoms.
 */
MultiAtomResult search_multi_atom(const SymmetricPrior& start, const PriorRisk& risk, double step,
                                  double min_step, int max_sweeps);

}  // namespace gtab
