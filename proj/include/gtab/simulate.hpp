#pragma once

/**
 * @file simulate.hpp
 * @brief Monte-Carlo runs of batched data processing controlled by a
 *        strategy table: Bernoulli items grouped into packets, and the
 *        unit-variance Gaussian packet model it approximates.
 *
 * Seeding: replication r draws from std::mt19937_64 seeded by
 * std::seed_seq{seed_lo, seed_hi, r_lo, r_hi}, so each replication owns an
 * independent stream and results do not depend on the thread count.
 */

#include <cstdint>
#include <functional>
#include <vector>

#include "gtab/core.hpp"
#include "gtab/tables.hpp"

namespace gtab {

enum class Orientation {
    Random,        ///< better arm drawn per replication with probability 1/2
    ArmOneBetter,  ///< fixed theta with m1 > m2 (frequentist loss)
};

struct BatchTrialConfig {
    long T = 5000;  ///< total items
    long M = 100;   ///< items per packet
    double p = 0.5;
    double d = 1.6;
    long replications = 100000;
    std::uint64_t seed = 7;
    Orientation orientation = Orientation::Random;
    bool per_item = false;  ///< draw every item instead of a binomial count per packet
    bool keep_raw = false;

    long packets() const { return T / M; }
    double D() const { return p * (1.0 - p); }
    /// Success probability offset d * sqrt(D / T).
    double delta() const;
    void validate() const;
};

/// Packet-level Gaussian model implied by a Bernoulli configuration.
struct PacketModel {
    long packets = 0;
    double mean_one = 0.0;  ///< E[xi | arm 1] = sqrt(M / D) p1 (arm 1 better)
    double mean_two = 0.0;
    double mean_gap = 0.0;  ///< m1 - m2 = 2 d / sqrt(N)
};

PacketModel packet_model(const BatchTrialConfig& cfg);

struct GaussianTrialConfig {
    long packets = 50;
    double d = 1.6;
    long replications = 100000;
    std::uint64_t seed = 7;
    Orientation orientation = Orientation::Random;
    bool keep_raw = false;

    void validate() const;
};

struct TrialResult {
    double normalized_loss_mean = 0.0;
    double standard_error = 0.0;
    long replications = 0;
    std::vector<double> raw_losses;
};

/// What a packet policy may look at. `better` exposes the truth for oracle tests.
struct PolicyView {
    int k1 = 0;
    int k2 = 0;
    double u = 0.0;
    Arm better = Arm::One;
};

using PacketPolicy = std::function<Arm(const PolicyView&)>;

/// Nearest-node lookup into a strategy table.
PacketPolicy table_policy(const StrategyTable& table);

/// Policy is consulted only after the two forced packets (arm 1, then arm 2).
TrialResult simulate_bernoulli(const BatchTrialConfig& cfg, const PacketPolicy& policy);
TrialResult simulate_bernoulli(const BatchTrialConfig& cfg, const StrategyTable& strategy);

TrialResult simulate_gaussian(const GaussianTrialConfig& cfg, const PacketPolicy& policy);
TrialResult simulate_gaussian(const GaussianTrialConfig& cfg, const StrategyTable& strategy);

}  // namespace gtab
