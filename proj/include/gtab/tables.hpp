#pragma once

/**
 * @file tables.hpp
 * @brief Packet lattice and the value / strategy tables defined over it.
 *
 * Lattice states are pairs (k1, k2) of packets already given to each arm,
 * t_l = k_l * eps. Only states reachable after the forced turn-by-turn stage
 * are stored: k1 >= 1, k2 >= 1, 2 <= k1 + k2 <= packets. States on the
 * diagonal k1 + k2 = packets are terminal.
 */

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gtab/core.hpp"

namespace gtab {

class Lattice {
public:
    explicit Lattice(int packets);

    /// Lattice for step eps; 1/eps must be an integer >= 2.
    static Lattice from_epsilon(double eps);

    int packets() const { return packets_; }
    double epsilon() const { return 1.0 / packets_; }
    double t(int k) const { return k * epsilon(); }

    bool contains(int k1, int k2) const {
        return k1 >= 1 && k2 >= 1 && k1 + k2 <= packets_;
    }
    bool terminal(int k1, int k2) const { return k1 + k2 == packets_; }

    /// Number of stored states, terminal diagonal included.
    std::size_t state_count() const { return offset(packets_ + 1); }
    /// Number of decision states (k1 + k2 < packets).
    std::size_t decision_state_count() const { return offset(packets_); }

    /// Dense index of (k1, k2); diagonals are laid out in increasing k1 + k2.
    std::size_t index(int k1, int k2) const;

    bool operator==(const Lattice& o) const { return packets_ == o.packets_; }

private:
    static std::size_t offset(int diagonal) {
        const auto d = static_cast<std::size_t>(diagonal);
        return (d - 2) * (d - 1) / 2;
    }

    int packets_;
};

/// How the continuation term of the recursion was discretized.
enum class Scheme { Convolution, Diffusion };

/**
 * Bayes-to-go values r(u, t1, t2) on the lattice and u-grid.
 * Slices may be partially retained; the initial slice (1, 1) always is.
 */
class ValueTable {
public:
    ValueTable(Lattice lattice, UGrid grid, SymmetricPrior prior, Scheme scheme);

    const Lattice& lattice() const { return lattice_; }
    const UGrid& grid() const { return grid_; }
    const SymmetricPrior& prior() const { return prior_; }
    Scheme scheme() const { return scheme_; }
    double epsilon() const { return lattice_.epsilon(); }

    bool has(int k1, int k2) const;
    bool complete() const;

    /// Grid values at (k1, k2); throws StructureError if not retained.
    std::span<const double> slice(int k1, int k2) const;
    /// Linear interpolation in u; zero beyond +-u_max.
    double value_at(int k1, int k2, double u) const;

    void store(int k1, int k2, std::vector<double> values);

private:
    Lattice lattice_;
    UGrid grid_;
    SymmetricPrior prior_;
    Scheme scheme_;
    std::vector<std::vector<double>> slices_;
};

/**
 * Deterministic action per decision state and grid node.
 * The two forced packets before the lattice (k1 + k2 < 2) are turn-by-turn:
 * arm 1 first, then arm 2.
 */
class StrategyTable {
public:
    StrategyTable(Lattice lattice, UGrid grid);

    const Lattice& lattice() const { return lattice_; }
    const UGrid& grid() const { return grid_; }

    static bool turn_by_turn(int k1, int k2) { return k1 + k2 < 2; }

    /// Action for the next packet at node i of decision state (k1, k2).
    Arm action(int k1, int k2, int i) const;
    /// Nearest-node lookup in u.
    Arm lookup(int k1, int k2, double u) const;

    void set(int k1, int k2, int i, Arm a);
    std::span<const std::uint8_t> row(int k1, int k2) const;

    bool operator==(const StrategyTable& o) const;

private:
    std::size_t offset(int k1, int k2) const;

    Lattice lattice_;
    UGrid grid_;
    std::vector<std::uint8_t> actions_;
};

}  // namespace gtab
