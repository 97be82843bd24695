#include "gtab/tables.hpp"

#include <cmath>
#include <sstream>

#include "gtab/errors.hpp"

namespace gtab {

Lattice::Lattice(int packets) : packets_(packets) {
    if (packets < 2) {
        throw ConfigError("Lattice: 1/eps must be at least 2 (two forced packets)");
    }
}

Lattice Lattice::from_epsilon(double eps) {
    if (!(eps > 0.0) || !(eps <= 0.5)) {
        throw ConfigError("epsilon must lie in (0, 0.5]");
    }
    const double inv = 1.0 / eps;
    const long packets = std::lround(inv);
    if (std::abs(inv - static_cast<double>(packets)) > 1e-9 * inv) {
        throw ConfigError("1/epsilon must be an integer");
    }
    return Lattice(static_cast<int>(packets));
}

std::size_t Lattice::index(int k1, int k2) const {
    if (!contains(k1, k2)) {
        std::ostringstream os;
        os << "lattice state (" << k1 << ", " << k2 << ") outside 1/eps = " << packets_;
        throw StructureError(os.str());
    }
    return offset(k1 + k2) + static_cast<std::size_t>(k1 - 1);
}

ValueTable::ValueTable(Lattice lattice, UGrid grid, SymmetricPrior prior, Scheme scheme)
    : lattice_(lattice),
      grid_(grid),
      prior_(std::move(prior)),
      scheme_(scheme),
      slices_(lattice.state_count()) {}

bool ValueTable::has(int k1, int k2) const {
    return lattice_.contains(k1, k2) && !slices_[lattice_.index(k1, k2)].empty();
}

bool ValueTable::complete() const {
    for (const auto& s : slices_) {
        if (s.empty()) return false;
    }
    return true;
}

std::span<const double> ValueTable::slice(int k1, int k2) const {
    if (!has(k1, k2)) {
        std::ostringstream os;
        os << "value table has no slice at (k1, k2) = (" << k1 << ", " << k2 << ")";
        throw StructureError(os.str());
    }
    return slices_[lattice_.index(k1, k2)];
}

double ValueTable::value_at(int k1, int k2, double u) const {
    return interpolate(slice(k1, k2), grid_, u);
}

void ValueTable::store(int k1, int k2, std::vector<double> values) {
    if (static_cast<int>(values.size()) != grid_.size()) {
        throw StructureError("value slice length does not match the u-grid");
    }
    slices_[lattice_.index(k1, k2)] = std::move(values);
}

StrategyTable::StrategyTable(Lattice lattice, UGrid grid)
    : lattice_(lattice),
      grid_(grid),
      actions_(lattice.decision_state_count() * static_cast<std::size_t>(grid.size()),
               static_cast<std::uint8_t>(Arm::One)) {}

std::size_t StrategyTable::offset(int k1, int k2) const {
    if (lattice_.terminal(k1, k2) || !lattice_.contains(k1, k2)) {
        std::ostringstream os;
        os << "strategy table has no decision state (" << k1 << ", " << k2 << ")";
        throw StructureError(os.str());
    }
    return lattice_.index(k1, k2) * static_cast<std::size_t>(grid_.size());
}

Arm StrategyTable::action(int k1, int k2, int i) const {
    if (turn_by_turn(k1, k2)) return k1 + k2 == 0 ? Arm::One : Arm::Two;
    if (i < 0 || i >= grid_.size()) throw StructureError("strategy lookup: u index out of range");
    return static_cast<Arm>(actions_[offset(k1, k2) + static_cast<std::size_t>(i)]);
}

Arm StrategyTable::lookup(int k1, int k2, double u) const {
    return action(k1, k2, grid_.nearest_index(u));
}

void StrategyTable::set(int k1, int k2, int i, Arm a) {
    if (i < 0 || i >= grid_.size()) throw StructureError("strategy set: u index out of range");
    actions_[offset(k1, k2) + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(a);
}

std::span<const std::uint8_t> StrategyTable::row(int k1, int k2) const {
    return std::span<const std::uint8_t>(actions_).subspan(offset(k1, k2),
                                                            static_cast<std::size_t>(grid_.size()));
}

bool StrategyTable::operator==(const StrategyTable& o) const {
    return lattice_ == o.lattice_ && grid_ == o.grid_ && actions_ == o.actions_;
}

}  // namespace gtab
