#include "gtab/simulate.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "gtab/errors.hpp"
#include "parallel.hpp"

namespace gtab {

namespace {

std::mt19937_64 replication_engine(std::uint64_t seed, std::uint64_t rep) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(rep >> 32)};
    return std::mt19937_64(seq);
}

/// Running statistic of one replication: pulls and summed packet incomes per arm.
struct History {
    int k1 = 0;
    int k2 = 0;
    double X1 = 0.0;
    double X2 = 0.0;

    double u(double sqrt_packets) const {
        const int n = k1 + k2;
        return (X1 * k2 - X2 * k1) / n / sqrt_packets;
    }

    void record(Arm a, double xi) {
        if (a == Arm::One) {
            ++k1;
            X1 += xi;
        } else {
            ++k2;
            X2 += xi;
        }
    }
};

Arm choose(const History& h, const PacketPolicy& policy, double sqrt_packets, Arm better) {
    const int n = h.k1 + h.k2;
    if (n == 0) return Arm::One;
    if (n == 1) return Arm::Two;
    return policy({h.k1, h.k2, h.u(sqrt_packets), better});
}

/// Mean and standard error, summed in replication order.
TrialResult summarize(std::vector<double> losses, bool keep_raw) {
    const auto n = static_cast<long>(losses.size());
    double sum = 0.0;
    double comp = 0.0;
    for (double x : losses) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double x : losses) ss += (x - mean) * (x - mean);
    const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    TrialResult r{mean, sd / std::sqrt(static_cast<double>(n)), n, {}};
    if (keep_raw) r.raw_losses = std::move(losses);
    return r;
}

template <class Replicate>
std::vector<double> run_replications(long replications, Replicate&& replicate) {
    std::vector<double> losses(static_cast<std::size_t>(replications));
    constexpr long kBlock = 1024;
    const long blocks = (replications + kBlock - 1) / kBlock;
    detail::parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t b) {
        const long lo = static_cast<long>(b) * kBlock;
        const long hi = std::min(replications, lo + kBlock);
        for (long r = lo; r < hi; ++r) losses[static_cast<std::size_t>(r)] = replicate(r);
    });
    return losses;
}

void check_lattice(const StrategyTable& strategy, long packets) {
    if (strategy.lattice().packets() != packets) {
        std::ostringstream os;
        os << "strategy lattice has " << strategy.lattice().packets()
           << " packets but the experiment has " << packets;
        throw ConfigError(os.str());
    }
}

}  // namespace

double BatchTrialConfig::delta() const { return d * std::sqrt(D() / static_cast<double>(T)); }

void BatchTrialConfig::validate() const {
    if (M <= 0 || T <= 0 || T % M != 0) throw ConfigError("T must be a positive multiple of M");
    if (T / M < 2) throw ConfigError("T / M must be at least 2 packets");
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("p must lie in (0, 1)");
    if (!(d >= 0.0) || !std::isfinite(d)) throw ConfigError("d must be nonnegative");
    if (replications <= 0) throw ConfigError("replications must be positive");
    const double hi = p + delta();
    const double lo = p - delta();
    if (!(hi < 1.0 && lo > 0.0)) {
        throw ConfigError("p +- d sqrt(D / T) must lie in (0, 1)");
    }
}

PacketModel packet_model(const BatchTrialConfig& cfg) {
    cfg.validate();
    const double scale = std::sqrt(static_cast<double>(cfg.M) / cfg.D());
    const double m1 = scale * (cfg.p + cfg.delta());
    const double m2 = scale * (cfg.p - cfg.delta());
    return {cfg.packets(), m1, m2, m1 - m2};
}

void GaussianTrialConfig::validate() const {
    if (packets < 2) throw ConfigError("packets must be at least 2");
    if (!(d >= 0.0) || !std::isfinite(d)) throw ConfigError("d must be nonnegative");
    if (replications <= 0) throw ConfigError("replications must be positive");
}

PacketPolicy table_policy(const StrategyTable& table) {
    return [&table](const PolicyView& v) { return table.lookup(v.k1, v.k2, v.u); };
}

TrialResult simulate_bernoulli(const BatchTrialConfig& cfg, const PacketPolicy& policy) {
    cfg.validate();
    const long N = cfg.packets();
    const double sqrt_packets = std::sqrt(static_cast<double>(N));
    const double xi_scale = 1.0 / std::sqrt(cfg.D() * static_cast<double>(cfg.M));
    const double loss_scale = 1.0 / std::sqrt(cfg.D() * static_cast<double>(cfg.T));
    const double p_hi = cfg.p + cfg.delta();
    const double p_lo = cfg.p - cfg.delta();

    auto replicate = [&](long r) {
        auto rng = replication_engine(cfg.seed, static_cast<std::uint64_t>(r));
        Arm better = Arm::One;
        if (cfg.orientation == Orientation::Random) {
            better = std::bernoulli_distribution(0.5)(rng) ? Arm::One : Arm::Two;
        }
        const double p1 = better == Arm::One ? p_hi : p_lo;
        const double p2 = better == Arm::One ? p_lo : p_hi;
        std::binomial_distribution<long> bin1(cfg.M, p1);
        std::binomial_distribution<long> bin2(cfg.M, p2);
        std::bernoulli_distribution item1(p1);
        std::bernoulli_distribution item2(p2);

        History h;
        long successes = 0;
        for (long n = 0; n < N; ++n) {
            const Arm a = choose(h, policy, sqrt_packets, better);
            long count = 0;
            if (cfg.per_item) {
                auto& item = a == Arm::One ? item1 : item2;
                for (long i = 0; i < cfg.M; ++i) count += item(rng) ? 1 : 0;
            } else {
                count = a == Arm::One ? bin1(rng) : bin2(rng);
            }
            successes += count;
            h.record(a, static_cast<double>(count) * xi_scale);
        }
        return (static_cast<double>(cfg.T) * std::max(p1, p2) - static_cast<double>(successes)) *
               loss_scale;
    };
    return summarize(run_replications(cfg.replications, replicate), cfg.keep_raw);
}

TrialResult simulate_bernoulli(const BatchTrialConfig& cfg, const StrategyTable& strategy) {
    cfg.validate();
    check_lattice(strategy, cfg.packets());
    return simulate_bernoulli(cfg, table_policy(strategy));
}

TrialResult simulate_gaussian(const GaussianTrialConfig& cfg, const PacketPolicy& policy) {
    cfg.validate();
    const long N = cfg.packets;
    const double sqrt_packets = std::sqrt(static_cast<double>(N));
    const double half_gap = cfg.d / sqrt_packets;

    auto replicate = [&](long r) {
        auto rng = replication_engine(cfg.seed, static_cast<std::uint64_t>(r));
        Arm better = Arm::One;
        if (cfg.orientation == Orientation::Random) {
            better = std::bernoulli_distribution(0.5)(rng) ? Arm::One : Arm::Two;
        }
        const double m1 = better == Arm::One ? half_gap : -half_gap;
        const double m2 = -m1;
        std::normal_distribution<double> noise(0.0, 1.0);

        History h;
        double income = 0.0;
        for (long n = 0; n < N; ++n) {
            const Arm a = choose(h, policy, sqrt_packets, better);
            const double xi = (a == Arm::One ? m1 : m2) + noise(rng);
            income += xi;
            h.record(a, xi);
        }
        return (static_cast<double>(N) * std::max(m1, m2) - income) / sqrt_packets;
    };
    return summarize(run_replications(cfg.replications, replicate), cfg.keep_raw);
}

TrialResult simulate_gaussian(const GaussianTrialConfig& cfg, const StrategyTable& strategy) {
    cfg.validate();
    check_lattice(strategy, cfg.packets);
    return simulate_gaussian(cfg, table_policy(strategy));
}

}  // namespace gtab
