#include "gtab/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gtab/errors.hpp"

namespace gtab {

DimensionalParams DimensionalParams::make(double m1, double m2, double C) {
    if (!(C > 0.0) || !std::isfinite(m1) || !std::isfinite(m2)) {
        throw ConfigError("DimensionalParams: C must be positive and means finite");
    }
    if (std::abs(m1 - m2) > 2.0 * C) {
        throw ConfigError("DimensionalParams: |m1 - m2| exceeds 2C");
    }
    return {m1, m2, C};
}

SymmetricPrior::SymmetricPrior(std::vector<PriorAtom> atoms, double support_bound)
    : atoms_(std::move(atoms)), c_(support_bound) {
    if (atoms_.empty()) {
        throw ConfigError("SymmetricPrior: at least one atom required");
    }
    if (!(c_ > 0.0)) {
        throw ConfigError("SymmetricPrior: support bound c must be positive");
    }
    double total = 0.0;
    for (const auto& a : atoms_) {
        if (!(a.w > 0.0) || !std::isfinite(a.w)) {
            throw ConfigError("SymmetricPrior: atom location w must be positive and finite");
        }
        if (a.w > c_) {
            throw ConfigError("SymmetricPrior: atom location exceeds support bound c");
        }
        if (!(a.weight > 0.0) || a.weight > 1.0) {
            throw ConfigError("SymmetricPrior: atom weight must lie in (0, 1]");
        }
        total += a.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "SymmetricPrior: weights sum to " << total << ", expected 1";
        throw ConfigError(os.str());
    }
    std::sort(atoms_.begin(), atoms_.end(),
              [](const PriorAtom& a, const PriorAtom& b) { return a.w < b.w; });
    for (std::size_t i = 1; i < atoms_.size(); ++i) {
        if (atoms_[i].w == atoms_[i - 1].w) {
            throw ConfigError("SymmetricPrior: atom locations must be distinct");
        }
    }
}

SymmetricPrior SymmetricPrior::two_point(double d) { return SymmetricPrior({{d, 1.0}}); }

SymmetricPrior SymmetricPrior::from_dimensional(std::span<const PriorAtom> v_atoms, double C,
                                                long horizon) {
    if (horizon <= 0) {
        throw ConfigError("SymmetricPrior: horizon must be positive");
    }
    const double scale = std::sqrt(static_cast<double>(horizon));
    std::vector<PriorAtom> w_atoms;
    w_atoms.reserve(v_atoms.size());
    for (const auto& a : v_atoms) {
        w_atoms.push_back({a.w * scale, a.weight});
    }
    return SymmetricPrior(std::move(w_atoms), C * scale);
}

double SymmetricPrior::mean_abs() const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.weight * a.w;
    return s;
}

void DimensionalState::validate() const {
    if (M <= 0 || N <= 0 || N % M != 0) {
        throw ConfigError("DimensionalState: N must be a positive multiple of M");
    }
    if (n1 < 0 || n2 < 0 || n1 % M != 0 || n2 % M != 0) {
        throw ConfigError("DimensionalState: n1 and n2 must be nonnegative multiples of M");
    }
    if (n1 + n2 > N) {
        throw ConfigError("DimensionalState: n1 + n2 exceeds the horizon N");
    }
}

double DimensionalState::U() const {
    const long n = n1 + n2;
    if (n == 0) return 0.0;
    return (X1 * static_cast<double>(n2) - X2 * static_cast<double>(n1)) / static_cast<double>(n);
}

InvariantState to_invariant(const DimensionalState& s) {
    s.validate();
    const double N = static_cast<double>(s.N);
    return {s.U() / std::sqrt(N), static_cast<double>(s.n1) / N, static_cast<double>(s.n2) / N};
}

DimensionalState from_invariant(const InvariantState& s, long N, long M) {
    if (M <= 0 || N <= 0 || N % M != 0) {
        throw ConfigError("from_invariant: N must be a positive multiple of M");
    }
    const double Nd = static_cast<double>(N);
    const double k1 = s.t1 * Nd;
    const double k2 = s.t2 * Nd;
    const long n1 = std::lround(k1);
    const long n2 = std::lround(k2);
    if (std::abs(k1 - n1) > 1e-6 || std::abs(k2 - n2) > 1e-6) {
        throw ConfigError("from_invariant: t1 N and t2 N must be integers");
    }
    const double U = s.u * std::sqrt(Nd);
    DimensionalState d{U, -U, n1, n2, N, M};
    d.validate();
    return d;
}

UGrid::UGrid(int half, double du, bool) : half_(half), du_(du) {}

UGrid::UGrid(double u_max, double du) : half_(0), du_(du) {
    if (!(du > 0.0) || !(u_max > 0.0) || !std::isfinite(u_max)) {
        throw ConfigError("UGrid: u_max and du must be positive");
    }
    const double ratio = u_max / du;
    const long half = std::lround(ratio);
    if (half < 1 || std::abs(ratio - static_cast<double>(half)) > 1e-9 * std::max(1.0, ratio)) {
        throw ConfigError("UGrid: 2 u_max / du must be an even integer");
    }
    half_ = static_cast<int>(half);
}

UGrid UGrid::covering(double u_max, double du) {
    if (!(du > 0.0) || !(u_max > 0.0) || !std::isfinite(u_max)) {
        throw ConfigError("UGrid: u_max and du must be positive");
    }
    const double ratio = u_max / du;
    long half = std::lround(ratio);
    if (static_cast<double>(half) < ratio * (1.0 - 1e-12)) ++half;
    return UGrid(static_cast<int>(std::max(1L, half)), du, true);
}

UGrid UGrid::from_half_points(int half, double du) {
    if (half < 1 || !(du > 0.0) || !std::isfinite(du)) {
        throw ConfigError("UGrid: need at least one point per side and positive du");
    }
    return UGrid(half, du, true);
}

int UGrid::nearest_index(double u) const {
    const double x = u / du_;
    const double mag = std::ceil(std::abs(x) - 0.5);
    const double k = std::min(mag, static_cast<double>(half_));
    return half_ + static_cast<int>(x < 0.0 ? -k : k);
}

namespace {

inline double loss_term(const PriorAtom& a, double signed_u, double tau) {
    return a.weight * a.w * std::exp(2.0 * signed_u * a.w - 2.0 * a.w * a.w * tau);
}

}  // namespace

double one_step_loss(const SymmetricPrior& prior, Arm arm, const InvariantState& s) {
    const double t = s.t();
    if (!(t > 0.0)) {
        throw ConfigError("one_step_loss: t1 + t2 must be positive");
    }
    const double tau = s.t1 * s.t2 / t;
    const double signed_u = arm == Arm::One ? -s.u : s.u;
    double g = 0.0;
    for (const auto& a : prior.atoms()) g += loss_term(a, signed_u, tau);
    return g;
}

void one_step_loss_slice(const SymmetricPrior& prior, Arm arm, double t1, double t2,
                         const UGrid& grid, std::span<double> out) {
    const double t = t1 + t2;
    if (!(t > 0.0)) {
        throw ConfigError("one_step_loss: t1 + t2 must be positive");
    }
    const double tau = t1 * t2 / t;
    const int n = grid.size();
    for (int i = 0; i < n; ++i) {
        const double u = grid.point(i);
        const double signed_u = arm == Arm::One ? -u : u;
        double g = 0.0;
        for (const auto& a : prior.atoms()) g += loss_term(a, signed_u, tau);
        out[i] = g;
    }
}

double transition_variance(double eps, Arm arm, double t1, double t2) {
    const double t = t1 + t2;
    const double t_other = arm == Arm::One ? t2 : t1;
    return eps * t_other * t_other / (t * (t + eps));
}

double GaussianKernel::weight(int offset) const {
    const int j = offset < 0 ? -offset : offset;
    return j <= reach() ? half_[j] : 0.0;
}

void GaussianKernel::apply(std::span<const double> in, std::span<double> out) const {
    const int n = static_cast<int>(in.size());
    const int reach_ = reach();
    const double w0 = half_[0];
    for (int i = 0; i < n; ++i) {
        double acc = w0 * in[i];
        const int jmax = std::min(reach_, std::max(i, n - 1 - i));
        for (int j = 1; j <= jmax; ++j) {
            const double lo = i - j >= 0 ? in[i - j] : 0.0;
            const double hi = i + j < n ? in[i + j] : 0.0;
            // Pairing the mirrored taps keeps r(u) = r(-u) symmetry bit-exact.
            acc += half_[j] * (lo + hi);
        }
        out[i] = acc;
    }
}

GaussianKernel gaussian_kernel(double variance, const UGrid& grid) {
    if (!(variance > 0.0) || !std::isfinite(variance)) {
        throw ConfigError("gaussian_kernel: variance must be positive and finite");
    }
    GaussianKernel k;
    k.variance_ = variance;
    const double sigma = std::sqrt(variance);
    const double du = grid.du();
    if (sigma < 0.5 * du) {
        k.half_ = {1.0};
        return k;
    }
    const int reach = static_cast<int>(std::ceil(6.0 * sigma / du));
    k.half_.assign(reach + 1, 0.0);
    double total = 0.0;
    for (int j = 0; j <= reach; ++j) {
        const double x = j * du;
        k.half_[j] = std::exp(-0.5 * x * x / variance);
        total += j == 0 ? k.half_[j] : 2.0 * k.half_[j];
    }
    for (double& w : k.half_) w /= total;
    return k;
}

double interpolate(std::span<const double> values, const UGrid& grid, double u) {
    const double x = u / grid.du() + grid.center();
    const int last = grid.size() - 1;
    if (x < 0.0 || x > static_cast<double>(last)) return 0.0;
    const int i = std::min(static_cast<int>(std::floor(x)), last - 1);
    const double f = x - i;
    return (1.0 - f) * values[i] + f * values[i + 1];
}

}  // namespace gtab
