#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sdseq/core.hpp"

namespace sdseq {

// Which stochastic order is being tested. Each order is characterized by a
// family of utility generators u_i indexed by a real threshold (or transform
// index), with generator differences bounded in [-1, 1].
struct FsdOrder {};

struct KsdOrder {
    int k = 2;           // order, >= 2
    double lower_a = 0;  // known lower bound of the support
};

struct IcxOrder {
    double upper_b = 1;  // known upper bound of the support
};

struct LaplaceOrder {
    // Transform indices r >= 0; the default grid spans several decades.
    std::vector<double> index_grid{0.0, 1e-2, 1e-1, 1.0, 1e2, 1e3};
};

struct OrderSpec {
    std::variant<FsdOrder, KsdOrder, IcxOrder, LaplaceOrder> kind = FsdOrder{};

    static OrderSpec fsd() { return {}; }
    static OrderSpec ksd(int k, double a) {
        if (k < 2) throw std::invalid_argument("ksd order requires k >= 2");
        if (!std::isfinite(a)) throw std::invalid_argument("ksd lower bound must be finite");
        return OrderSpec{KsdOrder{k, a}};
    }
    static OrderSpec icx(double b) {
        if (!std::isfinite(b)) throw std::invalid_argument("icx upper bound must be finite");
        return OrderSpec{IcxOrder{b}};
    }
    static OrderSpec laplace(std::vector<double> grid = LaplaceOrder{}.index_grid) {
        if (grid.empty()) throw std::invalid_argument("laplace order requires a nonempty index grid");
        for (double r : grid)
            if (!(r >= 0.0)) throw std::invalid_argument("laplace indices must be >= 0");
        return OrderSpec{LaplaceOrder{std::move(grid)}};
    }

    bool is_fsd() const { return std::holds_alternative<FsdOrder>(kind); }
    bool is_laplace() const { return std::holds_alternative<LaplaceOrder>(kind); }
};

// Normalized utility generator u(z_or_r, x).
//   fsd:     -1{x <= z}                          in [-1, 0]
//   k-SD:    -((z - x)_+ / (z - a))^(k-1)        in [-1, 0], needs x >= a, z > a
//   icx:     (x - z)_+ / (b - z)                 in [0, 1],  needs x <= b, z < b
//   laplace: 1 - exp(-r x)                       in (-inf, 1], needs r >= 0
// Differences u(y) - u(x) are bounded in [-1, 1] in all cases.
inline double generator(const OrderSpec& order, double z_or_r, double x) {
    return std::visit(
        [&](const auto& o) -> double {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, FsdOrder>) {
                return x <= z_or_r ? -1.0 : 0.0;
            } else if constexpr (std::is_same_v<T, KsdOrder>) {
                if (!(z_or_r > o.lower_a))
                    throw std::invalid_argument("generator: ksd threshold must exceed the lower bound");
                if (x < o.lower_a)
                    throw std::invalid_argument("generator: observation below declared lower bound");
                const double frac = std::max(z_or_r - x, 0.0) / (z_or_r - o.lower_a);
                return -std::pow(frac, o.k - 1);
            } else if constexpr (std::is_same_v<T, IcxOrder>) {
                if (!(z_or_r < o.upper_b))
                    throw std::invalid_argument("generator: icx threshold must be below the upper bound");
                if (x > o.upper_b)
                    throw std::invalid_argument("generator: observation above declared upper bound");
                return std::max(x - z_or_r, 0.0) / (o.upper_b - z_or_r);
            } else {
                if (!(z_or_r >= 0.0))
                    throw std::invalid_argument("generator: laplace index must be >= 0");
                return 1.0 - std::exp(-z_or_r * x);
            }
        },
        order.kind);
}

// Single-round e-variable 1 + lambda * (u(y) - u(x)) for the given order.
inline double order_e_value(const OrderSpec& order, double lambda, double z_or_r,
                            const ObservationPair& pair) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("order_e_value: lambda outside [0, 1]");
    return 1.0 + lambda * (generator(order, z_or_r, pair.y) - generator(order, z_or_r, pair.x));
}

// Base-game payoff fed to the universal portfolio: the full-bet e-variable
// s(z) = 1 + (u(y) - u(x)), nonnegative because generator differences are
// bounded by 1.
inline double order_base_payoff(const OrderSpec& order, double z_or_r, const ObservationPair& pair) {
    return 1.0 + generator(order, z_or_r, pair.y) - generator(order, z_or_r, pair.x);
}

struct UpConfig {
    int n_grid = 101;
    double c_up = 1e-4;

    UpConfig() = default;
    UpConfig(int n, double c) : n_grid(n), c_up(c) {
        if (n < 2) throw std::invalid_argument("UP grid needs at least 2 candidates");
        if (!(c > 0.0 && c < 0.5)) throw std::invalid_argument("UP margin must lie in (0, 0.5)");
    }
};

// Universal-portfolio bet state for one game: candidate bets uniformly spaced
// in [c, 1-c] with posterior log-weights. The prior is Beta(1/2, 1/2)
// (Jeffreys) discretized on the grid and normalized; each round's payoff s
// multiplies candidate g's wealth by (1 - lambda_g) + lambda_g * s.
class UPState {
public:
    explicit UPState(const UpConfig& cfg = UpConfig{}) {
        const int n = cfg.n_grid;
        bets_.resize(static_cast<std::size_t>(n));
        log_w_.resize(static_cast<std::size_t>(n));
        for (int g = 0; g < n; ++g) {
            const double lam = cfg.c_up + (1.0 - 2.0 * cfg.c_up) * static_cast<double>(g) /
                                              static_cast<double>(n - 1);
            bets_[static_cast<std::size_t>(g)] = lam;
            log_w_[static_cast<std::size_t>(g)] = -0.5 * (std::log(lam) + std::log1p(-lam));
        }
        normalize();
    }

    std::size_t size() const { return bets_.size(); }
    std::span<const double> candidate_bets() const { return bets_; }
    std::span<const double> log_weights() const { return log_w_; }

    // Posterior-mean bet, evaluated stably in log space.
    double bet() const {
        double m = log_w_[0];
        for (double v : log_w_) m = std::max(m, v);
        double num = 0.0, den = 0.0;
        for (std::size_t g = 0; g < bets_.size(); ++g) {
            const double w = std::exp(log_w_[g] - m);
            num += bets_[g] * w;
            den += w;
        }
        return num / den;
    }

    // Log prior-mixture wealth log sum_g pi_g W_t(lambda_g); equals the UP
    // wealth by the telescoping posterior-mean identity.
    double log_mixture_wealth() const {
        double m = log_w_[0];
        for (double v : log_w_) m = std::max(m, v);
        double acc = 0.0;
        for (double v : log_w_) acc += std::exp(v - m);
        return m + std::log(acc);
    }

    void update(double s) {
        if (std::isnan(s) || s < 0.0)
            throw std::invalid_argument("up_update: payoff must be nonnegative");
        for (std::size_t g = 0; g < bets_.size(); ++g)
            log_w_[g] += std::log1p(bets_[g] * (s - 1.0));
    }

private:
    void normalize() {
        double m = log_w_[0];
        for (double v : log_w_) m = std::max(m, v);
        double acc = 0.0;
        for (double v : log_w_) acc += std::exp(v - m);
        const double log_total = m + std::log(acc);
        for (double& v : log_w_) v -= log_total;
    }

    std::vector<double> bets_;
    std::vector<double> log_w_;
};

inline double up_bet(const UPState& state) { return state.bet(); }

inline UPState up_update(UPState state, double s) {
    state.update(s);
    return state;
}

// Rebuilds the UP state for a threshold from the payoff history; equal to
// folding up_update over the payoffs in order.
inline UPState up_recompute_for_threshold(std::span<const double> payoff_history,
                                          const UpConfig& cfg = UpConfig{}) {
    UPState st(cfg);
    for (double s : payoff_history) st.update(s);
    return st;
}

} // namespace sdseq
