#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

#include "sdseq/core.hpp"

namespace sdseq {

// Betting-fraction cap: bets are confined to [0, 1 - c_cap] so a single round
// can never wipe out the wealth entirely.
struct BetParams {
    double c_cap = 0.01;

    explicit BetParams(double c = 0.01) : c_cap(c) {
        if (!(c > 0.0 && c < 1.0))
            throw std::invalid_argument("bet cap must lie in (0, 1)");
    }

    double max_lambda() const { return 1.0 - c_cap; }
};

// Three-outcome payoff d(z) = 1{x <= z} - 1{y <= z} in {-1, 0, +1}.
inline int payoff_d(const ObservationPair& pair, double z) {
    return (pair.x <= z ? 1 : 0) - (pair.y <= z ? 1 : 0);
}

// Single-round betting factor 1 + lambda * d(z), nonnegative for lambda in [0,1].
inline double building_block_e(double lambda, double z, const ObservationPair& pair) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("building_block_e: lambda outside [0, 1]");
    return 1.0 + lambda * static_cast<double>(payoff_d(pair, z));
}

// Growth-rate-optimal bet against the three-outcome game with win probability
// p and loss probability q: argmax of p*log(1+l) + q*log(1-l).
inline double gro_lambda_star(double p, double q) {
    if (p < 0.0 || q < 0.0)
        throw std::invalid_argument("gro_lambda_star: probabilities must be nonnegative");
    const double denom = p + q;
    if (denom == 0.0) return 0.0;
    return (p - q) / denom;
}

// Predictable plug-in bet from event counts: (1-c) ∧ ((n_p - n_q)/(n_p + n_q))_+,
// and 0 while no threshold event has been seen.
inline double plugin_lambda(const ThresholdCounts& counts, const BetParams& cap = BetParams{}) {
    const std::int64_t denom = counts.n_p + counts.n_q;
    if (denom <= 0) return 0.0;
    const double raw = static_cast<double>(counts.n_p - counts.n_q) / static_cast<double>(denom);
    return std::clamp(raw, 0.0, cap.max_lambda());
}

// Batch e-variable for unpaired data: 1 + lambda * (ECDF_x(z) - ECDF_y(z)).
inline double batch_e(double lambda, double z, std::span<const double> batch_x,
                      std::span<const double> batch_y) {
    if (batch_x.empty() || batch_y.empty())
        throw std::invalid_argument("batch_e: empty batch");
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("batch_e: lambda outside [0, 1]");
    auto ecdf = [z](std::span<const double> v) {
        std::int64_t k = 0;
        for (double u : v)
            if (u <= z) ++k;
        return static_cast<double>(k) / static_cast<double>(v.size());
    };
    return 1.0 + lambda * (ecdf(batch_x) - ecdf(batch_y));
}

} // namespace sdseq
