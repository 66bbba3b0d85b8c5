#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "sdseq/core.hpp"
#include "sdseq/fsd.hpp"

namespace sdseq {

enum class GridProvenance { FixedEquidistant, QuantileGrid, FiniteSupport };

struct ThresholdGrid {
    std::vector<double> z;  // strictly increasing, nonempty
    GridProvenance provenance = GridProvenance::FixedEquidistant;

    std::size_t size() const { return z.size(); }
};

inline ThresholdGrid equidistant_grid(double lo, double hi, int count = 21) {
    if (!(lo < hi))
        throw std::invalid_argument("equidistant_grid: degenerate interval");
    if (count < 2)
        throw std::invalid_argument("equidistant_grid: need at least 2 points");
    ThresholdGrid g;
    g.provenance = GridProvenance::FixedEquidistant;
    g.z.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        g.z.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    return g;
}

inline ThresholdGrid finite_support_grid(std::vector<double> support) {
    if (support.empty())
        throw std::invalid_argument("finite_support_grid: empty support");
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    return ThresholdGrid{std::move(support), GridProvenance::FiniteSupport};
}

// Threshold refresh: before `burn_in` rounds have been ingested the initial
// grid is kept; afterwards the grid is replaced wholesale by the lower
// empirical quantiles of the pooled sample at K equidistant levels,
// de-duplicated. (Type-1/lower quantile convention, fixed for
// reproducibility.)
inline ThresholdGrid update_thresholds(const EmpiricalState& state, const ThresholdGrid& initial,
                                       int K = 100, int burn_in = 50) {
    if (K < 2)
        throw std::invalid_argument("update_thresholds: K must be >= 2");
    if (state.count() < 1)
        throw std::invalid_argument("update_thresholds: empty state");
    if (state.count() < burn_in) return initial;
    ThresholdGrid g;
    g.provenance = GridProvenance::QuantileGrid;
    g.z.reserve(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) {
        const double level = static_cast<double>(i) / static_cast<double>(K - 1);
        const double q = state.pooled_quantile(level);
        if (g.z.empty() || q > g.z.back()) g.z.push_back(q);
    }
    return g;
}

enum class WeightKind { ExpSelfNormalized, Hedge, Linear, Uniform };

struct WeightScheme {
    WeightKind kind = WeightKind::Uniform;
    double eta = 1.0;
    // Floor for the standardized-difference denominator; defaults to 1/t when
    // unset, which bounds the effective learning rate by eta * t.
    std::optional<double> sd_floor;

    static WeightScheme uniform() { return WeightScheme{WeightKind::Uniform, 1.0, {}}; }
    static WeightScheme exp_self_normalized(double eta = 1.0) {
        return WeightScheme{WeightKind::ExpSelfNormalized, eta, {}};
    }
    static WeightScheme hedge(double eta = 1.0) { return WeightScheme{WeightKind::Hedge, eta, {}}; }
    static WeightScheme linear() { return WeightScheme{WeightKind::Linear, 1.0, {}}; }
};

// Plug-in standard deviation of the per-round payoff at one threshold,
// sqrt((p + q - (p - q)^2) / (t - 1)) with p = n_p/t, q = n_q/t, floored away
// from zero. Var(d) = p + q - (p-q)^2 for the three-outcome payoff.
inline double sd_hat(const ThresholdCounts& counts, std::optional<double> floor = {}) {
    if (counts.t < 2)
        throw std::invalid_argument("sd_hat: need at least 2 rounds");
    const double t = static_cast<double>(counts.t);
    const double p = static_cast<double>(counts.n_p) / t;
    const double q = static_cast<double>(counts.n_q) / t;
    const double var = p + q - (p - q) * (p - q);
    const double lo = floor.value_or(1.0 / t);
    if (!(lo > 0.0))
        throw std::invalid_argument("sd_hat: floor must be positive");
    return std::max(lo, std::sqrt(std::max(var, 0.0) / (t - 1.0)));
}

namespace detail {

// Softmax in log space with max subtraction.
inline std::vector<double> softmax(std::span<const double> scores) {
    const double m = *std::max_element(scores.begin(), scores.end());
    std::vector<double> w(scores.size());
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        w[i] = std::exp(scores[i] - m);
        total += w[i];
    }
    for (double& v : w) v /= total;
    return w;
}

} // namespace detail

// Weight kernel shared by all orders. `mean_diff[i]` is the mean historical
// payoff at threshold i (equals F̂_X - F̂_Y for first-order SD), `sd[i]` its
// floored standard-deviation estimate, `bets[i]` the current bet, and
// `rounds_seen` the number of ingested rounds the statistics are based on.
inline std::vector<double> compute_weights_from_stats(const WeightScheme& scheme,
                                                      std::span<const double> mean_diff,
                                                      std::span<const double> sd,
                                                      std::span<const double> bets,
                                                      std::int64_t rounds_seen) {
    const std::size_t n = mean_diff.size();
    if (n == 0)
        throw std::invalid_argument("compute_weights: empty grid");
    std::vector<double> scores(n, 0.0);
    switch (scheme.kind) {
        case WeightKind::Uniform:
            return std::vector<double>(n, 1.0 / static_cast<double>(n));
        case WeightKind::ExpSelfNormalized: {
            if (rounds_seen < 2)
                throw std::invalid_argument("compute_weights: self-normalized weights need t >= 2");
            if (sd.size() != n)
                throw std::invalid_argument("compute_weights: sd length mismatch");
            for (std::size_t i = 0; i < n; ++i)
                scores[i] = scheme.eta * mean_diff[i] / sd[i];
            return detail::softmax(scores);
        }
        case WeightKind::Hedge: {
            for (std::size_t i = 0; i < n; ++i)
                scores[i] = scheme.eta * static_cast<double>(rounds_seen) * mean_diff[i];
            return detail::softmax(scores);
        }
        case WeightKind::Linear: {
            if (bets.size() != n)
                throw std::invalid_argument("compute_weights: bets length mismatch");
            double total = 0.0;
            for (double b : bets) {
                if (b < 0.0)
                    throw std::invalid_argument("compute_weights: negative bet");
                total += b;
            }
            if (total == 0.0)  // no active bet anywhere: fall back to uniform
                return std::vector<double>(n, 1.0 / static_cast<double>(n));
            std::vector<double> w(n);
            for (std::size_t i = 0; i < n; ++i) w[i] = bets[i] / total;
            return w;
        }
    }
    throw std::logic_error("compute_weights: unknown kind");
}

// First-order-SD convenience overload: derives the CDF differences and the
// standardized denominators from the empirical state.
inline std::vector<double> compute_weights(const WeightScheme& scheme, const ThresholdGrid& grid,
                                           const EmpiricalState& state,
                                           std::span<const double> bets) {
    const std::size_t n = grid.size();
    std::vector<double> diff(n, 0.0), sd(n, 1.0);
    if (scheme.kind == WeightKind::ExpSelfNormalized || scheme.kind == WeightKind::Hedge) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto counts = state.pair_counts(grid.z[i]);
            diff[i] = static_cast<double>(counts.n_p - counts.n_q) / static_cast<double>(std::max<std::int64_t>(counts.t, 1));
            if (scheme.kind == WeightKind::ExpSelfNormalized)
                sd[i] = sd_hat(counts, scheme.sd_floor);
        }
    }
    return compute_weights_from_stats(scheme, diff, sd, bets, state.count());
}

// Discrete mixture e-value: sum_i w_i * s_i.
inline double mixture_e_value(std::span<const double> weights, std::span<const double> values) {
    if (weights.size() != values.size())
        throw std::invalid_argument("mixture_e_value: length mismatch");
    if (weights.empty())
        throw std::invalid_argument("mixture_e_value: empty mixture");
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (values[i] < 0.0)
            throw std::invalid_argument("mixture_e_value: negative e-value");
        acc += weights[i] * values[i];
    }
    return acc;
}

// Exact mixture of a piecewise-constant e-value curve against Uniform[lo, hi]:
// s(.) equals values[j] on [points[j], points[j+1]) and 1 outside
// [points.front(), points.back()). Atom weights become interval masses.
inline double piecewise_mixture_e_value(std::span<const double> points,
                                        std::span<const double> values, double lo, double hi) {
    if (points.size() != values.size())
        throw std::invalid_argument("piecewise_mixture_e_value: length mismatch");
    if (points.size() < 2 || !(lo < hi))
        throw std::invalid_argument("piecewise_mixture_e_value: degenerate input");
    const double total = hi - lo;
    auto mass = [&](double a, double b) {
        const double left = std::max(a, lo);
        const double right = std::min(b, hi);
        return right > left ? (right - left) / total : 0.0;
    };
    double acc = mass(-std::numeric_limits<double>::infinity(), points.front()) +
                 mass(points.back(), std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j + 1 < points.size(); ++j)
        acc += values[j] * mass(points[j], points[j + 1]);
    return acc;
}

} // namespace sdseq
