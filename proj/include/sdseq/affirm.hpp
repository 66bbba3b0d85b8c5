#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "sdseq/core.hpp"
#include "sdseq/fsd.hpp"

namespace sdseq {

// ---------------------------------------------------------------------------
// Minimum e-process over a fixed finite threshold set (affirming dominance)
// ---------------------------------------------------------------------------

// Per-threshold log-wealths for thresholds z_1 < ... < z_{m-1}; the affirmation
// evidence is the minimum across thresholds. The threshold set is fixed at
// construction (finite-support requirement).
struct MinEProcessState {
    std::vector<double> log_wealth;  // one entry per threshold

    explicit MinEProcessState(std::size_t n_thresholds)
        : log_wealth(n_thresholds, 0.0) {
        if (n_thresholds == 0)
            throw std::invalid_argument("MinEProcessState: need at least one threshold");
    }

    double min_log_wealth() const {
        return *std::min_element(log_wealth.begin(), log_wealth.end());
    }
};

// Applies one round of per-threshold factors and returns the new minimum
// e-value exp(min_i log W_i).
inline double min_eprocess_update(MinEProcessState& state, std::span<const double> factors) {
    if (factors.size() != state.log_wealth.size())
        throw std::invalid_argument("min_eprocess_update: factor count mismatch");
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (!(factors[i] > 0.0))
            throw std::invalid_argument("min_eprocess_update: factors must be positive");
        state.log_wealth[i] += std::log(factors[i]);
    }
    return std::exp(state.min_log_wealth());
}

// Support declaration for the affirmation test. The min construction is only
// valid for finite known support.
struct SupportSpec {
    bool finite = false;
    std::vector<double> points;

    static SupportSpec finite_support(std::vector<double> pts) {
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        return SupportSpec{true, std::move(pts)};
    }
    static SupportSpec continuous() { return SupportSpec{false, {}}; }
};

// Affirmation test for "X is dominated by Y" via the minimum of per-threshold
// GRO plug-in e-processes over the m-1 lower support points. Rejecting the
// non-dominance null affirms (epsilon-separated) dominance.
class MinEProcessAffirmTest {
public:
    MinEProcessAffirmTest(const SupportSpec& support, SignificanceLevel alpha,
                          BetParams cap = BetParams{})
        : alpha_(alpha), cap_(cap) {
        if (!support.finite)
            throw std::invalid_argument(
                "min e-process affirmation requires finite declared support");
        if (support.points.size() < 2)
            throw std::invalid_argument("finite support needs at least two points");
        thresholds_.assign(support.points.begin(), support.points.end() - 1);
        state_ = MinEProcessState(thresholds_.size());
        counts_.assign(thresholds_.size(), ThresholdCounts{});
    }

    std::span<const double> thresholds() const { return thresholds_; }
    std::int64_t rounds() const { return rounds_; }
    double min_e_value() const { return std::exp(state_->min_log_wealth()); }
    double max_min_log_wealth() const { return max_min_log_; }

    bool rejected() const { return max_min_log_ >= alpha_.log_threshold(); }

    // Bets with the current plug-in lambdas, then ingests the pair.
    void step(const ObservationPair& pair) {
        std::vector<double> factors(thresholds_.size());
        for (std::size_t i = 0; i < thresholds_.size(); ++i) {
            const double lam = plugin_lambda(counts_[i], cap_);
            factors[i] = 1.0 + lam * static_cast<double>(payoff_d(pair, thresholds_[i]));
        }
        min_eprocess_update(*state_, factors);
        max_min_log_ = std::max(max_min_log_, state_->min_log_wealth());
        ++rounds_;
        for (std::size_t i = 0; i < thresholds_.size(); ++i) {
            const int d = payoff_d(pair, thresholds_[i]);
            if (d > 0) ++counts_[i].n_p;
            if (d < 0) ++counts_[i].n_q;
            ++counts_[i].t;
        }
    }

private:
    SignificanceLevel alpha_;
    BetParams cap_;
    std::vector<double> thresholds_;
    std::optional<MinEProcessState> state_;
    std::vector<ThresholdCounts> counts_;
    std::int64_t rounds_ = 0;
    double max_min_log_ = 0.0;
};

inline bool affirm_sd_via_min(const MinEProcessAffirmTest& test) { return test.rejected(); }

// ---------------------------------------------------------------------------
// Finite-LIL confidence band and KS-type sequential test
// ---------------------------------------------------------------------------

// Width function omega_t(A, alpha) = A * sqrt((loglog(e t / t_min) + C) / t).
// C is the stitching constant; see default_band_constant() and
// docs/lil_band.md for the shipped conservative derivation.
struct BandSpec {
    double A = 0.85;
    double C = 1.0;
    std::int64_t t_min = 10;
    SignificanceLevel alpha;

    BandSpec(double A_, double C_, std::int64_t t_min_, SignificanceLevel alpha_)
        : A(A_), C(C_), t_min(t_min_), alpha(alpha_) {
        if (!(A >= 0.5)) throw std::invalid_argument("BandSpec: A must be >= 1/2");
        if (!(C > 0.0)) throw std::invalid_argument("BandSpec: C must be positive");
        if (t_min < 1) throw std::invalid_argument("BandSpec: t_min must be >= 1");
    }
};

// Conservative stitching constant for a single one-sided band at level alpha:
// bounds P(exists t >= t_min : KS_t^+ >= omega_t) by a union over dyadic
// epochs [2^l t_min, 2^(l+1) t_min), combining the Montgomery-Smith maximal
// inequality with the two-sided DKW bound at per-epoch budget
// alpha / ((l+1)(l+2)). Covers horizons up to 2^30 * t_min.
inline double default_band_constant(double A, double alpha) {
    if (!(A >= 0.5) || !(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("default_band_constant: invalid parameters");
    double c_max = 0.0;
    for (int l = 0; l < 30; ++l) {
        const double budget = alpha / (static_cast<double>(l + 1) * static_cast<double>(l + 2));
        const double needed = 9.0 / (A * A) * std::log(6.0 / budget) -
                              std::log1p(static_cast<double>(l) * std::log(2.0));
        c_max = std::max(c_max, needed);
    }
    return c_max;
}

// Band for the two-band KS test at total level alpha: each one-sided band
// consumes alpha/2.
inline BandSpec make_default_band(SignificanceLevel alpha, double A = 0.85,
                                  std::int64_t t_min = 10) {
    return BandSpec(A, default_band_constant(A, alpha.alpha / 2.0), t_min, alpha);
}

inline double lil_width(std::int64_t t, const BandSpec& band) {
    if (t < band.t_min)
        throw std::invalid_argument("lil_width: t below t_min");
    const double td = static_cast<double>(t);
    const double ll = std::log(std::log(std::numbers::e * td / static_cast<double>(band.t_min)));
    return band.A * std::sqrt((ll + band.C) / td);
}

// One-sided KS statistic sup_z (F̂_X(z) - F̂_Y(z)); the sup is attained at
// pooled observation points because both ECDFs are right-continuous step
// functions jumping only there.
inline double one_sided_ks(const EmpiricalState& state) {
    const auto& pooled = state.pooled_sorted();
    double best = 0.0;
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (double z : pooled) {
        if (z == prev) continue;
        prev = z;
        best = std::max(best, state.ecdf_x(z) - state.ecdf_y(z));
    }
    return best;
}

// KS-type sequential test: reject once the one-sided KS statistic exceeds
// 2 * omega_t. The decision is sticky via the caller's running maximum or by
// wrapping in KsBandTest below.
inline bool ks_band_test(const EmpiricalState& state, const BandSpec& band) {
    if (state.count() < band.t_min)
        return false;
    return one_sided_ks(state) > 2.0 * lil_width(state.count(), band);
}

class KsBandTest {
public:
    explicit KsBandTest(BandSpec band) : band_(band) {}

    // Returns the sticky decision after ingesting this round.
    bool step(const EmpiricalState& state) {
        rejected_ = rejected_ || ks_band_test(state, band_);
        return rejected_;
    }
    bool rejected() const { return rejected_; }

private:
    BandSpec band_;
    bool rejected_ = false;
};

// ---------------------------------------------------------------------------
// tvCS affirmation test
// ---------------------------------------------------------------------------

using CdfBound = std::function<double(double)>;

// Affirms restricted dominance at the witness points: true iff the upper band
// of F_Y lies strictly below the lower band of F_X everywhere on the witness
// set. The caller guarantees lcb_x is a (1 - alpha/2) time-uniform lower band
// for F_X and ucb_y a (1 - alpha/2) upper band for F_Y.
inline bool tvcs_affirm_test(const CdfBound& lcb_x, const CdfBound& ucb_y,
                             std::span<const double> witness_set) {
    if (witness_set.empty())
        throw std::invalid_argument("tvcs_affirm_test: empty witness set");
    for (double z : witness_set)
        if (!(ucb_y(z) < lcb_x(z))) return false;
    return true;
}

class TvcsAffirmTest {
public:
    explicit TvcsAffirmTest(std::vector<double> witness_set)
        : witness_(std::move(witness_set)) {
        if (witness_.empty())
            throw std::invalid_argument("TvcsAffirmTest: empty witness set");
    }

    bool step(const CdfBound& lcb_x, const CdfBound& ucb_y) {
        rejected_ = rejected_ || tvcs_affirm_test(lcb_x, ucb_y, witness_);
        return rejected_;
    }
    bool rejected() const { return rejected_; }

private:
    std::vector<double> witness_;
    bool rejected_ = false;
};

// Default tvCS provider: the finite-LIL band around the marginal ECDFs.
// lower_x(z) = F̂_X(z) - omega_t, upper_y(z) = F̂_Y(z) + omega_t, each valid as
// a one-sided band at the BandSpec's construction level.
struct LilBandPair {
    const EmpiricalState& state;
    BandSpec band;

    CdfBound lower_x() const {
        return [this](double z) {
            return state.ecdf_x(z) - lil_width(state.count(), band);
        };
    }
    CdfBound upper_y() const {
        return [this](double z) {
            return state.ecdf_y(z) + lil_width(state.count(), band);
        };
    }
};

} // namespace sdseq
