#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace sdseq {

// One paired observation (x_t, y_t) at round t. Rounds are 1-based and must
// arrive in order.
struct ObservationPair {
    double x = 0.0;
    double y = 0.0;
    std::int64_t t = 0;
};

struct SignificanceLevel {
    double alpha;

    explicit SignificanceLevel(double a) : alpha(a) {
        if (!(a > 0.0 && a < 1.0))
            throw std::invalid_argument("significance level must lie in (0, 1)");
    }

    double log_threshold() const { return std::log(1.0 / alpha); }
};

// Event counts at a single threshold z: n_p = #{x <= z < y}, n_q = #{y <= z < x}
// over the t rounds seen so far.
struct ThresholdCounts {
    std::int64_t n_p = 0;
    std::int64_t n_q = 0;
    std::int64_t t = 0;
};

// Running empirical summary of a paired stream. Keeps the raw history (in
// arrival order) plus sorted indexes so that marginal ECDFs, pooled
// quantiles, and per-threshold event counts are O(log t) queries at any z.
//
// Single-writer: ingest() mutates; copies are independent snapshots. All
// queries use the <= convention of right-continuous CDFs, so ties count.
class EmpiricalState {
public:
    std::int64_t count() const { return count_; }

    void ingest(const ObservationPair& pair) {
        if (!std::isfinite(pair.x) || !std::isfinite(pair.y))
            throw std::invalid_argument("ingest: non-finite observation");
        if (pair.t != count_ + 1)
            throw std::invalid_argument("ingest: out-of-order round index");
        raw_x_.push_back(pair.x);
        raw_y_.push_back(pair.y);
        insert_sorted(sorted_x_, pair.x);
        insert_sorted(sorted_y_, pair.y);
        insert_sorted(sorted_min_, std::min(pair.x, pair.y));
        insert_sorted(sorted_max_, std::max(pair.x, pair.y));
        insert_sorted(sorted_pooled_, pair.x);
        insert_sorted(sorted_pooled_, pair.y);
        ++count_;
    }

    std::int64_t count_x_le(double z) const { return count_le(sorted_x_, z); }
    std::int64_t count_y_le(double z) const { return count_le(sorted_y_, z); }

    // Marginal empirical CDFs; require at least one observation.
    double ecdf_x(double z) const { return ratio(count_x_le(z)); }
    double ecdf_y(double z) const { return ratio(count_y_le(z)); }

    // n_p - n_q = #{x<=z} - #{y<=z}; n_p + n_q = #{min<=z} - #{max<=z}.
    ThresholdCounts pair_counts(double z) const {
        const std::int64_t diff = count_x_le(z) - count_y_le(z);
        const std::int64_t sum = count_le(sorted_min_, z) - count_le(sorted_max_, z);
        return ThresholdCounts{(sum + diff) / 2, (sum - diff) / 2, count_};
    }

    const std::vector<double>& raw_x() const { return raw_x_; }
    const std::vector<double>& raw_y() const { return raw_y_; }
    const std::vector<double>& pooled_sorted() const { return sorted_pooled_; }

    double pooled_min() const { return sorted_pooled_.front(); }
    double pooled_max() const { return sorted_pooled_.back(); }

    // Lower (type-1) empirical quantile of the pooled sample at level p in [0,1].
    double pooled_quantile(double p) const {
        if (sorted_pooled_.empty())
            throw std::logic_error("pooled_quantile: empty state");
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("pooled_quantile: level outside [0,1]");
        const auto n = static_cast<std::int64_t>(sorted_pooled_.size());
        std::int64_t idx = (p <= 0.0) ? 0 : static_cast<std::int64_t>(std::ceil(p * static_cast<double>(n))) - 1;
        idx = std::clamp<std::int64_t>(idx, 0, n - 1);
        return sorted_pooled_[static_cast<std::size_t>(idx)];
    }

    // Recomputes pair_counts(z) by replaying raw history. Test hook for the
    // counter-consistency invariant.
    ThresholdCounts replay_counts(double z) const {
        ThresholdCounts c{0, 0, count_};
        for (std::size_t i = 0; i < raw_x_.size(); ++i) {
            if (raw_x_[i] <= z && z < raw_y_[i]) ++c.n_p;
            if (raw_y_[i] <= z && z < raw_x_[i]) ++c.n_q;
        }
        return c;
    }

private:
    static void insert_sorted(std::vector<double>& v, double value) {
        v.insert(std::upper_bound(v.begin(), v.end(), value), value);
    }

    static std::int64_t count_le(const std::vector<double>& v, double z) {
        return static_cast<std::int64_t>(std::upper_bound(v.begin(), v.end(), z) - v.begin());
    }

    double ratio(std::int64_t k) const {
        if (count_ == 0)
            throw std::logic_error("ECDF query on empty state");
        return static_cast<double>(k) / static_cast<double>(count_);
    }

    std::int64_t count_ = 0;
    std::vector<double> raw_x_, raw_y_;
    std::vector<double> sorted_x_, sorted_y_, sorted_min_, sorted_max_, sorted_pooled_;
};

inline EmpiricalState ingest(EmpiricalState state, const ObservationPair& pair) {
    state.ingest(pair);
    return state;
}

// Multiplicative log-wealth accumulator E_t = prod_s S_s with running maximum.
// Wealth lives entirely in log space; per-round factors of exactly zero are
// clamped to kMinFactor and flagged (bets are capped below 1 upstream, so a
// zero factor indicates a configuration at the boundary, not a normal run).
class EProcess {
public:
    static constexpr double kMinFactor = 1e-300;

    EProcess() = default;
    explicit EProcess(bool record_history) : record_history_(record_history) {}

    void step(double s) {
        if (std::isnan(s) || s < 0.0)
            throw std::invalid_argument("eprocess_step: factor must be nonnegative");
        if (s < kMinFactor) {
            s = kMinFactor;
            clamped_ = true;
        }
        ++rounds_;
        log_wealth_ += std::log(s);
        if (record_history_) history_.push_back(log_wealth_);
        update_max();
    }

    // For e-processes whose level is computed directly (e.g. mixtures of
    // per-threshold supermartingales) rather than as a running product.
    void assign_log_wealth(double log_value, std::int64_t round) {
        if (std::isnan(log_value))
            throw std::invalid_argument("assign_log_wealth: NaN");
        if (round != rounds_ + 1)
            throw std::invalid_argument("assign_log_wealth: out-of-order round");
        rounds_ = round;
        log_wealth_ = log_value;
        if (record_history_) history_.push_back(log_wealth_);
        update_max();
    }

    std::int64_t rounds() const { return rounds_; }
    double log_wealth() const { return log_wealth_; }
    double max_log_wealth() const { return max_log_wealth_; }
    bool ever_clamped() const { return clamped_; }

    // Per-round log-wealth trace; empty unless history recording was enabled.
    const std::vector<double>& history() const { return history_; }

    // First round at which the running maximum reached log(1/alpha).
    std::optional<std::int64_t> first_crossing(const SignificanceLevel& alpha) const {
        const double thr = alpha.log_threshold();
        auto it = std::lower_bound(records_.begin(), records_.end(), thr,
                                   [](const Record& r, double v) { return r.max_log < v; });
        if (it == records_.end()) return std::nullopt;
        return it->round;
    }

private:
    struct Record {
        double max_log;
        std::int64_t round;
    };

    void update_max() {
        if (log_wealth_ > max_log_wealth_) {
            max_log_wealth_ = log_wealth_;
            records_.push_back(Record{max_log_wealth_, rounds_});
        }
    }

    std::int64_t rounds_ = 0;
    double log_wealth_ = 0.0;      // E_0 = 1
    double max_log_wealth_ = 0.0;
    bool clamped_ = false;
    bool record_history_ = false;
    std::vector<double> history_;
    std::vector<Record> records_;  // strictly increasing in both fields
};

inline EProcess eprocess_step(EProcess ep, double s) {
    ep.step(s);
    return ep;
}

// Ville rejection rule: reject iff sup_{s<=t} E_s >= 1/alpha. Exposed through
// the running maximum, so monitoring on any subsampled schedule inherits the
// time-uniform guarantee, and the decision is sticky.
inline bool ville_reject(const EProcess& ep, const SignificanceLevel& alpha) {
    return ep.max_log_wealth() >= alpha.log_threshold();
}

} // namespace sdseq
