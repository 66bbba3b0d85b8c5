#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sdseq/core.hpp"
#include "sdseq/fsd.hpp"
#include "sdseq/orders.hpp"
#include "sdseq/rng.hpp"
#include "sdseq/subexp.hpp"
#include "sdseq/weighting.hpp"

namespace sdseq {

// Estimator variants. The AdaGRO family re-mixes per-round e-variables with
// predictable weights (adaptive grid + plug-in bets, first-order-only). Plain
// GRO splits the initial capital equally across the per-threshold plug-in
// games and lets each compound: its evidence is the fixed uniform mixture of
// the per-threshold wealth processes. Constant bets a fixed fraction with
// per-round uniform re-mixing; UP runs a universal portfolio per threshold
// and works for every order; SubExp runs per-threshold gamma-exponential
// mixture e-processes (2-SD/3-SD with two-sided unbounded data).
enum class Variant { AdaGroExp, AdaGroHedge, AdaGroLinear, Gro, Constant, Up, SubExp };

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::AdaGroExp: return "adagro-exp";
        case Variant::AdaGroHedge: return "adagro-hedge";
        case Variant::AdaGroLinear: return "adagro-linear";
        case Variant::Gro: return "gro";
        case Variant::Constant: return "constant";
        case Variant::Up: return "up";
        case Variant::SubExp: return "subexp";
    }
    return "?";
}

inline std::optional<Variant> parse_variant(const std::string& s) {
    for (Variant v : {Variant::AdaGroExp, Variant::AdaGroHedge, Variant::AdaGroLinear,
                      Variant::Gro, Variant::Constant, Variant::Up, Variant::SubExp})
        if (s == variant_name(v)) return v;
    return std::nullopt;
}

// How the active threshold grid evolves after the burn-in period.
enum class RefreshPolicy {
    Never,      // keep the initial grid
    EveryRound, // quantile grid rebuilt each round (GRO-family default)
    Geometric,  // rebuilt at burn_in, then whenever t grows by refresh_factor
};

struct GridConfig {
    // Initial grid: either an equidistant interval or a finite known support.
    double lo = 0.0;
    double hi = 1.0;
    int initial_count = 21;
    std::optional<std::vector<double>> finite_support;

    int quantile_k = 100;
    int burn_in = 50;
    RefreshPolicy refresh = RefreshPolicy::EveryRound;
    double refresh_factor = 2.0;
};

struct RunConfig {
    OrderSpec order = OrderSpec::fsd();
    Variant variant = Variant::AdaGroExp;
    WeightScheme weights{};          // defaulted from the variant; see normalized()
    bool weights_overridden = false; // set when the caller picked weights explicitly
    double alpha = 0.05;
    double constant_lambda = 0.1;    // bet for Variant::Constant
    BetParams cap{0.01};
    GridConfig grid{};
    UpConfig up{};
    std::optional<SubExpParams> subexp;
    int subexp_k = 2;

    // Fills in variant-implied defaults and validates variant/order
    // compatibility. Throws std::invalid_argument on an incompatible config.
    RunConfig normalized() const;
};

namespace detail {

inline WeightScheme default_weights(Variant v) {
    switch (v) {
        case Variant::AdaGroExp: return WeightScheme::exp_self_normalized();
        case Variant::AdaGroHedge: return WeightScheme::hedge();
        case Variant::AdaGroLinear: return WeightScheme::linear();
        case Variant::Up: return WeightScheme::exp_self_normalized();
        default: return WeightScheme::uniform();
    }
}

} // namespace detail

inline RunConfig RunConfig::normalized() const {
    RunConfig c = *this;
    if (!(c.alpha > 0.0 && c.alpha < 1.0))
        throw std::invalid_argument("config: alpha must lie in (0, 1)");
    if (!c.weights_overridden) {
        const double eta = c.weights.eta;
        const auto floor = c.weights.sd_floor;
        c.weights = detail::default_weights(c.variant);
        c.weights.eta = eta;
        c.weights.sd_floor = floor;
    }
    const bool gro_family = c.variant == Variant::AdaGroExp || c.variant == Variant::AdaGroHedge ||
                            c.variant == Variant::AdaGroLinear || c.variant == Variant::Gro;
    if (gro_family && !c.order.is_fsd())
        throw std::invalid_argument("config: the GRO plug-in bet is only defined for the fsd order");
    if (c.variant == Variant::SubExp) {
        const auto* ksd = std::get_if<KsdOrder>(&c.order.kind);
        if (ksd == nullptr || (ksd->k != 2 && ksd->k != 3))
            throw std::invalid_argument("config: subexp requires order ksd with k in {2, 3}");
        if (!c.subexp)
            throw std::invalid_argument("config: subexp variant needs declared (nu, c, rho)");
        c.subexp_k = ksd->k;
        // Mixing e-process *values* across a moving grid would break the
        // supermartingale property, so the grid and weights stay fixed.
        c.grid.refresh = RefreshPolicy::Never;
        c.weights = WeightScheme::uniform();
    }
    if (c.variant == Variant::Constant) {
        if (!(c.constant_lambda >= 0.0 && c.constant_lambda <= 1.0))
            throw std::invalid_argument("config: constant bet must lie in [0, 1]");
        c.grid.refresh = RefreshPolicy::Never;
    }
    if (c.variant == Variant::Gro) c.grid.refresh = RefreshPolicy::Never;
    if (c.order.is_laplace()) {
        // The index set of the Laplace order is not the data support, so
        // quantile adaptation is disabled; the fixed index grid is used with
        // the configured weight scheme.
        c.grid.refresh = RefreshPolicy::Never;
    }
    if (c.variant == Variant::Up && c.grid.refresh == RefreshPolicy::EveryRound) {
        // Re-deriving every UP posterior each round is O(K t n_grid); thin the
        // refresh schedule instead.
        c.grid.refresh = RefreshPolicy::Geometric;
    }
    if (c.grid.finite_support && c.grid.finite_support->empty())
        throw std::invalid_argument("config: empty finite support");
    return c;
}

// One streamed output record per round.
struct RoundRecord {
    std::int64_t t = 0;
    double log_e_value = 0.0;
    bool rejected = false;
    std::int64_t active_threshold_count = 0;
};

// The predictable part of a round: grid, weights, and bets, all measurable
// with respect to data through the previous round. Exposed separately so the
// predictability audit can diff plans across perturbed futures.
struct RoundPlan {
    std::vector<double> thresholds;
    std::vector<double> weights;
    std::vector<double> bets;
};

// Sequential tester: call plan_round() (optional) then observe(pair) once per
// round. Bets and weights for round t are computed from data through t-1,
// then the pair is ingested.
class StreamTester {
public:
    explicit StreamTester(const RunConfig& config)
        : cfg_(config.normalized()), alpha_(cfg_.alpha) {
        initial_grid_ = make_initial_grid();
        grid_ = initial_grid_;
        rebuild_threshold_state(true);
    }

    const RunConfig& config() const { return cfg_; }
    const EmpiricalState& state() const { return state_; }
    const EProcess& eprocess() const { return ep_; }
    bool rejected() const { return ville_reject(ep_, alpha_); }
    std::optional<std::int64_t> rejection_round() const { return ep_.first_crossing(alpha_); }

    RoundPlan plan_round() {
        maybe_refresh_grid();
        RoundPlan plan;
        plan.thresholds = active_;
        plan.bets = current_bets();
        plan.weights = current_weights(plan.bets);
        return plan;
    }

    RoundRecord observe(const ObservationPair& pair) {
        RoundPlan plan = plan_round();
        double log_e;
        if (cfg_.variant == Variant::SubExp) {
            // Per-threshold gamma-exponential mixtures are e-process levels,
            // not per-round factors; fold the new pair into the (s, v)
            // accumulators and mix the levels with the fixed weights.
            update_subexp_accumulators(pair);
            double mix = 0.0;
            for (std::size_t i = 0; i < active_.size(); ++i)
                mix += plan.weights[i] * gamma_exp_mixture(subexp_s_[i], subexp_v_[i], *cfg_.subexp);
            ep_.assign_log_wealth(std::log(std::max(mix, EProcess::kMinFactor)),
                                  state_.count() + 1);
            log_e = ep_.log_wealth();
        } else if (cfg_.variant == Variant::Gro) {
            // Fixed uniform mixture of per-threshold compounded wealths.
            for (std::size_t i = 0; i < active_.size(); ++i)
                gro_log_wealth_[i] +=
                    std::log(building_block_e(plan.bets[i], active_[i], pair));
            ep_.assign_log_wealth(log_mean_exp(gro_log_wealth_), state_.count() + 1);
            log_e = ep_.log_wealth();
        } else {
            double s = 0.0;
            for (std::size_t i = 0; i < active_.size(); ++i) {
                const double e = cfg_.order.is_fsd()
                                     ? building_block_e(plan.bets[i], active_[i], pair)
                                     : order_e_value(cfg_.order, plan.bets[i], active_[i], pair);
                s += plan.weights[i] * e;
            }
            if (active_.empty()) s = 1.0;
            ep_.step(s);
            log_e = ep_.log_wealth();
            if (cfg_.variant == Variant::Up)
                for (std::size_t i = 0; i < active_.size(); ++i)
                    up_states_[i].update(order_base_payoff(cfg_.order, active_[i], pair));
        }
        state_.ingest(pair);
        RoundRecord rec;
        rec.t = state_.count();
        rec.log_e_value = log_e;
        rec.rejected = rejected();
        rec.active_threshold_count = static_cast<std::int64_t>(active_.size());
        return rec;
    }

private:
    ThresholdGrid make_initial_grid() const {
        if (const auto* lap = std::get_if<LaplaceOrder>(&cfg_.order.kind)) {
            ThresholdGrid g;
            g.z = lap->index_grid;
            std::sort(g.z.begin(), g.z.end());
            g.provenance = GridProvenance::FixedEquidistant;
            return g;
        }
        if (cfg_.grid.finite_support)
            return finite_support_grid(*cfg_.grid.finite_support);
        return equidistant_grid(cfg_.grid.lo, cfg_.grid.hi, cfg_.grid.initial_count);
    }

    // Thresholds the e-variable can actually bet on: k-SD needs z > a, icx
    // needs z < b, and on a finite known support the top point is dropped
    // because its payoff is identically zero.
    std::vector<double> admissible(const ThresholdGrid& g) const {
        std::vector<double> out;
        out.reserve(g.z.size());
        for (double z : g.z) {
            if (const auto* ksd = std::get_if<KsdOrder>(&cfg_.order.kind)) {
                if (!(z > ksd->lower_a)) continue;
            } else if (const auto* icx = std::get_if<IcxOrder>(&cfg_.order.kind)) {
                if (!(z < icx->upper_b)) continue;
            }
            out.push_back(z);
        }
        if (g.provenance == GridProvenance::FiniteSupport && out.size() > 1 &&
            !out.empty() && out.back() == g.z.back())
            out.pop_back();
        return out;
    }

    void maybe_refresh_grid() {
        if (cfg_.grid.refresh == RefreshPolicy::Never) return;
        if (state_.count() < cfg_.grid.burn_in) return;
        if (cfg_.grid.refresh == RefreshPolicy::Geometric && state_.count() < next_refresh_) return;
        ThresholdGrid fresh =
            update_thresholds(state_, initial_grid_, cfg_.grid.quantile_k, cfg_.grid.burn_in);
        if (cfg_.grid.refresh == RefreshPolicy::Geometric)
            next_refresh_ = static_cast<std::int64_t>(
                std::ceil(static_cast<double>(std::max<std::int64_t>(state_.count(), 1)) *
                          cfg_.grid.refresh_factor));
        if (fresh.z == grid_.z) return;
        grid_ = std::move(fresh);
        rebuild_threshold_state(false);
    }

    void rebuild_threshold_state(bool initial) {
        active_ = admissible(grid_);
        if (cfg_.variant == Variant::Up) {
            up_states_.assign(active_.size(), UPState(cfg_.up));
            if (!initial && state_.count() > 0) {
                // Replay the payoff history for each threshold of the new grid.
                const auto& xs = state_.raw_x();
                const auto& ys = state_.raw_y();
                for (std::size_t i = 0; i < active_.size(); ++i) {
                    for (std::size_t l = 0; l < xs.size(); ++l) {
                        const ObservationPair p{xs[l], ys[l], static_cast<std::int64_t>(l + 1)};
                        up_states_[i].update(order_base_payoff(cfg_.order, active_[i], p));
                    }
                }
            }
        }
        if (cfg_.variant == Variant::SubExp) {
            subexp_s_.assign(active_.size(), 0.0);
            subexp_v_.assign(active_.size(), 0.0);
        }
        if (cfg_.variant == Variant::Gro) gro_log_wealth_.assign(active_.size(), 0.0);
        payoff_moments_dirty_ = true;
    }

    std::vector<double> current_bets() const {
        std::vector<double> bets(active_.size(), 0.0);
        switch (cfg_.variant) {
            case Variant::AdaGroExp:
            case Variant::AdaGroHedge:
            case Variant::AdaGroLinear:
            case Variant::Gro:
                for (std::size_t i = 0; i < active_.size(); ++i)
                    bets[i] = plugin_lambda(state_.pair_counts(active_[i]), cfg_.cap);
                break;
            case Variant::Constant:
                std::fill(bets.begin(), bets.end(), cfg_.constant_lambda);
                break;
            case Variant::Up:
                for (std::size_t i = 0; i < active_.size(); ++i) bets[i] = up_states_[i].bet();
                break;
            case Variant::SubExp:
                break;  // lambda is mixed out analytically
        }
        return bets;
    }

    std::vector<double> current_weights(std::span<const double> bets) {
        const std::size_t n = active_.size();
        if (n == 0) return {};
        const auto kind = cfg_.weights.kind;
        const bool needs_stats =
            kind == WeightKind::ExpSelfNormalized || kind == WeightKind::Hedge;
        const std::int64_t t = state_.count();
        if ((kind == WeightKind::ExpSelfNormalized && t < 2) ||
            (kind == WeightKind::Hedge && t < 1))
            return std::vector<double>(n, 1.0 / static_cast<double>(n));
        std::vector<double> diff(n, 0.0), sd(n, 1.0);
        if (needs_stats) compute_payoff_moments(diff, sd);
        return compute_weights_from_stats(cfg_.weights, diff, sd, bets, t);
    }

    // Mean and floored sd of the historical payoff u_z(y) - u_z(x) per active
    // threshold. For fsd this reduces to the CDF difference and the counter
    // formula; for other orders the raw history is folded once per refresh and
    // then updated incrementally.
    void compute_payoff_moments(std::vector<double>& diff, std::vector<double>& sd) {
        const std::size_t n = active_.size();
        diff.assign(n, 0.0);
        sd.assign(n, 1.0);
        const std::int64_t t = state_.count();
        if (cfg_.order.is_fsd()) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto counts = state_.pair_counts(active_[i]);
                diff[i] = static_cast<double>(counts.n_p - counts.n_q) / static_cast<double>(t);
                if (cfg_.weights.kind == WeightKind::ExpSelfNormalized)
                    sd[i] = sd_hat(counts, cfg_.weights.sd_floor);
            }
            return;
        }
        refresh_generic_moments();
        const double td = static_cast<double>(t);
        for (std::size_t i = 0; i < n; ++i) {
            const double mean = moment_sum_[i] / td;
            diff[i] = mean;
            const double var = std::max(moment_sumsq_[i] / td - mean * mean, 0.0);
            const double floor = cfg_.weights.sd_floor.value_or(1.0 / td);
            sd[i] = std::max(floor, std::sqrt(var / (td - 1.0)));
        }
    }

    void refresh_generic_moments() {
        if (!payoff_moments_dirty_ && moments_rounds_ == state_.count()) return;
        if (payoff_moments_dirty_ || moments_rounds_ > state_.count()) {
            moment_sum_.assign(active_.size(), 0.0);
            moment_sumsq_.assign(active_.size(), 0.0);
            moments_rounds_ = 0;
            payoff_moments_dirty_ = false;
        }
        const auto& xs = state_.raw_x();
        const auto& ys = state_.raw_y();
        for (std::int64_t l = moments_rounds_; l < state_.count(); ++l) {
            const ObservationPair p{xs[static_cast<std::size_t>(l)], ys[static_cast<std::size_t>(l)], l + 1};
            for (std::size_t i = 0; i < active_.size(); ++i) {
                const double d = order_base_payoff(cfg_.order, active_[i], p) - 1.0;
                moment_sum_[i] += d;
                moment_sumsq_[i] += d * d;
            }
        }
        moments_rounds_ = state_.count();
    }

    static double log_mean_exp(std::span<const double> logs) {
        if (logs.empty()) return 0.0;
        double m = logs[0];
        for (double v : logs) m = std::max(m, v);
        double acc = 0.0;
        for (double v : logs) acc += std::exp(v - m);
        return m + std::log(acc / static_cast<double>(logs.size()));
    }

    void update_subexp_accumulators(const ObservationPair& pair) {
        const double nu2 = cfg_.subexp->nu * cfg_.subexp->nu;
        for (std::size_t i = 0; i < active_.size(); ++i) {
            const double z = active_[i];
            const double px = std::max(z - pair.x, 0.0);
            const double py = std::max(z - pair.y, 0.0);
            const double delta = (cfg_.subexp_k == 2) ? (px - py) : (px * px - py * py);
            subexp_s_[i] += delta;
            subexp_v_[i] += nu2;
        }
    }

    RunConfig cfg_;
    SignificanceLevel alpha_;
    EmpiricalState state_;
    EProcess ep_;
    ThresholdGrid initial_grid_;
    ThresholdGrid grid_;
    std::vector<double> active_;
    std::vector<UPState> up_states_;
    std::vector<double> subexp_s_, subexp_v_;
    std::vector<double> gro_log_wealth_;
    std::vector<double> moment_sum_, moment_sumsq_;
    std::int64_t moments_rounds_ = 0;
    bool payoff_moments_dirty_ = true;
    std::int64_t next_refresh_ = 0;
};

// Bounded-history first-order tester: O(K + M) memory regardless of stream
// length. Keeps a size-M reservoir sample of the pairs for threshold refresh
// and seeds per-threshold counters from the reservoir (scaled to the true
// round count) whenever the grid changes; counters are exact between
// refreshes. The bets stay predictable, so the e-process guarantee is intact;
// only the bet quality is approximate. Plug-in/constant variants only.
class BoundedStreamTester {
public:
    BoundedStreamTester(const RunConfig& config, std::size_t reservoir_capacity,
                        std::uint64_t reservoir_seed = 0x5eed)
        : cfg_(config.normalized()),
          alpha_(cfg_.alpha),
          capacity_(reservoir_capacity),
          rng_(reservoir_seed) {
        if (!cfg_.order.is_fsd())
            throw std::invalid_argument("bounded-history mode supports the fsd order only");
        if (cfg_.variant == Variant::Up || cfg_.variant == Variant::SubExp)
            throw std::invalid_argument("bounded-history mode supports plug-in and constant bets only");
        if (capacity_ < 8)
            throw std::invalid_argument("bounded-history reservoir must hold at least 8 pairs");
        if (cfg_.grid.finite_support)
            grid_ = finite_support_grid(*cfg_.grid.finite_support).z;
        else
            grid_ = equidistant_grid(cfg_.grid.lo, cfg_.grid.hi, cfg_.grid.initial_count).z;
        counts_.assign(grid_.size(), ThresholdCounts{});
    }

    const EProcess& eprocess() const { return ep_; }
    bool rejected() const { return ville_reject(ep_, alpha_); }
    std::int64_t rounds() const { return t_; }

    RoundRecord observe(const ObservationPair& pair) {
        if (!std::isfinite(pair.x) || !std::isfinite(pair.y))
            throw std::invalid_argument("observe: non-finite observation");
        if (pair.t != t_ + 1) throw std::invalid_argument("observe: out-of-order round");
        maybe_refresh();
        std::vector<double> bets(grid_.size());
        for (std::size_t i = 0; i < grid_.size(); ++i)
            bets[i] = cfg_.variant == Variant::Constant ? cfg_.constant_lambda
                                                        : plugin_lambda(counts_[i], cfg_.cap);
        std::vector<double> diff(grid_.size()), sd(grid_.size(), 1.0);
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            const auto& c = counts_[i];
            const auto tt = std::max<std::int64_t>(c.t, 1);
            diff[i] = static_cast<double>(c.n_p - c.n_q) / static_cast<double>(tt);
            if (cfg_.weights.kind == WeightKind::ExpSelfNormalized && c.t >= 2)
                sd[i] = sd_hat(c, cfg_.weights.sd_floor);
        }
        if (cfg_.variant == Variant::Gro) {
            if (gro_log_wealth_.size() != grid_.size()) gro_log_wealth_.assign(grid_.size(), 0.0);
            double m = 0.0;
            for (std::size_t i = 0; i < grid_.size(); ++i) {
                gro_log_wealth_[i] +=
                    std::log(1.0 + bets[i] * static_cast<double>(payoff_d(pair, grid_[i])));
                m = std::max(m, gro_log_wealth_[i]);
            }
            double acc = 0.0;
            for (double v : gro_log_wealth_) acc += std::exp(v - m);
            ep_.assign_log_wealth(m + std::log(acc / static_cast<double>(grid_.size())), t_ + 1);
        } else {
            std::vector<double> w;
            if ((cfg_.weights.kind == WeightKind::ExpSelfNormalized && t_ < 2) ||
                (cfg_.weights.kind == WeightKind::Hedge && t_ < 1))
                w.assign(grid_.size(), 1.0 / static_cast<double>(grid_.size()));
            else
                w = compute_weights_from_stats(cfg_.weights, diff, sd, bets, t_);
            double s = 0.0;
            for (std::size_t i = 0; i < grid_.size(); ++i)
                s += w[i] * (1.0 + bets[i] * static_cast<double>(payoff_d(pair, grid_[i])));
            ep_.step(s);
        }
        ++t_;
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            const int d = payoff_d(pair, grid_[i]);
            if (d > 0) ++counts_[i].n_p;
            if (d < 0) ++counts_[i].n_q;
            ++counts_[i].t;
        }
        reservoir_insert(pair);
        RoundRecord rec;
        rec.t = t_;
        rec.log_e_value = ep_.log_wealth();
        rec.rejected = rejected();
        rec.active_threshold_count = static_cast<std::int64_t>(grid_.size());
        return rec;
    }

private:
    void reservoir_insert(const ObservationPair& pair) {
        if (reservoir_.size() < capacity_) {
            reservoir_.push_back({pair.x, pair.y});
            return;
        }
        const auto j = rng_.next_u64() % static_cast<std::uint64_t>(t_);
        if (j < capacity_) reservoir_[static_cast<std::size_t>(j)] = {pair.x, pair.y};
    }

    void maybe_refresh() {
        if (cfg_.grid.refresh == RefreshPolicy::Never) return;
        if (t_ < cfg_.grid.burn_in || t_ < next_refresh_) return;
        next_refresh_ = static_cast<std::int64_t>(
            std::ceil(static_cast<double>(std::max<std::int64_t>(t_, 1)) * cfg_.grid.refresh_factor));
        std::vector<double> pooled;
        pooled.reserve(reservoir_.size() * 2);
        for (const auto& p : reservoir_) {
            pooled.push_back(p.first);
            pooled.push_back(p.second);
        }
        std::sort(pooled.begin(), pooled.end());
        const int K = cfg_.grid.quantile_k;
        std::vector<double> fresh;
        for (int i = 0; i < K; ++i) {
            const double level = static_cast<double>(i) / static_cast<double>(K - 1);
            auto idx = level <= 0.0 ? 0
                                    : static_cast<std::size_t>(std::ceil(
                                          level * static_cast<double>(pooled.size()))) - 1;
            idx = std::min(idx, pooled.size() - 1);
            const double q = pooled[idx];
            if (fresh.empty() || q > fresh.back()) fresh.push_back(q);
        }
        if (fresh == grid_) return;
        grid_ = std::move(fresh);
        // Seed counters from the reservoir, scaled to the true round count.
        counts_.assign(grid_.size(), ThresholdCounts{});
        const double scale = static_cast<double>(t_) / static_cast<double>(reservoir_.size());
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            std::int64_t np = 0, nq = 0;
            for (const auto& p : reservoir_) {
                if (p.first <= grid_[i] && grid_[i] < p.second) ++np;
                if (p.second <= grid_[i] && grid_[i] < p.first) ++nq;
            }
            counts_[i].n_p = static_cast<std::int64_t>(std::llround(np * scale));
            counts_[i].n_q = static_cast<std::int64_t>(std::llround(nq * scale));
            counts_[i].t = t_;
        }
    }

    RunConfig cfg_;
    SignificanceLevel alpha_;
    std::size_t capacity_;
    SplitMix64 rng_;
    std::vector<std::pair<double, double>> reservoir_;
    std::vector<double> grid_;
    std::vector<ThresholdCounts> counts_;
    std::vector<double> gro_log_wealth_;
    EProcess ep_;
    std::int64_t t_ = 0;
    std::int64_t next_refresh_ = 0;
};

} // namespace sdseq
