#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "sdseq/core.hpp"
#include "sdseq/engine.hpp"
#include "sdseq/rng.hpp"

namespace sdseq::simlab {

// ---------------------------------------------------------------------------
// Data-generating processes
// ---------------------------------------------------------------------------

// Finite-support pair with maximal anti-monotonicity:
// (X, Y) = (0, 1) or (2/3, 1/3), each with probability 1/2.
struct AnticorrDiscrete {};

struct BivariateGaussian {
    double mu_x = 0.0, sd_x = 1.0;
    double mu_y = 0.0, sd_y = 1.0;
    double rho = -0.9;
};

enum class Coupling { Independent, Comonotone, Antimonotone };

// X follows the kinked piecewise-uniform CDF
//   F_X(z) = c0 * z + (1 - c0) * z0   on [0, z0],   F_X(z) = z on (z0, 1],
// (an atom of mass (1 - c0) * z0 at zero), Y ~ Uniform[0, 1].
struct KinkedUniform {
    double z0 = 0.2;
    double c0 = 0.5;
    Coupling coupling = Coupling::Independent;
};

struct ScenarioSpec {
    std::variant<AnticorrDiscrete, BivariateGaussian, KinkedUniform> dgp = AnticorrDiscrete{};
    std::int64_t horizon = 1000;
    std::int64_t replications = 100;
    std::uint64_t seed = 1;
    std::string name = "anticorr";

    void validate() const {
        if (horizon < 1) throw std::invalid_argument("scenario: horizon must be >= 1");
        if (replications < 1) throw std::invalid_argument("scenario: replications must be >= 1");
        if (const auto* g = std::get_if<BivariateGaussian>(&dgp)) {
            if (!(g->sd_x > 0.0 && g->sd_y > 0.0))
                throw std::invalid_argument("scenario: gaussian sds must be positive");
            if (!(g->rho >= -1.0 && g->rho <= 1.0))
                throw std::invalid_argument("scenario: rho outside [-1, 1]");
        }
        if (const auto* k = std::get_if<KinkedUniform>(&dgp)) {
            if (!(k->z0 >= 0.0 && k->z0 <= 1.0))
                throw std::invalid_argument("scenario: z0 outside [0, 1]");
            if (!(k->c0 > 0.0 && k->c0 < 1.0))
                throw std::invalid_argument("scenario: c0 outside (0, 1)");
        }
    }
};

inline double kinked_inverse_cdf(double u, double z0, double c0) {
    const double atom = (1.0 - c0) * z0;
    if (u <= atom) return 0.0;
    if (u <= z0) return (u - atom) / c0;
    return u;
}

inline ObservationPair sample_pair(const ScenarioSpec& spec, SplitMix64& rng, std::int64_t t) {
    return std::visit(
        [&](const auto& dgp) -> ObservationPair {
            using T = std::decay_t<decltype(dgp)>;
            if constexpr (std::is_same_v<T, AnticorrDiscrete>) {
                const bool heads = (rng.next_u64() >> 63) != 0;
                return heads ? ObservationPair{0.0, 1.0, t}
                             : ObservationPair{2.0 / 3.0, 1.0 / 3.0, t};
            } else if constexpr (std::is_same_v<T, BivariateGaussian>) {
                double z1, z2;
                rng.next_gaussian_pair(z1, z2);
                const double x = dgp.mu_x + dgp.sd_x * z1;
                const double y =
                    dgp.mu_y + dgp.sd_y * (dgp.rho * z1 + std::sqrt(1.0 - dgp.rho * dgp.rho) * z2);
                return ObservationPair{x, y, t};
            } else {
                const double u = rng.next_unit_co();
                const double x = kinked_inverse_cdf(u, dgp.z0, dgp.c0);
                double uy;
                switch (dgp.coupling) {
                    case Coupling::Independent: uy = rng.next_unit_co(); break;
                    case Coupling::Comonotone: uy = u; break;
                    case Coupling::Antimonotone: uy = 1.0 - u; break;
                    default: uy = u; break;
                }
                return ObservationPair{x, uy, t};
            }
        },
        spec.dgp);
}

// ---------------------------------------------------------------------------
// Replication runner and metrics
// ---------------------------------------------------------------------------

struct Trace {
    std::vector<double> log_e;                  // log E_t, t = 1..T
    std::optional<std::int64_t> rejection_time; // first Ville crossing at config alpha
};

// Runs one replication: bet-then-ingest each round, deterministic given
// (spec.seed, replication index).
inline Trace run_replication(const ScenarioSpec& spec, const RunConfig& config,
                             std::int64_t replication_index) {
    spec.validate();
    SplitMix64 rng(derive_stream_seed(spec.seed, static_cast<std::uint64_t>(replication_index)));
    StreamTester tester(config);
    Trace trace;
    trace.log_e.reserve(static_cast<std::size_t>(spec.horizon));
    for (std::int64_t t = 1; t <= spec.horizon; ++t) {
        const auto rec = tester.observe(sample_pair(spec, rng, t));
        trace.log_e.push_back(rec.log_e_value);
    }
    trace.rejection_time = tester.rejection_round();
    return trace;
}

struct TrajectoryMetrics {
    std::vector<double> e_power;       // mean log E_t across replications
    std::vector<double> ville_error;   // fraction of replications rejected by t
    std::vector<std::int64_t> rejection_times;  // crossing rounds of rejected replications
    std::int64_t replications = 0;

    double max_ville_error() const {
        return ville_error.empty() ? 0.0
                                   : *std::max_element(ville_error.begin(), ville_error.end());
    }
};

inline TrajectoryMetrics aggregate_metrics(const std::vector<Trace>& traces,
                                           const SignificanceLevel& alpha) {
    if (traces.empty()) throw std::invalid_argument("aggregate_metrics: no traces");
    const std::size_t T = traces.front().log_e.size();
    TrajectoryMetrics m;
    m.replications = static_cast<std::int64_t>(traces.size());
    m.e_power.assign(T, 0.0);
    m.ville_error.assign(T, 0.0);
    const double thr = alpha.log_threshold();
    for (const auto& tr : traces) {
        if (tr.log_e.size() != T)
            throw std::invalid_argument("aggregate_metrics: trace length mismatch");
        double run_max = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            m.e_power[t] += tr.log_e[t];
            run_max = std::max(run_max, tr.log_e[t]);
            if (run_max >= thr) m.ville_error[t] += 1.0;
        }
        double rm = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            rm = std::max(rm, tr.log_e[t]);
            if (rm >= thr) {
                m.rejection_times.push_back(static_cast<std::int64_t>(t + 1));
                break;
            }
        }
    }
    const double n = static_cast<double>(traces.size());
    for (std::size_t t = 0; t < T; ++t) {
        m.e_power[t] /= n;
        m.ville_error[t] /= n;
    }
    return m;
}

// Runs all replications of a scenario under one estimator config, in parallel
// across replications. Deterministic: replication r always uses stream r.
inline std::vector<Trace> run_scenario(const ScenarioSpec& spec, const RunConfig& config,
                                       unsigned threads = std::thread::hardware_concurrency()) {
    spec.validate();
    const auto R = static_cast<std::size_t>(spec.replications);
    std::vector<Trace> traces(R);
    if (threads <= 1 || R == 1) {
        for (std::size_t r = 0; r < R; ++r)
            traces[r] = run_replication(spec, config, static_cast<std::int64_t>(r));
        return traces;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t r = next.fetch_add(1);
            if (r >= R) return;
            traces[r] = run_replication(spec, config, static_cast<std::int64_t>(r));
        }
    };
    std::vector<std::thread> pool;
    const unsigned n_workers = std::min<unsigned>(threads, static_cast<unsigned>(R));
    pool.reserve(n_workers);
    for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return traces;
}

// ---------------------------------------------------------------------------
// File emission (formats documented in docs/formats.md)
// ---------------------------------------------------------------------------

struct VariantMetrics {
    std::string variant;
    TrajectoryMetrics metrics;
};

inline void write_metrics_csv(std::ostream& os, const std::vector<VariantMetrics>& per_variant) {
    if (per_variant.empty()) throw std::invalid_argument("write_metrics_csv: nothing to write");
    os << "t";
    for (const auto& vm : per_variant)
        os << ",ville_error_" << vm.variant << ",e_power_" << vm.variant;
    os << "\n";
    const std::size_t T = per_variant.front().metrics.e_power.size();
    for (std::size_t t = 0; t < T; ++t) {
        os << (t + 1);
        for (const auto& vm : per_variant) {
            os << ',' << vm.metrics.ville_error[t] << ',' << vm.metrics.e_power[t];
        }
        os << "\n";
    }
}

inline void write_rejections_jsonl(std::ostream& os, const std::string& scenario,
                                   const std::string& variant, double alpha,
                                   const std::vector<Trace>& traces) {
    for (std::size_t r = 0; r < traces.size(); ++r) {
        os << "{\"scenario\":\"" << scenario << "\",\"variant\":\"" << variant
           << "\",\"replication\":" << r << ",\"alpha\":" << alpha << ",\"rejection_time\":";
        if (traces[r].rejection_time)
            os << *traces[r].rejection_time;
        else
            os << "null";
        os << "}\n";
    }
}

} // namespace sdseq::simlab
