#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "sdseq/simlab.hpp"

using namespace sdseq;
using namespace sdseq::simlab;

TEST_CASE("anticorr support is exactly the two designed pairs") {
    ScenarioSpec spec;
    spec.dgp = AnticorrDiscrete{};
    SplitMix64 rng(1);
    int first = 0;
    for (std::int64_t t = 1; t <= 4000; ++t) {
        const auto p = sample_pair(spec, rng, t);
        const bool a = (p.x == 0.0 && p.y == 1.0);
        const bool b = (p.x == 2.0 / 3.0 && p.y == 1.0 / 3.0);
        REQUIRE((a || b));
        if (a) ++first;
    }
    CHECK(first > 1800);
    CHECK(first < 2200);
}

TEST_CASE("anticorr sample correlation approaches -1") {
    ScenarioSpec spec;
    spec.dgp = AnticorrDiscrete{};
    SplitMix64 rng(2);
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    const int n = 20000;
    for (int t = 1; t <= n; ++t) {
        const auto p = sample_pair(spec, rng, t);
        sx += p.x; sy += p.y; sxx += p.x * p.x; syy += p.y * p.y; sxy += p.x * p.y;
    }
    const double cov = sxy / n - (sx / n) * (sy / n);
    const double corr = cov / std::sqrt((sxx / n - (sx / n) * (sx / n)) * (syy / n - (sy / n) * (sy / n)));
    CHECK_THAT(corr, Catch::Matchers::WithinAbs(-1.0, 1e-9));
}

TEST_CASE("bivariate gaussian hits the requested correlation") {
    ScenarioSpec spec;
    spec.dgp = BivariateGaussian{0.0, 1.0, 0.0, 1.0, -0.9};
    SplitMix64 rng(3);
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    const int n = 100000;
    for (int t = 1; t <= n; ++t) {
        const auto p = sample_pair(spec, rng, t);
        sx += p.x; sy += p.y; sxx += p.x * p.x; syy += p.y * p.y; sxy += p.x * p.y;
    }
    const double cov = sxy / n - (sx / n) * (sy / n);
    const double corr = cov / std::sqrt((sxx / n - (sx / n) * (sx / n)) * (syy / n - (sy / n) * (sy / n)));
    CHECK_THAT(corr, Catch::Matchers::WithinAbs(-0.9, 0.01));
}

TEST_CASE("kinked-uniform CDF values by substitution") {
    // F_X(0) = (1-c0) z0, F_X(z0) = z0, then identity.
    CHECK_THAT(kinked_inverse_cdf(0.2, 0.5, 0.5), Catch::Matchers::WithinAbs(0.0, 1e-15));
    const double z0 = 0.5, c0 = 0.5;
    auto cdf = [&](double z) { return z <= z0 ? c0 * z + (1 - c0) * z0 : z; };
    CHECK_THAT(cdf(0.0), Catch::Matchers::WithinAbs(0.25, 1e-15));
    CHECK_THAT(cdf(0.5), Catch::Matchers::WithinAbs(0.5, 1e-15));
    CHECK_THAT(cdf(0.75), Catch::Matchers::WithinAbs(0.75, 1e-15));
    // Inverse transform is a left inverse of the CDF away from the atom.
    for (double u : {0.3, 0.4, 0.5, 0.7, 0.9}) {
        const double x = kinked_inverse_cdf(u, z0, c0);
        CHECK_THAT(cdf(x), Catch::Matchers::WithinAbs(u, 1e-12));
    }
}

TEST_CASE("kinked-uniform ECDF converges to the designed CDF") {
    ScenarioSpec spec;
    spec.dgp = KinkedUniform{0.2, 0.5, Coupling::Independent};
    SplitMix64 rng(4);
    const int n = 10000;
    std::vector<double> xs;
    xs.reserve(n);
    for (int t = 1; t <= n; ++t) xs.push_back(sample_pair(spec, rng, t).x);
    std::sort(xs.begin(), xs.end());
    auto cdf = [](double z) { return z <= 0.2 ? 0.5 * z + 0.1 : z; };
    // Left limit: the designed CDF has an atom of mass 0.1 at zero.
    auto cdf_left = [&](double z) { return z <= 0.0 ? 0.0 : cdf(z); };
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = xs[static_cast<std::size_t>(i)];
        const bool last_of_run = (i + 1 == n) || xs[static_cast<std::size_t>(i + 1)] > x;
        const bool first_of_run = (i == 0) || xs[static_cast<std::size_t>(i - 1)] < x;
        if (last_of_run)
            ks = std::max(ks, std::abs(static_cast<double>(i + 1) / n - cdf(x)));
        if (first_of_run)
            ks = std::max(ks, std::abs(static_cast<double>(i) / n - cdf_left(x)));
    }
    CHECK(ks <= 0.02);
}

TEST_CASE("couplings behave as configured") {
    SplitMix64 rng(5);
    ScenarioSpec como;
    como.dgp = KinkedUniform{0.2, 0.5, Coupling::Comonotone};
    for (int t = 1; t <= 500; ++t) {
        const auto p = sample_pair(como, rng, t);
        REQUIRE(p.x <= p.y + 1e-12);  // F_X >= F_Y pointwise makes X <= Y under comonotone coupling
    }
    ScenarioSpec anti;
    anti.dgp = KinkedUniform{0.0, 0.5, Coupling::Antimonotone};
    double sxy = 0, sx = 0, sy = 0, sxx = 0, syy = 0;
    const int n = 20000;
    for (int t = 1; t <= n; ++t) {
        const auto p = sample_pair(anti, rng, t);
        sx += p.x; sy += p.y; sxx += p.x * p.x; syy += p.y * p.y; sxy += p.x * p.y;
    }
    const double corr = (sxy / n - sx / n * sy / n) /
                        std::sqrt((sxx / n - sx / n * sx / n) * (syy / n - sy / n * sy / n));
    CHECK(corr < -0.99);
}

TEST_CASE("scenario validation") {
    ScenarioSpec bad;
    bad.replications = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    ScenarioSpec badrho;
    badrho.dgp = BivariateGaussian{0, 1, 0, 1, -1.5};
    CHECK_THROWS_AS(badrho.validate(), std::invalid_argument);
    ScenarioSpec badkink;
    badkink.dgp = KinkedUniform{1.5, 0.5, Coupling::Independent};
    CHECK_THROWS_AS(badkink.validate(), std::invalid_argument);
}

static RunConfig gaussian_config(Variant v) {
    RunConfig c;
    c.variant = v;
    c.grid.lo = -1.5;
    c.grid.hi = 1.5;
    return c;
}

TEST_CASE("replications are deterministic given the seed") {
    ScenarioSpec spec;
    spec.dgp = BivariateGaussian{0, 1, 0, 1, -0.9};
    spec.horizon = 120;
    spec.seed = 42;
    const auto a = run_replication(spec, gaussian_config(Variant::AdaGroExp), 7);
    const auto b = run_replication(spec, gaussian_config(Variant::AdaGroExp), 7);
    REQUIRE(a.log_e == b.log_e);
    const auto c = run_replication(spec, gaussian_config(Variant::AdaGroExp), 8);
    REQUIRE(a.log_e != c.log_e);
}

TEST_CASE("trace exists and starts from the first-round factor") {
    ScenarioSpec spec;
    spec.dgp = BivariateGaussian{0, 1, 0, 1, -0.9};
    spec.horizon = 10;
    const auto tr = run_replication(spec, gaussian_config(Variant::Gro), 0);
    REQUIRE(tr.log_e.size() == 10);
    // Round 1 has no history, so every plug-in bet is zero and E_1 = 1.
    CHECK_THAT(tr.log_e.front(), Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("metrics aggregation") {
    Trace never;
    never.log_e = {0.0, 0.1, 0.2};
    Trace always;
    always.log_e = {5.0, 5.0, 5.0};
    const SignificanceLevel alpha(0.05);

    const auto m0 = aggregate_metrics({never}, alpha);
    CHECK(m0.ville_error == std::vector<double>{0.0, 0.0, 0.0});

    const auto m1 = aggregate_metrics({always}, alpha);
    CHECK(m1.ville_error == std::vector<double>{1.0, 1.0, 1.0});
    REQUIRE(m1.rejection_times == std::vector<std::int64_t>{1});

    Trace flat;
    flat.log_e = {0.0, 0.0, 0.0};
    const auto m2 = aggregate_metrics({flat, flat}, alpha);
    CHECK(m2.e_power == std::vector<double>{0.0, 0.0, 0.0});

    CHECK_THROWS_AS(aggregate_metrics({}, alpha), std::invalid_argument);
}

TEST_CASE("ville error is nondecreasing in t") {
    ScenarioSpec spec;
    spec.dgp = AnticorrDiscrete{};
    spec.horizon = 150;
    spec.replications = 40;
    RunConfig cfg;
    cfg.variant = Variant::Gro;
    cfg.grid.finite_support = std::vector<double>{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
    const auto traces = run_scenario(spec, cfg, 2);
    const auto m = aggregate_metrics(traces, SignificanceLevel(0.05));
    for (std::size_t t = 1; t < m.ville_error.size(); ++t)
        REQUIRE(m.ville_error[t] >= m.ville_error[t - 1]);
}

TEST_CASE("parallel and serial scenario runs agree") {
    ScenarioSpec spec;
    spec.dgp = BivariateGaussian{0, 1, 0.25, 1.5, -0.9};
    spec.horizon = 80;
    spec.replications = 12;
    const auto serial = run_scenario(spec, gaussian_config(Variant::AdaGroExp), 1);
    const auto parallel = run_scenario(spec, gaussian_config(Variant::AdaGroExp), 4);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t r = 0; r < serial.size(); ++r) REQUIRE(serial[r].log_e == parallel[r].log_e);
}

TEST_CASE("csv and jsonl emission") {
    Trace tr;
    tr.log_e = {0.0, 4.0};
    tr.rejection_time = 2;
    const auto m = aggregate_metrics({tr}, SignificanceLevel(0.05));
    std::ostringstream csv;
    write_metrics_csv(csv, {{"gro", m}});
    CHECK(csv.str().rfind("t,ville_error_gro,e_power_gro\n", 0) == 0);
    CHECK(csv.str().find("\n2,1,4\n") != std::string::npos);

    std::ostringstream jsonl;
    write_rejections_jsonl(jsonl, "anticorr", "gro", 0.05, {tr});
    CHECK(jsonl.str() ==
          "{\"scenario\":\"anticorr\",\"variant\":\"gro\",\"replication\":0,\"alpha\":0.05,"
          "\"rejection_time\":2}\n");
}
