// Minimal streaming example: monitor a paired stream for first-order
// dominance violations and stop at the first anytime-valid rejection.

#include <cstdio>

#include "sdseq/sdseq.hpp"

int main() {
    using namespace sdseq;

    RunConfig cfg;
    cfg.variant = Variant::AdaGroExp;
    cfg.order = OrderSpec::fsd();
    cfg.alpha = 0.05;
    cfg.grid.lo = -2.0;
    cfg.grid.hi = 2.0;

    StreamTester tester(cfg);

    // Y carries a small upside over X: the null "Y is dominated by X" is false.
    SplitMix64 rng(7);
    for (std::int64_t t = 1; t <= 5000; ++t) {
        const double x = rng.next_gaussian();
        const double y = 0.25 + 1.2 * rng.next_gaussian();
        const auto rec = tester.observe({x, y, t});
        if (t % 250 == 0)
            std::printf("t=%5lld  log E_t = %8.3f  thresholds=%lld%s\n",
                        static_cast<long long>(rec.t), rec.log_e_value,
                        static_cast<long long>(rec.active_threshold_count),
                        rec.rejected ? "  [rejected]" : "");
        if (rec.rejected) {
            std::printf("dominance violation detected at round %lld (alpha = %.2f)\n",
                        static_cast<long long>(*tester.rejection_round()), cfg.alpha);
            return 0;
        }
    }
    std::printf("no rejection within the horizon\n");
    return 0;
}
