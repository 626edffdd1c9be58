// Minimal library use: a small dam break in fixed point, run forward,
// reversed, run back, and compared bit for bit with the start.

#include <rsph/rsph.hpp>

#include <fmt/core.h>

int main() {
    using namespace rsph;
    ScenarioConfig cfg;
    cfg.dr = 0.04;
    cfg.end_time = 0.4;
    cfg.reverse_at = 0.2;
    const bench::ScenarioOutcome o = bench::run_scenario(cfg);
    fmt::print("{} particles, {}\n", o.particles, o.reversal ? o.reversal->summary() : o.divergence);
    return o.reversal && o.reversal->bitwise_equal ? 0 : 1;
}
