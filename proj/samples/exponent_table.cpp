// Tabulates the theoretical decay exponent beta(p) against a log-log fit of
// the computed series, mirroring the classic scaling figure. The fit uses
// magnitudes so probabilities past the positivity threshold work too.

#include <cstdio>

#include <expmod/correlation.hpp>
#include <expmod/scaling.hpp>

int main() {
    using namespace expmod;
    const long long n_max = 2000;
    const long long n_lo = 100;

    std::printf("%-6s %12s %12s %10s\n", "p", "beta", "fit", "residual");
    for (int i = 1; i <= 9; ++i) {
        char text[8];
        std::snprintf(text, sizeof text, "0.%02d", 5 * i);
        auto p = parse_probability(text);
        auto series = correlation_series(p, n_max);
        auto fit = fit_power_law_magnitude(series.values, n_lo, n_max);
        auto beta = beta_exponent(p.as_double());
        std::printf("%-6s %12.6f %12.6f %10.6f\n", text, beta.value, -fit.slope, fit.residual);
    }
    return 0;
}
