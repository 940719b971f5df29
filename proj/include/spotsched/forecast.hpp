#ifndef SPOTSCHED_FORECAST_HPP
#define SPOTSCHED_FORECAST_HPP

#include <cstdint>
#include <vector>

#include "spotsched/market.hpp"

namespace spotsched {

// Window of predicted market conditions. Entry 0 is always the observed
// current slot; entries 1..horizon are predictions for slots t+1..t+horizon.
struct Forecast {
    int origin_slot = 0;
    int horizon = 0;
    std::vector<double> price_pred;  // horizon+1 entries, each >= 0
    std::vector<int> avail_pred;     // horizon+1 entries, each >= 0

    double price_at(int tau) const { return price_pred[static_cast<std::size_t>(tau)]; }
    int avail_at(int tau) const { return avail_pred[static_cast<std::size_t>(tau)]; }
};

enum class MagnitudeMode { MagnitudeDependent, FixedMagnitude };
enum class NoiseDistribution { Uniform, HeavyTail };

// Controlled prediction error. `level` is the relative error fraction;
// with the heavy-tailed law, 80% of the central mass stays within +-level.
struct NoiseSpec {
    MagnitudeMode magnitude_mode = MagnitudeMode::MagnitudeDependent;
    NoiseDistribution distribution = NoiseDistribution::Uniform;
    double level = 0.0;
    std::uint64_t seed = 0;
};

// Fits AR(order) coefficients by least squares on the price and availability
// series up to slot t (later history is ignored), then iterates the
// recurrence `horizon` steps forward. Throws InsufficientHistoryError when
// fewer than max(order+1, 2) slots are available; callers should fall back
// to a persistence forecast.
Forecast predict_ar(const SpotTrace& history, int t, int horizon, int order = 4);

// Perturbs the true future with seeded noise; deterministic per
// (seed, t, tau). Entry 0 is the unperturbed present.
Forecast predict_noisy_oracle(const SpotTrace& truth, int t, int horizon,
                              const NoiseSpec& noise);

// Repeats the observed slot-t values across the window.
Forecast persistence_forecast(const SpotTrace& trace, int t, int horizon);

// 0.9 quantile of the Student-t distribution with 3 degrees of freedom,
// the scale normalizer of the heavy-tailed noise law.
double student_t3_quantile90();

}  // namespace spotsched

#endif
