#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "spotsched/common.hpp"
#include "spotsched/forecast.hpp"
#include "spotsched/market.hpp"

using namespace spotsched;

namespace {

SpotTrace constant_trace(int n, double price, int avail) {
    SpotTrace t;
    for (int i = 0; i < n; ++i) t.slots.push_back({i, price, avail});
    return t;
}

// Hand oracle for the AR(2) fit of a series: solves the 2x2 normal
// equations by Cramer's rule and iterates the recurrence.
std::vector<double> ar2_oracle(const std::vector<double>& y, int steps) {
    double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
    for (std::size_t i = 2; i < y.size(); ++i) {
        double x1 = y[i - 1], x2 = y[i - 2];
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        b1 += x1 * y[i];
        b2 += x2 * y[i];
    }
    double det = s11 * s22 - s12 * s12;
    double a1 = (b1 * s22 - b2 * s12) / det;
    double a2 = (s11 * b2 - s12 * b1) / det;
    std::vector<double> tail = {y[y.size() - 2], y.back()};
    std::vector<double> out;
    for (int s = 0; s < steps; ++s) {
        double next = a1 * tail.back() + a2 * tail[tail.size() - 2];
        out.push_back(next);
        tail.push_back(next);
    }
    return out;
}

}  // namespace

TEST_CASE("ar prediction of a constant series is the constant") {
    SpotTrace history = constant_trace(20, 0.5, 6);
    for (int order : {1, 2, 4}) {
        Forecast f = predict_ar(history, 19, 4, order);
        REQUIRE(f.price_pred.size() == 5);
        for (int tau = 0; tau <= 4; ++tau) {
            CHECK(f.price_at(tau) == doctest::Approx(0.5).epsilon(1e-9));
            CHECK(f.avail_at(tau) == 6);
        }
    }
}

TEST_CASE("ar prediction with horizon zero returns the observed slot") {
    SpotTrace history = constant_trace(10, 0.7, 3);
    Forecast f = predict_ar(history, 9, 0, 4);
    REQUIRE(f.horizon == 0);
    CHECK(f.price_at(0) == 0.7);
    CHECK(f.avail_at(0) == 3);
}

TEST_CASE("ar(2) extrapolates a linear availability ramp") {
    SpotTrace history;
    std::vector<double> series;
    for (int i = 0; i < 20; ++i) {
        history.slots.push_back({i, 0.5, i + 1});
        series.push_back(i + 1.0);
    }
    Forecast f = predict_ar(history, 19, 3, 2);
    CHECK(f.avail_at(1) == 21);
    CHECK(f.avail_at(2) == 22);
    CHECK(f.avail_at(3) == 23);

    std::vector<double> oracle = ar2_oracle(series, 3);
    CHECK(oracle[0] == doctest::Approx(21.0));
    CHECK(oracle[1] == doctest::Approx(22.0));
    CHECK(oracle[2] == doctest::Approx(23.0));
}

TEST_CASE("ar prediction demands enough history") {
    SpotTrace history = constant_trace(4, 0.5, 6);
    CHECK_THROWS_AS(predict_ar(history, 3, 2, 4), InsufficientHistoryError);
    CHECK_NOTHROW(predict_ar(history, 3, 2, 3));
}

TEST_CASE("ar prediction ignores history after the origin slot") {
    SpotTrace history = constant_trace(20, 0.5, 6);
    // Future garbage must not leak into the fit.
    for (int i = 12; i < 20; ++i) {
        history.slots[static_cast<std::size_t>(i)].spot_price = 40.0;
        history.slots[static_cast<std::size_t>(i)].spot_avail = 0;
    }
    Forecast f = predict_ar(history, 11, 3, 2);
    for (int tau = 0; tau <= 3; ++tau) CHECK(f.price_at(tau) == doctest::Approx(0.5));
}

TEST_CASE("noisy oracle with zero level reproduces the truth") {
    TraceSynthSpec spec;
    spec.length = 64;
    spec.base_avail = 6;
    spec.avail_amplitude = 3;
    spec.base_price = 0.6;
    spec.price_amplitude = 0.2;
    spec.jitter = 0.2;
    spec.seed = 5;
    SpotTrace truth = synthesize_trace(spec);

    NoiseSpec noise{MagnitudeMode::MagnitudeDependent, NoiseDistribution::Uniform, 0.0, 11};
    Forecast f = predict_noisy_oracle(truth, 10, 5, noise);
    for (int tau = 0; tau <= 5; ++tau) {
        CHECK(f.price_at(tau) == truth.at(10 + tau).spot_price);
        CHECK(f.avail_at(tau) == truth.at(10 + tau).spot_avail);
    }
}

TEST_CASE("noisy oracle is deterministic and leaves the present unperturbed") {
    SpotTrace truth = constant_trace(32, 0.6, 8);
    NoiseSpec noise{MagnitudeMode::FixedMagnitude, NoiseDistribution::HeavyTail, 0.4, 77};
    Forecast a = predict_noisy_oracle(truth, 4, 6, noise);
    Forecast b = predict_noisy_oracle(truth, 4, 6, noise);
    CHECK(a.price_at(0) == 0.6);
    CHECK(a.avail_at(0) == 8);
    for (int tau = 0; tau <= 6; ++tau) {
        CHECK(a.price_at(tau) == b.price_at(tau));
        CHECK(a.avail_at(tau) == b.avail_at(tau));
    }
}

TEST_CASE("noisy oracle rejects windows past the trace end") {
    SpotTrace truth = constant_trace(10, 0.6, 8);
    NoiseSpec noise{MagnitudeMode::MagnitudeDependent, NoiseDistribution::Uniform, 0.1, 1};
    CHECK_THROWS_AS(predict_noisy_oracle(truth, 6, 4, noise), std::out_of_range);
}

TEST_CASE("uniform noise stays inside its analytic support") {
    SpotTrace truth = constant_trace(8, 0.6, 10);
    const double mean_price = truth.mean_price();

    SUBCASE("magnitude dependent") {
        for (int s = 0; s < 10000; ++s) {
            NoiseSpec noise{MagnitudeMode::MagnitudeDependent, NoiseDistribution::Uniform,
                            0.1, static_cast<std::uint64_t>(s)};
            Forecast f = predict_noisy_oracle(truth, 0, 1, noise);
            CHECK(f.price_at(1) >= 0.54);
            CHECK(f.price_at(1) <= 0.66);
        }
    }
    SUBCASE("fixed magnitude") {
        // Support is truth +- level * series mean.
        for (int s = 0; s < 10000; ++s) {
            NoiseSpec noise{MagnitudeMode::FixedMagnitude, NoiseDistribution::Uniform, 0.1,
                            static_cast<std::uint64_t>(s)};
            Forecast f = predict_noisy_oracle(truth, 0, 1, noise);
            CHECK(f.price_at(1) >= 0.6 - 0.1 * mean_price - 1e-12);
            CHECK(f.price_at(1) <= 0.6 + 0.1 * mean_price + 1e-12);
        }
    }
}

TEST_CASE("fixed magnitude noise shifts around a different base value") {
    SpotTrace truth = constant_trace(8, 0.6, 10);
    truth.slots[1].spot_price = 0.2;
    const double mean = truth.mean_price();
    for (int s = 0; s < 2000; ++s) {
        NoiseSpec noise{MagnitudeMode::FixedMagnitude, NoiseDistribution::Uniform, 0.1,
                        static_cast<std::uint64_t>(s)};
        Forecast f = predict_noisy_oracle(truth, 0, 1, noise);
        CHECK(f.price_at(1) >= 0.2 - 0.1 * mean - 1e-12);
        CHECK(f.price_at(1) <= 0.2 + 0.1 * mean + 1e-12);
    }
}

TEST_CASE("noise is unbiased across seeds") {
    SpotTrace truth = constant_trace(4, 1.0, 10);
    const int samples = 100000;

    for (auto mode : {MagnitudeMode::MagnitudeDependent, MagnitudeMode::FixedMagnitude}) {
        for (auto dist : {NoiseDistribution::Uniform, NoiseDistribution::HeavyTail}) {
            double sum = 0.0, sum_sq = 0.0;
            for (int s = 0; s < samples; ++s) {
                NoiseSpec noise{mode, dist, 0.2, static_cast<std::uint64_t>(s)};
                Forecast f = predict_noisy_oracle(truth, 0, 1, noise);
                double err = f.price_at(1) - 1.0;
                sum += err;
                sum_sq += err * err;
            }
            double mean = sum / samples;
            double sd = std::sqrt((sum_sq - samples * mean * mean) / (samples - 1));
            double se = sd / std::sqrt(static_cast<double>(samples));
            CHECK(std::abs(mean) < 3.0 * se);
        }
    }
}

TEST_CASE("mean absolute error is nondecreasing in the noise level") {
    TraceSynthSpec spec;
    spec.length = 64;
    spec.base_price = 0.7;
    spec.price_amplitude = 0.2;
    spec.base_avail = 8;
    spec.avail_amplitude = 3;
    spec.jitter = 0.1;
    spec.seed = 9;
    SpotTrace truth = synthesize_trace(spec);

    std::vector<double> levels = {0.0, 0.1, 0.3, 0.5};
    std::vector<double> mae;
    for (double level : levels) {
        double total = 0.0;
        int count = 0;
        for (int s = 0; s < 2000; ++s) {
            NoiseSpec noise{MagnitudeMode::MagnitudeDependent, NoiseDistribution::Uniform,
                            level, static_cast<std::uint64_t>(s)};
            Forecast f = predict_noisy_oracle(truth, 5, 4, noise);
            for (int tau = 1; tau <= 4; ++tau) {
                total += std::abs(f.price_at(tau) - truth.at(5 + tau).spot_price);
                ++count;
            }
        }
        mae.push_back(total / count);
    }
    for (std::size_t i = 1; i < mae.size(); ++i) CHECK(mae[i] >= mae[i - 1]);
}

TEST_CASE("heavy tail scale puts 80 percent of mass within the level") {
    // The quantile normalizer satisfies the closed-form t(3) CDF at 0.9.
    double q = student_t3_quantile90();
    CHECK(q == doctest::Approx(1.6377443536962).epsilon(1e-10));

    SpotTrace truth = constant_trace(4, 1.0, 10);
    int inside = 0;
    const int samples = 50000;
    for (int s = 0; s < samples; ++s) {
        NoiseSpec noise{MagnitudeMode::MagnitudeDependent, NoiseDistribution::HeavyTail,
                        0.3, static_cast<std::uint64_t>(s)};
        Forecast f = predict_noisy_oracle(truth, 0, 1, noise);
        if (std::abs(f.price_at(1) - 1.0) <= 0.3) ++inside;
    }
    double frac = static_cast<double>(inside) / samples;
    CHECK(frac == doctest::Approx(0.8).epsilon(0.02));
}

TEST_CASE("persistence forecast repeats the observed slot") {
    SpotTrace truth = constant_trace(6, 0.45, 2);
    truth.slots[3].spot_price = 0.9;
    truth.slots[3].spot_avail = 5;
    Forecast f = persistence_forecast(truth, 3, 4);
    for (int tau = 0; tau <= 4; ++tau) {
        CHECK(f.price_at(tau) == 0.9);
        CHECK(f.avail_at(tau) == 5);
    }
}
