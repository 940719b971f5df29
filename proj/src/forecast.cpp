#include "spotsched/forecast.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "spotsched/common.hpp"

namespace spotsched {

namespace {

constexpr double kPi = 3.141592653589793;

void check_window(const SpotTrace& trace, int t, int horizon, const char* who) {
    if (horizon < 0) throw ConfigError(std::string(who) + ": horizon must be nonnegative");
    if (t < 0 || t >= trace.size())
        throw std::out_of_range(std::string(who) + ": slot " + std::to_string(t) +
                                " not in trace");
}

int clamp_avail(double x) {
    return static_cast<int>(std::max<long long>(0, round_half_up(x)));
}

// Minimum-norm least-squares AR coefficients for one series. Rank-deficient
// histories (e.g. a constant series) are handled by the SVD threshold, so
// an exactly reproducible series extrapolates itself.
std::vector<double> fit_ar(const std::vector<double>& y, int order) {
    const int rows = static_cast<int>(y.size()) - order;
    Eigen::MatrixXd x(rows, order);
    Eigen::VectorXd b(rows);
    for (int r = 0; r < rows; ++r) {
        b(r) = y[static_cast<std::size_t>(r + order)];
        for (int c = 0; c < order; ++c)
            x(r, c) = y[static_cast<std::size_t>(r + order - 1 - c)];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd coef = svd.solve(b);
    return std::vector<double>(coef.data(), coef.data() + order);
}

std::vector<double> iterate_ar(const std::vector<double>& history,
                               const std::vector<double>& coef, int steps) {
    const int order = static_cast<int>(coef.size());
    std::vector<double> tail(history.end() - order, history.end());
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(steps));
    for (int s = 0; s < steps; ++s) {
        double next = 0.0;
        for (int i = 0; i < order; ++i)
            next += coef[static_cast<std::size_t>(i)] * tail[tail.size() - 1 - static_cast<std::size_t>(i)];
        out.push_back(next);
        tail.push_back(next);
    }
    return out;
}

// Uniform in [0, 1) from a dedicated splitmix stream.
struct NoiseStream {
    std::uint64_t state;
    double next_unit() {
        return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    }
};

// Student-t with 3 degrees of freedom: z * sqrt(3 / chi^2_3).
double sample_t3(NoiseStream& s) {
    double u1 = s.next_unit();
    double u2 = s.next_unit();
    double u3 = s.next_unit();
    double u4 = s.next_unit();
    double r1 = std::sqrt(-2.0 * std::log(1.0 - u1));
    double r2 = std::sqrt(-2.0 * std::log(1.0 - u3));
    double z = r1 * std::cos(2.0 * kPi * u2);
    double n1 = r1 * std::sin(2.0 * kPi * u2);
    double n2 = r2 * std::cos(2.0 * kPi * u4);
    double n3 = r2 * std::sin(2.0 * kPi * u4);
    double chi3 = n1 * n1 + n2 * n2 + n3 * n3;
    if (chi3 < 1e-300) chi3 = 1e-300;
    return z * std::sqrt(3.0 / chi3);
}

double sample_eps(const NoiseSpec& noise, int t, int tau, int series) {
    std::uint64_t key = mix64(noise.seed, static_cast<std::uint64_t>(t) + 1);
    key = mix64(key, static_cast<std::uint64_t>(tau) + 1);
    key = mix64(key, static_cast<std::uint64_t>(series) + 0x51ULL);
    NoiseStream s{key};
    if (noise.distribution == NoiseDistribution::Uniform)
        return noise.level * (2.0 * s.next_unit() - 1.0);
    return noise.level * sample_t3(s) / student_t3_quantile90();
}

double perturb(double truth, double eps, double series_mean, MagnitudeMode mode) {
    if (mode == MagnitudeMode::MagnitudeDependent) return truth * (1.0 + eps);
    return truth + eps * series_mean;
}

double t3_cdf(double x) {
    double u = x / std::sqrt(3.0);
    return 0.5 + (u / (1.0 + u * u) + std::atan(u)) / kPi;
}

}  // namespace

double student_t3_quantile90() {
    static const double q = [] {
        double lo = 0.0, hi = 10.0;
        for (int i = 0; i < 200; ++i) {
            double mid = 0.5 * (lo + hi);
            (t3_cdf(mid) < 0.9 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }();
    return q;
}

Forecast predict_ar(const SpotTrace& history, int t, int horizon, int order) {
    check_window(history, t, 0, "predict_ar");
    if (order < 1) throw ConfigError("predict_ar: order must be at least 1");

    const int available = t + 1;
    const int needed = std::max(order + 1, 2);
    if (available < needed)
        throw InsufficientHistoryError(
            "predict_ar: need " + std::to_string(needed) + " slots, have " +
            std::to_string(available) + "; fall back to a persistence forecast");

    std::vector<double> price(static_cast<std::size_t>(available));
    std::vector<double> avail(static_cast<std::size_t>(available));
    for (int i = 0; i <= t; ++i) {
        price[static_cast<std::size_t>(i)] = history.at(i).spot_price;
        avail[static_cast<std::size_t>(i)] = history.at(i).spot_avail;
    }

    Forecast f;
    f.origin_slot = t;
    f.horizon = horizon;
    f.price_pred.push_back(history.at(t).spot_price);
    f.avail_pred.push_back(history.at(t).spot_avail);
    if (horizon == 0) return f;

    auto price_path = iterate_ar(price, fit_ar(price, order), horizon);
    auto avail_path = iterate_ar(avail, fit_ar(avail, order), horizon);
    for (int s = 0; s < horizon; ++s) {
        f.price_pred.push_back(std::max(0.0, price_path[static_cast<std::size_t>(s)]));
        f.avail_pred.push_back(clamp_avail(avail_path[static_cast<std::size_t>(s)]));
    }
    return f;
}

Forecast predict_noisy_oracle(const SpotTrace& truth, int t, int horizon,
                              const NoiseSpec& noise) {
    check_window(truth, t, horizon, "predict_noisy_oracle");
    if (noise.level < 0.0)
        throw ConfigError("predict_noisy_oracle: noise level must be nonnegative");
    if (t + horizon >= truth.size())
        throw std::out_of_range("predict_noisy_oracle: window [" + std::to_string(t) +
                                ", " + std::to_string(t + horizon) + "] exceeds trace of " +
                                std::to_string(truth.size()) + " slots");

    const double mean_price = truth.mean_price();
    const double mean_avail = truth.mean_avail();

    Forecast f;
    f.origin_slot = t;
    f.horizon = horizon;
    f.price_pred.push_back(truth.at(t).spot_price);
    f.avail_pred.push_back(truth.at(t).spot_avail);
    for (int tau = 1; tau <= horizon; ++tau) {
        const MarketSlot& s = truth.at(t + tau);
        double eps_p = sample_eps(noise, t, tau, 1);
        double eps_a = sample_eps(noise, t, tau, 2);
        double p = perturb(s.spot_price, eps_p, mean_price, noise.magnitude_mode);
        double a = perturb(s.spot_avail, eps_a, mean_avail, noise.magnitude_mode);
        f.price_pred.push_back(std::max(0.0, p));
        f.avail_pred.push_back(clamp_avail(a));
    }
    return f;
}

Forecast persistence_forecast(const SpotTrace& trace, int t, int horizon) {
    check_window(trace, t, horizon, "persistence_forecast");
    Forecast f;
    f.origin_slot = t;
    f.horizon = horizon;
    f.price_pred.assign(static_cast<std::size_t>(horizon) + 1, trace.at(t).spot_price);
    f.avail_pred.assign(static_cast<std::size_t>(horizon) + 1, trace.at(t).spot_avail);
    return f;
}

}  // namespace spotsched
