#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "spotsched/common.hpp"
#include "spotsched/selector.hpp"

using namespace spotsched;

TEST_CASE("initial weights are uniform") {
    CHECK(init_weights(4) == WeightVector{0.25, 0.25, 0.25, 0.25});
    CHECK(init_weights(1) == WeightVector{1.0});
    WeightVector pool = init_weights(112);
    for (double w : pool) CHECK(w == doctest::Approx(1.0 / 112));
    CHECK_THROWS_AS(init_weights(0), ConfigError);
}

TEST_CASE("utility normalization is the clamped affine map") {
    CHECK(normalize_utility(100.0, -120.0, 100.0) == 1.0);
    CHECK(normalize_utility(-120.0, -120.0, 100.0) == 0.0);
    CHECK(normalize_utility(-10.0, -120.0, 100.0) == doctest::Approx(0.5));
    CHECK(normalize_utility(250.0, -120.0, 100.0) == 1.0);   // clamped above
    CHECK(normalize_utility(-300.0, -120.0, 100.0) == 0.0);  // clamped below
    CHECK_THROWS_AS(normalize_utility(0.0, 5.0, 5.0), ConfigError);

    JobSpec job{80.0, 10, 1, 12, 100.0, 1.5};
    CHECK(default_utility_max(job) == 100.0);
    CHECK(default_utility_min(job, 1.0) == -120.0);
}

TEST_CASE("weight update matches the closed form") {
    SUBCASE("equal utilities leave weights unchanged") {
        WeightVector w{0.3, 0.3, 0.4};
        WeightVector next = update_weights(w, {0.7, 0.7, 0.7}, 0.5);
        for (std::size_t i = 0; i < w.size(); ++i)
            CHECK(next[i] == doctest::Approx(w[i]).epsilon(1e-15));
    }
    SUBCASE("two-policy update") {
        WeightVector next = update_weights({0.5, 0.5}, {1.0, 0.0}, 0.1);
        const double e = std::exp(0.1);
        CHECK(next[0] == doctest::Approx(e / (e + 1.0)).epsilon(1e-12));
        CHECK(next[1] == doctest::Approx(1.0 / (e + 1.0)).epsilon(1e-12));
        CHECK(next[0] == doctest::Approx(0.52497918747894).epsilon(1e-10));
    }
    SUBCASE("zero learning rate freezes the weights") {
        WeightVector w{0.2, 0.8};
        WeightVector next = update_weights(w, {1.0, 0.0}, 0.0);
        CHECK(next[0] == doctest::Approx(0.2).epsilon(1e-15));
        CHECK(next[1] == doctest::Approx(0.8).epsilon(1e-15));
    }
}

TEST_CASE("weight updates preserve the simplex") {
    std::mt19937_64 rng(64);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    WeightVector w = init_weights(25);
    for (int k = 0; k < 3000; ++k) {
        std::vector<double> u(25);
        for (double& x : u) x = unit(rng);
        w = update_weights(w, u, 0.3);
        double sum = 0.0;
        for (double x : w) {
            CHECK(x > 0.0);
            sum += x;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("weight updates are exactly shift invariant") {
    WeightVector w{0.1, 0.25, 0.4, 0.25};
    std::vector<double> u{0.2, 0.9, 0.55, 0.0};
    std::vector<double> shifted = u;
    for (double& x : shifted) x += 0.37;
    WeightVector a = update_weights(w, u, 0.212);
    WeightVector b = update_weights(w, shifted, 0.212);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("policy sampling follows the weights") {
    CHECK(select_policy(WeightVector{1.0}, 99u) == 0);

    WeightVector w{0.2, 0.5, 0.3};
    std::mt19937_64 rng(7);
    std::vector<int> counts(3, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(select_policy(w, rng))];
    for (std::size_t i = 0; i < w.size(); ++i) {
        double se = std::sqrt(w[i] * (1.0 - w[i]) / n);
        CHECK(std::abs(counts[i] / static_cast<double>(n) - w[i]) < 3.0 * se);
    }

    // Deterministic for a fixed seed.
    CHECK(select_policy(w, 1234u) == select_policy(w, 1234u));
}

TEST_CASE("learning rate and regret bound match the closed forms") {
    CHECK(learning_rate(112, 1000) == doctest::Approx(0.09714421106).epsilon(1e-9));
    CHECK(regret_bound(1000, 112) == doctest::Approx(97.14421106).epsilon(1e-9));
    CHECK(regret_bound(1000, 1) == 0.0);
}

TEST_CASE("selection runs learn a persistent gap and record history") {
    SUBCASE("a constantly better policy gains weight monotonically") {
        auto provider = [](int) { return std::vector<double>{1.0, 0.0}; };
        SelectionRun run = run_selection(2, 50, std::nullopt, 3, provider);
        double prev = 0.5;
        for (std::size_t k = 1; k < run.history.size(); ++k) {
            CHECK(run.history[k].weights[0] > prev);
            prev = run.history[k].weights[0];
        }
        CHECK(run.final_weights[0] > prev);
    }
    SUBCASE("duplicated identical policies stay uniform forever") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        auto provider = [&](int) {
            double value = unit(rng);
            return std::vector<double>(8, value);
        };
        SelectionRun run = run_selection(8, 100, std::nullopt, 3, provider);
        for (double w : run.final_weights) CHECK(w == doctest::Approx(0.125).epsilon(1e-12));
    }
    SUBCASE("default learning rate follows the pool size and horizon") {
        auto provider = [](int) { return std::vector<double>(112, 0.5); };
        SelectionRun run = run_selection(112, 10, std::nullopt, 3, provider);
        CHECK(run.eta == doctest::Approx(learning_rate(112, 10)));
    }
}

TEST_CASE("regret of identical utilities is zero") {
    auto provider = [](int) { return std::vector<double>{0.4, 0.4, 0.4}; };
    SelectionRun run = run_selection(3, 40, std::nullopt, 11, provider);
    CHECK(regret(run) == doctest::Approx(0.0).epsilon(1e-12));

    auto single = [](int) { return std::vector<double>{0.9}; };
    SelectionRun one = run_selection(1, 40, std::nullopt, 11, single);
    CHECK(regret(one) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(regret_bound(40, 1) == 0.0);
}

TEST_CASE("measured regret never exceeds the theorem bound") {
    std::mt19937_64 rng(321);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (int rep = 0; rep < 40; ++rep) {
        const int m = 2 + static_cast<int>(rng() % 20);
        const int k_total = 50 + static_cast<int>(rng() % 300);
        const int mode = static_cast<int>(rng() % 3);

        auto provider = [&](int k) {
            std::vector<double> u(static_cast<std::size_t>(m));
            switch (mode) {
                case 0:  // i.i.d. random
                    for (double& x : u) x = unit(rng);
                    break;
                case 1:  // adversarial alternation against the leader
                    for (std::size_t i = 0; i < u.size(); ++i)
                        u[i] = (static_cast<int>(i) + k) % 2 ? 1.0 : 0.0;
                    break;
                default:  // drifting favorite
                    for (std::size_t i = 0; i < u.size(); ++i)
                        u[i] = (k % m == static_cast<int>(i)) ? 1.0 : 0.2;
                    break;
            }
            return u;
        };
        SelectionRun run = run_selection(m, k_total, std::nullopt, rng(), provider);
        CHECK(regret(run) <= regret_bound(k_total, m) + 1e-9);
    }
}

TEST_CASE("selector converges on a dominant policy across seeds") {
    // One policy beats its closest rival by 0.05 in expectation while the
    // bulk of the pool trails far behind; utilities are noisy.
    const int m = 20;
    int successes = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        std::mt19937_64 noise(seed * 101);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        auto provider = [&](int) {
            std::vector<double> u(m);
            for (int i = 0; i < m; ++i) {
                double base = i == 7 ? 0.65 : (i == 3 ? 0.60 : 0.30);
                u[static_cast<std::size_t>(i)] =
                    std::clamp(base + 0.25 * (unit(noise) - 0.5), 0.0, 1.0);
            }
            return u;
        };
        SelectionRun run = run_selection(m, 1000, std::nullopt, seed, provider);
        if (run.final_weights[7] > 0.9) ++successes;
    }
    CHECK(successes >= 4);
}

TEST_CASE("history export emits one json record per iteration") {
    auto provider = [](int k) { return std::vector<double>{0.1 * k, 0.5}; };
    SelectionRun run = run_selection(2, 3, 0.2, 17, provider);
    std::ostringstream out;
    write_history_jsonl(run, out);
    std::istringstream lines(out.str());
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
        ++count;
        CHECK(line.find("{\"k\":") == 0);
        CHECK(line.find("\"chosen\":") != std::string::npos);
        CHECK(line.find("\"eta\":0.2") != std::string::npos);
        CHECK(line.find("\"weights\":[") != std::string::npos);
        CHECK(line.find("\"utilities\":[") != std::string::npos);
    }
    CHECK(count == 3);
}
