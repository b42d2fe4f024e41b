#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ustat/rng.hpp"

using ustat::rng::Stream;

TEST_CASE("derived streams are reproducible and id-sensitive") {
    auto a = Stream::derive(42, {1, 7});
    auto b = Stream::derive(42, {1, 7});
    auto c = Stream::derive(42, {7, 1});
    auto d = Stream::derive(43, {1, 7});
    bool same = true, swapped_differs = false, seed_differs = false;
    for (int k = 0; k < 64; ++k) {
        const auto va = a.next_u64();
        same = same && va == b.next_u64();
        swapped_differs = swapped_differs || va != c.next_u64();
        seed_differs = seed_differs || va != d.next_u64();
    }
    CHECK(same);
    CHECK(swapped_differs);
    CHECK(seed_differs);
}

TEST_CASE("uniform ranges") {
    auto s = Stream::derive(1, {2});
    for (int k = 0; k < 10000; ++k) {
        const double u = s.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double v = s.uniform_pos();
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("normal moments") {
    auto s = Stream::derive(3, {4});
    const int n = 200000;
    double m1 = 0.0, m2 = 0.0, m4 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double z = s.normal();
        m1 += z;
        m2 += z * z;
        m4 += z * z * z * z;
    }
    m1 /= n;
    m2 /= n;
    m4 /= n;
    CHECK(std::abs(m1) < 0.01);
    CHECK(m2 == doctest::Approx(1.0).epsilon(0.02));
    CHECK(m4 == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("rademacher is a fair sign") {
    auto s = Stream::derive(5, {6});
    int plus = 0;
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
        const double e = s.rademacher();
        CHECK(std::abs(e) == 1.0);
        if (e > 0) ++plus;
    }
    CHECK(std::abs(plus - n / 2) < 4 * std::sqrt(n / 4.0));
}

TEST_CASE("categorical matches its probability vector") {
    auto s = Stream::derive(9, {10});
    const std::vector<double> probs{0.1, 0.2, 0.3, 0.4};
    std::vector<int> hits(4, 0);
    const int n = 100000;
    for (int k = 0; k < n; ++k) ++hits[s.categorical(probs)];
    for (std::size_t c = 0; c < probs.size(); ++c) {
        const double se = std::sqrt(probs[c] * (1 - probs[c]) / n);
        CHECK(std::abs(hits[c] / static_cast<double>(n) - probs[c]) < 5 * se);
    }
}
