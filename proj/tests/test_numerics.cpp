#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "specfit/fft.hpp"
#include "specfit/linalg.hpp"
#include "specfit/quadrature.hpp"
#include "specfit/rng.hpp"
#include "specfit/stats.hpp"

using namespace specfit;

TEST_CASE("gauss-kronrod handles polynomials and decaying tails") {
    auto q = integrate([](double x) { return x * x; }, 0.0, 1.0);
    CHECK(q.value == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    // int (1+x^2)^-3 over R = 3 pi / 8
    auto line = integrate_even_line([](double x) { return std::pow(1.0 + x * x, -3.0); }, 1e-12,
                                    1e-12);
    CHECK(line.value == doctest::Approx(3.0 * M_PI / 8.0).epsilon(1e-10));

    // slowly decaying x^-2 tail through the half-line transform
    auto slow = integrate_half_line([](double x) { return 1.0 / (1.0 + x * x); }, 1e-11, 1e-11);
    CHECK(slow.value == doctest::Approx(M_PI / 2.0).epsilon(1e-9));
}

TEST_CASE("oscillatory integrand with chunked seeding") {
    auto q = integrate([](double x) { return std::sin(9.0 * x); }, 0.0, M_PI, 1e-12, 1e-12, 32);
    CHECK(q.value == doctest::Approx(2.0 / 9.0).epsilon(1e-10));  // (1 - cos(9 pi)) / 9
}

TEST_CASE("fft matches a direct DFT on non-power-of-two sizes") {
    Rng rng(7);
    for (std::size_t n : {5, 12, 40000 % 997}) {
        std::vector<cdouble> x(n);
        for (auto& v : x) v = cdouble(rng.uniform() - 0.5, rng.uniform() - 0.5);
        const auto fast = dft(x);
        for (std::size_t k = 0; k < n; k += std::max<std::size_t>(1, n / 7)) {
            cdouble direct(0, 0);
            for (std::size_t j = 0; j < n; ++j) {
                const double ang = -2.0 * M_PI * static_cast<double>(j * k) / static_cast<double>(n);
                direct += x[j] * cdouble(std::cos(ang), std::sin(ang));
            }
            CHECK(std::abs(fast[k] - direct) < 1e-8 * (1.0 + std::abs(direct)));
        }
    }
}

TEST_CASE("autocorr_raw equals the naive lagged sums") {
    Rng rng(11);
    std::vector<double> x(37);
    for (auto& v : x) v = rng.normal();
    const auto acf = autocorr_raw(x, 10);
    for (std::size_t lag = 0; lag <= 10; ++lag) {
        double direct = 0.0;
        for (std::size_t j = 0; j + lag < x.size(); ++j) direct += x[j] * x[j + lag];
        CHECK(acf[lag] == doctest::Approx(direct).epsilon(1e-10));
    }
}

TEST_CASE("convolve matches the schoolbook convolution") {
    const std::vector<double> a{1.0, 2.0, -1.0};
    const std::vector<double> b{0.5, 0.0, 3.0, 1.0};
    const auto c = convolve(a, b);
    REQUIRE(c.size() == 6);
    const double expect[6] = {0.5, 1.0, 2.5, 7.0, -1.0, -1.0};
    for (int i = 0; i < 6; ++i) CHECK(c[i] == doctest::Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("linear solve, inverse and eigenvalues on small symmetric systems") {
    Matrix a(2, 2);
    a(0, 0) = 2.0; a(0, 1) = 1.0; a(1, 0) = 1.0; a(1, 1) = 2.0;
    const Vector x = solve(a, {1.0, 0.0});
    CHECK(x[0] == doctest::Approx(2.0 / 3.0));
    CHECK(x[1] == doctest::Approx(-1.0 / 3.0));
    const Vector ev = symmetric_eigenvalues(a);
    CHECK(ev[0] == doctest::Approx(1.0));
    CHECK(ev[1] == doctest::Approx(3.0));
    const Matrix id = a * inverse(a);
    CHECK(id(0, 0) == doctest::Approx(1.0));
    CHECK(id(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(symmetric_condition(a) == doctest::Approx(3.0));
}

TEST_CASE("normal quantile and cdf agree") {
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-9));
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
    for (double p : {0.01, 0.1, 0.3, 0.7, 0.9, 0.999})
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
}

TEST_CASE("rng streams are deterministic and well-moments") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());

    Rng rng(123);
    std::vector<double> z(200000);
    for (auto& v : z) v = rng.normal();
    CHECK(std::fabs(mean(z)) < 0.01);
    CHECK(sample_variance(z) == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::fabs(skewness(z)) < 0.02);
    CHECK(std::fabs(excess_kurtosis(z)) < 0.05);

    std::vector<double> p(200000);
    for (auto& v : p) v = static_cast<double>(rng.poisson(3.7));
    CHECK(mean(p) == doctest::Approx(3.7).epsilon(0.01));
    CHECK(sample_variance(p) == doctest::Approx(3.7).epsilon(0.03));
}

TEST_CASE("derive_seed decorrelates replicate streams") {
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    Rng a(derive_seed(9, 0)), b(derive_seed(9, 1));
    int agree = 0;
    for (int i = 0; i < 64; ++i) agree += (a.next_u64() >> 63) == (b.next_u64() >> 63);
    CHECK(agree < 50);
}

TEST_CASE("ks distance small for normal data, large for uniform") {
    Rng rng(5);
    std::vector<double> z(5000), u(5000);
    for (auto& v : z) v = rng.normal();
    for (auto& v : u) v = rng.uniform();
    CHECK(ks_distance_to_normal(z) < 0.02);
    CHECK(ks_distance_to_normal(u) > 0.05);
}
