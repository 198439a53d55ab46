#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "specfit/errors.hpp"
#include "specfit/levy_noise.hpp"
#include "specfit/quadrature.hpp"
#include "specfit/stats.hpp"

using namespace specfit;

namespace {
const LevyDriverSpec kBrownian{DriverFamily::Brownian, 1.0, 0.0, 0.0};
const LevyDriverSpec kPoisson{DriverFamily::CompoundPoissonNormal, 0.0, 2.0, 1.0};
const LevyDriverSpec kMixed{DriverFamily::Mixed, 1.0, 1.0, 1.0};
const KernelSpec kOu{KernelFamily::OU, 1.0, 0.0, 1.0};
const KernelSpec kCar2{KernelFamily::CAR2Pendulum, 1.0, 0.0, 2.0};
}  // namespace

TEST_CASE("driver cumulants: closed forms") {
    const auto cb = driver_cumulants(kBrownian);
    CHECK(cb.d2 == doctest::Approx(1.0));
    CHECK(cb.d4 == doctest::Approx(0.0));
    CHECK(cb.gamma2 == doctest::Approx(0.0));

    const auto cp = driver_cumulants(kPoisson);
    CHECK(cp.d2 == doctest::Approx(2.0));
    CHECK(cp.d4 == doctest::Approx(6.0));
    CHECK(cp.gamma2 == doctest::Approx(1.5));

    const auto cm = driver_cumulants(kMixed);
    CHECK(cm.d2 == doctest::Approx(2.0));
    CHECK(cm.d4 == doctest::Approx(3.0));
    CHECK(cm.gamma2 == doctest::Approx(0.75));
}

TEST_CASE("all-zero driver is rejected") {
    const LevyDriverSpec dead{DriverFamily::Mixed, 0.0, 0.0, 0.0};
    CHECK_THROWS_AS(driver_cumulants(dead), DegenerateDriverError);
    CHECK_THROWS_AS(simulate_linear_noise(dead, kOu, 10.0, 0.1, 1), DegenerateDriverError);
}

TEST_CASE("sample cumulants of unit-time increments match the driver") {
    // batch-mean standard errors over 100 batches of 1e4 draws
    for (const auto& spec : {kPoisson, kMixed}) {
        const auto cum = driver_cumulants(spec);
        Rng rng(20250807);
        const int batches = 100, per_batch = 10000;
        std::vector<double> k2s(batches), k4s(batches);
        std::vector<double> draw(per_batch);
        for (int b = 0; b < batches; ++b) {
            for (auto& x : draw) x = sample_increment(spec, 1.0, rng);
            k2s[b] = sample_cumulant2(draw);
            k4s[b] = sample_cumulant4(draw);
        }
        const double k2 = mean(k2s), k4 = mean(k4s);
        const double se2 = std::sqrt(sample_variance(k2s) / batches);
        const double se4 = std::sqrt(sample_variance(k4s) / batches);
        CHECK(std::fabs(k2 - cum.d2) < 3.0 * se2);
        CHECK(std::fabs(k4 - cum.d4) < 3.0 * se4);
    }
}

TEST_CASE("kernel evaluation closed forms") {
    CHECK(kernel_eval(kCar2, 0.0) == doctest::Approx(0.0));
    CHECK(kernel_eval(kOu, 0.0) == doctest::Approx(1.0));
    CHECK(kernel_eval(kCar2, M_PI / 4.0) == doctest::Approx(std::exp(-M_PI / 4.0) / 2.0));
    CHECK(kernel_eval(kOu, -0.5) == 0.0);
    CHECK(kernel_eval(kCar2, -1.0) == 0.0);
    const KernelSpec wb{KernelFamily::WellBalancedOU, 2.0, 0.0, 1.0};
    CHECK(kernel_eval(wb, -0.3) == doctest::Approx(std::exp(-0.6)));
    CHECK(kernel_eval(wb, 0.3) == doctest::Approx(std::exp(-0.6)));
}

TEST_CASE("kernel transform: closed forms and decay") {
    const auto car0 = kernel_transform(kCar2, 0.0);
    CHECK(car0.real() == doctest::Approx(0.2));
    CHECK(car0.imag() == doctest::Approx(0.0));
    const auto ou0 = kernel_transform(kOu, 0.0);
    CHECK(ou0.real() == doctest::Approx(1.0));
    CHECK(ou0.imag() == doctest::Approx(0.0));

    // |a| = O(lambda^-2) for the pendulum kernel
    const double a100 = std::abs(kernel_transform(kCar2, 100.0));
    const double a1000 = std::abs(kernel_transform(kCar2, 1000.0));
    CHECK(a100 / a1000 == doctest::Approx(100.0).epsilon(0.01));

    // quadrature route for the Gamma family against the analytic transform
    const KernelSpec gamma{KernelFamily::Gamma, 1.0, 1.0, 1.0};
    for (double lam : {0.0, 0.7, 2.0}) {
        const auto got = kernel_transform(gamma, lam);
        const std::complex<double> expect = 1.0 / std::pow(std::complex<double>(1.0, lam), 2.0);
        CHECK(std::abs(got - expect) < 1e-7);
    }
}

TEST_CASE("covariance by quadrature: evenness, OU closed form, CAR2 closed form") {
    for (double t : {0.0, 0.4, 1.3, 2.7}) {
        CHECK(covariance(kCar2, kBrownian, t) ==
              doctest::Approx(covariance(kCar2, kBrownian, -t)).epsilon(1e-10));
    }
    CHECK(covariance(kCar2, kBrownian, 0.0) == doctest::Approx(0.05).epsilon(1e-8));
    CHECK(covariance(kOu, kBrownian, 1.0) == doctest::Approx(std::exp(-1.0) / 2.0).epsilon(1e-8));
    CHECK(covariance(kOu, kBrownian, 0.0) == doctest::Approx(0.5).epsilon(1e-8));

    // |B(t)| <= B(0) on a grid
    const double b0 = covariance(kCar2, kBrownian, 0.0);
    for (double t = 0.0; t <= 6.0; t += 0.5)
        CHECK(std::fabs(covariance(kCar2, kBrownian, t)) <= b0 * (1.0 + 1e-12));

    // two-sided kernel as well
    const KernelSpec wb{KernelFamily::WellBalancedOU, 1.0, 0.0, 1.0};
    // B(t) = d2 int e^{-|t+s|} e^{-|s|} ds = d2 e^{-|t|} (1 + |t|)
    CHECK(covariance(wb, kBrownian, 0.7) ==
          doctest::Approx(std::exp(-0.7) * 1.7).epsilon(1e-8));
}

TEST_CASE("CAR2 closed-form covariance vs quadrature on [0, 10]") {
    CHECK(covariance_car2_closed_form(1.0, 2.0, 1.0, 0.0) == doctest::Approx(0.05));
    // correlation at zero is one
    const double b0 = covariance_car2_closed_form(1.0, 2.0, 1.0, 0.0);
    CHECK(covariance_car2_closed_form(1.0, 2.0, 1.0, 0.0) / b0 == doctest::Approx(1.0));
    for (double t = 0.0; t <= 10.0; t += 0.5) {
        const double closed = covariance_car2_closed_form(1.0, 2.0, 1.0, t);
        const double quad = covariance(kCar2, kBrownian, t);
        CHECK(std::fabs(closed - quad) <= 1e-6 * std::max(1.0, std::fabs(closed)));
    }
}

TEST_CASE("spectral densities of order 2..4") {
    const auto f0 = spectral_density_order_r(kCar2, kBrownian, {0.0});
    CHECK(f0.real() == doctest::Approx(1.0 / (2.0 * M_PI * 25.0)).epsilon(1e-12));
    CHECK(f0.imag() == doctest::Approx(0.0));

    for (double lam : {0.3, 1.1, 4.0}) {
        const auto plus = spectral_density_order_r(kCar2, kBrownian, {lam});
        const auto minus = spectral_density_order_r(kCar2, kBrownian, {-lam});
        CHECK(plus.real() == doctest::Approx(minus.real()).epsilon(1e-12));
    }

    CHECK(std::abs(spectral_density_order_r(kOu, kBrownian, {0.5, -0.2})) == 0.0);  // d3 = 0

    const auto f4 = spectral_density_order_r(kOu, kPoisson, {0.1, 0.2, -0.3});
    CHECK(std::abs(f4) > 0.0);

    CHECK_THROWS_AS(spectral_density_order_r(kOu, kBrownian, {}), UnsupportedOrderError);
    CHECK_THROWS_AS(spectral_density_order_r(kOu, kBrownian, {1.0, 2.0, 3.0, 4.0}),
                    UnsupportedOrderError);
}

TEST_CASE("Parseval: integral of f equals B(0)") {
    for (const auto& kernel : {kOu, kCar2}) {
        const double b0 = covariance(kernel, kBrownian, 0.0);
        auto q = integrate_even_line(
            [&](double l) { return spectral_density(kernel, kBrownian, l); }, 1e-8, 1e-8);
        CHECK(std::fabs(q.value - b0) < 1e-4);
    }
}

TEST_CASE("simulation is reproducible and rejects bad shapes") {
    const NoisePath a = simulate_linear_noise(kBrownian, kOu, 50.0, 0.05, 99);
    const NoisePath b = simulate_linear_noise(kBrownian, kOu, 50.0, 0.05, 99);
    REQUIRE(a.values.size() == b.values.size());
    REQUIRE(a.values.size() == 1000);
    for (std::size_t i = 0; i < a.values.size(); ++i) REQUIRE(a.values[i] == b.values[i]);
    CHECK(a.horizon() == doctest::Approx(50.0));

    const NoisePath c = simulate_linear_noise(kBrownian, kOu, 50.0, 0.05, 100);
    bool same = true;
    for (std::size_t i = 0; i < a.values.size(); ++i) same = same && a.values[i] == c.values[i];
    CHECK_FALSE(same);

    CHECK_THROWS_AS(simulate_linear_noise(kBrownian, kOu, 10.03, 0.1, 1), ShapeError);
}

TEST_CASE("kernel mass beyond the truncation horizon is negligible") {
    for (const auto& kernel :
         {kOu, kCar2, KernelSpec{KernelFamily::WellBalancedOU, 1.0, 0.0, 1.0},
          KernelSpec{KernelFamily::Gamma, 1.0, 1.5, 1.0}}) {
        const double horizon = kernel.support_horizon();
        const double body = integrate([&](double t) { return std::fabs(kernel_eval(kernel, t)); },
                                      0.0, horizon, 1e-10, 1e-10, 32).value;
        const double tail =
            integrate([&](double t) { return std::fabs(kernel_eval(kernel, t)); }, horizon,
                      3.0 * horizon, 1e-12, 1e-12, 32).value;
        CHECK(tail < 1e-7 * body);
    }
}

TEST_CASE("simulated paths are finite everywhere") {
    for (const auto& driver : {kBrownian, kPoisson, kMixed}) {
        const NoisePath path = simulate_linear_noise(driver, kCar2, 100.0, 0.05, 12321);
        for (double v : path.values) REQUIRE(std::isfinite(v));
    }
}

TEST_CASE("coarse delta raises the warning flag") {
    const NoisePath fine = simulate_linear_noise(kBrownian, kCar2, 20.0, 0.05, 3);
    CHECK_FALSE(fine.coarse_delta_warning);
    const NoisePath coarse = simulate_linear_noise(kBrownian, kCar2, 20.0, 0.2, 3);
    CHECK(coarse.coarse_delta_warning);
}

TEST_CASE("OU sample variance within 5% of B(0) at T = 2000") {
    const NoisePath path = simulate_linear_noise(kBrownian, kOu, 2000.0, 0.05, 4242);
    CHECK(mean(path.values) == doctest::Approx(0.0).epsilon(1.0));  // sane magnitude
    CHECK(std::fabs(mean(path.values)) < 0.05);
    CHECK(sample_variance(path.values) == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("CAR2 lag autocovariance tracks the closed form") {
    const double horizon = 3000.0, delta = 0.05;
    const NoisePath path = simulate_linear_noise(kBrownian, kCar2, horizon, delta, 777);
    const std::size_t n = path.values.size();
    const double b0 = covariance_car2_closed_form(1.0, 2.0, 1.0, 0.0);
    for (double lag_t : {0.0, 0.5, 1.0, 2.0, 3.0}) {
        const auto lag = static_cast<std::size_t>(std::llround(lag_t / delta));
        double acc = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) acc += path.values[i] * path.values[i + lag];
        acc /= static_cast<double>(n - lag);
        const double expect = covariance_car2_closed_form(1.0, 2.0, 1.0, lag_t);
        CHECK(std::fabs(acc - expect) < 0.10 * b0);
    }
}

TEST_CASE("lattice covariance agrees with the continuous covariance as delta shrinks") {
    const auto fine = lattice_covariance(kCar2, kBrownian, 0.01, 200);
    CHECK(fine[0] == doctest::Approx(0.05).epsilon(2e-4));
    CHECK(fine[100] == doctest::Approx(covariance_car2_closed_form(1.0, 2.0, 1.0, 1.0))
                           .epsilon(2e-3));
}
