#include <cmath>
#include <random>

#include <doctest.h>

#include "qho/signals.hpp"

using namespace qho;

TEST_CASE("window values at the ramp midpoints, plateau and outside") {
    const PulseSpec spec = pulse_from_midpoints(std::numbers::pi, 3.0 * std::numbers::pi, 2.0);
    CHECK(spec.t_start == doctest::Approx(std::numbers::pi - 1.5).epsilon(1e-15));
    CHECK(spec.t_end == doctest::Approx(3.0 * std::numbers::pi + 1.5).epsilon(1e-15));
    CHECK(spec.ramp_mid_rise() == doctest::Approx(std::numbers::pi).epsilon(1e-15));
    CHECK(spec.ramp_mid_fall() == doctest::Approx(3.0 * std::numbers::pi).epsilon(1e-15));

    CHECK(theta(0.0, spec) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(theta(std::numbers::pi, spec) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(theta(2.0 * std::numbers::pi, spec) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(theta(3.0 * std::numbers::pi, spec) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(theta(5.0, spec) == doctest::Approx(0.9999999265366246).epsilon(1e-12));
}

TEST_CASE("window derivative closed form and finite differences") {
    const PulseSpec spec = pulse_from_midpoints(std::numbers::pi, 3.0 * std::numbers::pi, 2.0);
    CHECK(theta_derivative(std::numbers::pi, spec) ==
          doctest::Approx(1.1283791670955126).epsilon(1e-13));
    CHECK(theta_derivative(3.0 * std::numbers::pi, spec) ==
          doctest::Approx(-1.1283791670955126).epsilon(1e-13));
    CHECK(theta_derivative(2.0 * std::numbers::pi, spec) == doctest::Approx(0.0).epsilon(1e-14));

    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> logeps(0.0, 3.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const double eps = std::pow(10.0, logeps(rng));
        const double rise = 10.0 * uni(rng);
        const double fall = rise + 8.0 / eps + 10.0 * uni(rng);
        const PulseSpec s = pulse_from_midpoints(rise, fall, eps);
        // sample where the derivative is appreciable: inside a ramp
        const double t = rise + (4.0 * uni(rng) - 2.0) / eps;
        const double h = 1e-6 / eps;
        const double fd = (theta(t + h, s) - theta(t - h, s)) / (2.0 * h);
        const double an = theta_derivative(t, s);
        CHECK(std::abs(fd - an) <= 1e-6 * std::max(1.0, std::abs(an)) * eps);
    }
}

TEST_CASE("window stays in [0, 1] and is symmetric about its centre") {
    for (double eps : {1.0, 2.0, 31.6, 1000.0}) {
        const PulseSpec s = pulse_from_midpoints(2.0, 9.0, eps);
        const double centre = 0.5 * (s.t_start + s.t_end);
        for (int k = 0; k <= 500; ++k) {
            const double off = 12.0 * k / 500.0;
            const double a = theta(centre + off, s);
            const double b = theta(centre - off, s);
            CHECK(a >= 0.0);
            CHECK(a <= 1.0 + 1e-15);
            CHECK(std::abs(a - b) <= 1e-12);
        }
    }
}

TEST_CASE("scaled sums evaluate and differentiate like their parts") {
    const PulseSpec p1 = pulse_from_midpoints(1.0, 4.0, 5.0);
    const PulseSpec p2 = pulse_from_midpoints(6.0, 9.0, 5.0);
    const ScalarSignal sig = ScalarSignal::scaled_sum(
        1.0, {{0.5, ScalarSignal::pulse(p1)}, {-0.25, ScalarSignal::pulse(p2)}});
    for (double t : {0.0, 1.0, 2.5, 6.0, 7.5, 11.0}) {
        CHECK(sig.value(t) ==
              doctest::Approx(1.0 + 0.5 * theta(t, p1) - 0.25 * theta(t, p2)).epsilon(1e-15));
        CHECK(sig.derivative(t) ==
              doctest::Approx(0.5 * theta_derivative(t, p1) - 0.25 * theta_derivative(t, p2))
                  .epsilon(1e-14));
    }
    CHECK(sig.pulses().size() == 2);
    CHECK(sig.ramp_windows().size() == 4);
}

TEST_CASE("ramp windows bracket the pulse edges") {
    const PulseSpec p = pulse_from_midpoints(5.0, 12.0, 4.0);
    const ScalarSignal sig = ScalarSignal::pulse(p);
    const std::vector<RampWindow> w = sig.ramp_windows();
    REQUIRE(w.size() == 2);
    CHECK(w[0].t_lo <= p.ramp_mid_rise());
    CHECK(w[0].t_hi >= p.ramp_mid_rise());
    CHECK(w[1].t_lo <= p.ramp_mid_fall());
    CHECK(w[1].t_hi >= p.ramp_mid_fall());
    for (const RampWindow& rw : w) CHECK(rw.max_dt <= 0.3 / p.epsilon + 1e-15);
}

TEST_CASE("json round trip reproduces values bit for bit") {
    const ScalarSignal sig = ScalarSignal::scaled_sum(
        2.0, {{0.1, ScalarSignal::pulse(pulse_from_midpoints(1.0, 3.0, 7.0))},
              {1.5, ScalarSignal::constant(0.25)}});
    const ScalarSignal back = ScalarSignal::from_json(sig.to_json());
    for (double t : {0.0, 0.7, 1.0, 2.2, 3.0, 4.4}) {
        CHECK(back.value(t) == sig.value(t));
        CHECK(back.derivative(t) == sig.derivative(t));
    }
    CHECK(back.to_json() == sig.to_json());
}

TEST_CASE("invalid pulse parameters are rejected by name") {
    PulseSpec bad = pulse_from_midpoints(1.0, 5.0, 2.0);
    bad.epsilon = 0.0;
    bool named = false;
    try {
        bad.validate();
    } catch (const std::invalid_argument& e) {
        named = std::string(e.what()).find("epsilon") != std::string::npos;
    }
    CHECK(named);
    PulseSpec swapped = pulse_from_midpoints(1.0, 5.0, 2.0);
    std::swap(swapped.t_start, swapped.t_end);
    CHECK_THROWS_AS(swapped.validate(), std::invalid_argument);
}
