#pragma once

#include "csvm/core.hpp"
#include "csvm/rng.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

namespace csvm {

enum class Scenario : std::uint8_t { Example1, Example2, Example3 };

inline std::string_view to_string(Scenario s) {
    switch (s) {
    case Scenario::Example1: return "example1";
    case Scenario::Example2: return "example2";
    case Scenario::Example3: return "example3";
    }
    return "?";
}

inline std::optional<Scenario> parse_scenario(std::string_view s) {
    if (s == "example1") return Scenario::Example1;
    if (s == "example2") return Scenario::Example2;
    if (s == "example3") return Scenario::Example3;
    return std::nullopt;
}

/// Total dimension used in the simulation study for each scenario.
inline int default_dims(Scenario s) {
    switch (s) {
    case Scenario::Example1: return 10;
    case Scenario::Example2: return 100;
    case Scenario::Example3: return 500;
    }
    return 2;
}

namespace example1 {
inline constexpr double kMeanNeg[2] = {-2.0, 1.0};
inline constexpr double kMeanPos[2] = {1.0, 0.0};
inline constexpr double kVarNeg[2] = {2.0, 0.5};
inline constexpr double kVarPos[2] = {0.5, 2.0};
} // namespace example1

/// Quartic boundary of Example 2: g(x) = -3.6 x1^2 + 7.2 x2^2 - 0.8.
inline double example2_boundary(double x1, double x2) { return -3.6 * x1 * x1 + 7.2 * x2 * x2 - 0.8; }

/// P(Y = 1 | x) for Example 2: logistic link on the boundary function.
inline double example2_eta(double x1, double x2) { return 1.0 / (1.0 + std::exp(-example2_boundary(x1, x2))); }

namespace detail {

inline void check_shape(Eigen::Index n, Eigen::Index p) {
    if (n < 0) throw std::invalid_argument("generator: n must be >= 0");
    if (p < 2) throw std::invalid_argument("generator: total dimension must be >= 2");
}

/// Signal pair (x1, x2) and label for one draw.
struct SignalDraw {
    double x1, x2;
    Label y;
};

inline SignalDraw draw_signal(Scenario s, Rng& rng) {
    std::bernoulli_distribution coin(0.5);
    std::normal_distribution<double> normal(0.0, 1.0);
    switch (s) {
    case Scenario::Example1: {
        const Label y = coin(rng) ? 1 : -1;
        const double* mu = y > 0 ? example1::kMeanPos : example1::kMeanNeg;
        const double* var = y > 0 ? example1::kVarPos : example1::kVarNeg;
        const double a = mu[0] + std::sqrt(var[0]) * normal(rng);
        const double b = mu[1] + std::sqrt(var[1]) * normal(rng);
        return {a, b, y};
    }
    case Scenario::Example2: {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const double a = u(rng);
        const double b = u(rng);
        std::bernoulli_distribution label(example2_eta(a, b));
        return {a, b, static_cast<Label>(label(rng) ? 1 : -1)};
    }
    case Scenario::Example3: {
        const Label y = coin(rng) ? 1 : -1;
        std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
        std::uniform_real_distribution<double> radius(y > 0 ? 0.8 : 0.0, y > 0 ? 2.0 : 1.2);
        const double t = angle(rng);
        const double r = radius(rng);
        return {r * std::cos(t), r * std::sin(t), y};
    }
    }
    return {0.0, 0.0, 1};
}

} // namespace detail

/// n draws with p - 2 appended N(0, 1/p) noise columns.
inline Dataset generate(Scenario s, Eigen::Index n, Eigen::Index p, Rng& rng) {
    detail::check_shape(n, p);
    Matrix x(n, p);
    std::vector<Label> y(static_cast<std::size_t>(n));
    std::normal_distribution<double> noise(0.0, std::sqrt(1.0 / static_cast<double>(p)));
    for (Eigen::Index i = 0; i < n; ++i) {
        const detail::SignalDraw d = detail::draw_signal(s, rng);
        x(i, 0) = d.x1;
        x(i, 1) = d.x2;
        for (Eigen::Index j = 2; j < p; ++j) x(i, j) = noise(rng);
        y[static_cast<std::size_t>(i)] = d.y;
    }
    return {std::move(x), std::move(y)};
}

inline Dataset generate(Scenario s, Eigen::Index n, Eigen::Index p, std::uint64_t seed, std::uint64_t stream = 0) {
    Rng rng = make_rng(seed, stream);
    return generate(s, n, p, rng);
}

inline Dataset gen_example1(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
    return generate(Scenario::Example1, n, p, seed);
}
inline Dataset gen_example2(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
    return generate(Scenario::Example2, n, p, seed);
}
inline Dataset gen_example3(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
    return generate(Scenario::Example3, n, p, seed);
}

} // namespace csvm
