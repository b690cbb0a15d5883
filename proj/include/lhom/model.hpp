#pragma once

/**
 * @file model.hpp
 * @brief Multiscale potential V(x) + p(x/eps), Gibbs densities and
 *        numerical spot-checks of the dissipativity/compactness hypotheses.
 */

#include "lhom/errors.hpp"
#include "lhom/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace lhom {

using ScalarField = std::function<double(double)>;

/// One-dimensional multiscale Langevin model. Immutable once built.
struct ModelSpec {
    std::string name;
    ScalarField V;   ///< slow potential
    ScalarField dV;
    ScalarField ddV;
    ScalarField p;   ///< fast potential, L-periodic
    ScalarField dp;
    double sigma = 1.0;
    double L = 2.0 * std::numbers::pi;
};

/// Throws ParameterError if sigma/L are not positive or p is not L-periodic
/// on a sample grid.
inline void validate(const ModelSpec& model)
{
    if (!(model.sigma > 0.0)) {
        throw ParameterError("model: sigma must be positive");
    }
    if (!(model.L > 0.0)) {
        throw ParameterError("model: period L must be positive");
    }
    if (!model.V || !model.dV || !model.ddV || !model.p || !model.dp) {
        throw ParameterError("model: all potential callables must be set");
    }
    constexpr int samples = 257;
    for (int i = 0; i < samples; ++i) {
        const double y = -2.0 * model.L + 4.0 * model.L * i / (samples - 1);
        const double a = model.p(y);
        const double b = model.p(y + model.L);
        if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a))) {
            throw ParameterError("model: p is not periodic with the declared period");
        }
    }
}

/// V(x) = x^2/2, p(y) = cos(y), L = 2*pi.
inline ModelSpec make_ou_cosine_model(double sigma)
{
    if (!(sigma > 0.0)) {
        throw ParameterError("make_ou_cosine_model: sigma must be positive");
    }
    ModelSpec m;
    m.name = "ou_cosine";
    m.V = [](double x) { return 0.5 * x * x; };
    m.dV = [](double x) { return x; };
    m.ddV = [](double) { return 1.0; };
    m.p = [](double y) { return std::cos(y); };
    m.dp = [](double y) { return -std::sin(y); };
    m.sigma = sigma;
    m.L = 2.0 * std::numbers::pi;
    return m;
}

/// Same slow potential with p == 0; the homogenized and multiscale problems coincide.
inline ModelSpec make_ou_flat_model(double sigma)
{
    ModelSpec m = make_ou_cosine_model(sigma);
    m.name = "ou_flat";
    m.p = [](double) { return 0.0; };
    m.dp = [](double) { return 0.0; };
    return m;
}

/// Model registry for configuration files.
inline ModelSpec make_model(const std::string& name, double sigma)
{
    if (name == "ou_cosine") {
        return make_ou_cosine_model(sigma);
    }
    if (name == "ou_flat") {
        return make_ou_flat_model(sigma);
    }
    throw ParameterError("unknown model '" + name + "'");
}

/// max |p| over one period: 10^4 samples, then golden-section refinement
/// around the best sample.
inline double max_abs_p(const ModelSpec& model)
{
    constexpr int samples = 10000;
    const double step = model.L / samples;
    const auto g = [&](double y) { return std::abs(model.p(y)); };
    int best = 0;
    double best_val = g(0.0);
    for (int i = 1; i < samples; ++i) {
        const double v = g(step * i);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    double a = step * (best - 1);
    double b = step * (best + 1);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    for (int it = 0; it < 80 && (b - a) > 1e-14; ++it) {
        if (g(c) > g(d)) {
            b = d;
        } else {
            a = c;
        }
        c = b - inv_phi * (b - a);
        d = a + inv_phi * (b - a);
    }
    return std::max(best_val, g(0.5 * (a + b)));
}

/// Norm-equivalence constants C_low = exp(-M/sigma), C_up = exp(M/sigma).
struct NormEquivalence {
    double c_low = 1.0;
    double c_up = 1.0;
};

inline NormEquivalence norm_equivalence(const ModelSpec& model)
{
    const double m = max_abs_p(model);
    return {std::exp(-m / model.sigma), std::exp(m / model.sigma)};
}

struct DensityOptions {
    /// Largest admissible exp(-(V(+-R) - min V)/sigma).
    double tail_tolerance = 1e-12;
    AdaptiveOptions quadrature{};
};

/// Tail tolerance admitting the R = 5 truncation used for the standard
/// Ornstein-Uhlenbeck experiment (exp(-12.5) ~ 3.7e-6).
inline constexpr double kExperimentTailTolerance = 1e-5;

/**
 * Multiscale and homogenized invariant densities on [-R, R], normalized on
 * the truncated domain. Normalization constants are computed once at
 * construction, so the object is safe for concurrent reads.
 */
class DensityPair {
public:
    DensityPair(ModelSpec model, double epsilon, double radius, const DensityOptions& opts = {})
        : model_(std::move(model)), epsilon_(epsilon), radius_(radius)
    {
        validate(model_);
        if (!(epsilon_ > 0.0)) {
            throw ParameterError("eval_rho: epsilon must be positive");
        }
        if (!(radius_ > 0.0)) {
            throw ParameterError("eval_rho: radius must be positive");
        }
        double v_min = model_.V(0.0);
        constexpr int samples = 2001;
        for (int i = 0; i < samples; ++i) {
            v_min = std::min(v_min, model_.V(-radius_ + 2.0 * radius_ * i / (samples - 1)));
        }
        v_shift_ = v_min;
        const double tail = std::max(std::exp(-(model_.V(radius_) - v_min) / model_.sigma),
                                     std::exp(-(model_.V(-radius_) - v_min) / model_.sigma));
        if (tail > opts.tail_tolerance) {
            throw TruncationError("eval_rho: relative density " + std::to_string(tail) + " at |x| = R exceeds " +
                                  std::to_string(opts.tail_tolerance));
        }
        c_ms_ = integrate([this](double x) { return unnormalized_ms(x); }, -radius_, radius_, opts.quadrature);
        c_hom_ = integrate([this](double x) { return unnormalized_hom(x); }, -radius_, radius_, opts.quadrature);
    }

    /// exp(-(V(x) - Vmin + p(x/eps))/sigma). The Vmin shift cancels in the normalized density.
    [[nodiscard]] double unnormalized_ms(double x) const
    {
        return std::exp(-(model_.V(x) - v_shift_ + model_.p(x / epsilon_)) / model_.sigma);
    }
    [[nodiscard]] double unnormalized_hom(double x) const
    {
        return std::exp(-(model_.V(x) - v_shift_) / model_.sigma);
    }

    [[nodiscard]] double rho_ms(double x) const { return unnormalized_ms(x) / c_ms_; }
    [[nodiscard]] double rho_hom(double x) const { return unnormalized_hom(x) / c_hom_; }

    /// Normalization constants, reported for the unshifted potential.
    [[nodiscard]] double c_rho_ms() const { return c_ms_ * std::exp(-v_shift_ / model_.sigma); }
    [[nodiscard]] double c_rho_hom() const { return c_hom_ * std::exp(-v_shift_ / model_.sigma); }

    [[nodiscard]] ScalarField ms() const
    {
        return [self = *this](double x) { return self.rho_ms(x); };
    }
    [[nodiscard]] ScalarField hom() const
    {
        return [self = *this](double x) { return self.rho_hom(x); };
    }

    [[nodiscard]] double epsilon() const noexcept { return epsilon_; }
    [[nodiscard]] double radius() const noexcept { return radius_; }
    [[nodiscard]] const ModelSpec& model() const noexcept { return model_; }

private:
    ModelSpec model_;
    double epsilon_;
    double radius_;
    double v_shift_ = 0.0;
    double c_ms_ = 1.0;
    double c_hom_ = 1.0;
};

inline DensityPair eval_rho(const ModelSpec& model, double epsilon, double radius, const DensityOptions& opts = {})
{
    return DensityPair(model, epsilon, radius, opts);
}

/// Diagnostic only: a failed check is recorded, never thrown.
struct AssumptionReport {
    double a = 0.0;  ///< -V'(x) x <= a - b x^2 on the sample grid
    double b = 0.0;
    bool dissipative = false;
    bool gradient_grows = false;        ///< |V'| increasing on the outer 20%
    bool schrodinger_potential_grows = false;  ///< |V'|^2/4 - V''/2 increasing on the outer 20%
    std::vector<std::string> violations;

    [[nodiscard]] bool all_pass() const noexcept { return violations.empty(); }
};

inline AssumptionReport check_assumptions(const ModelSpec& model, double sample_radius, int samples = 2001)
{
    if (!(sample_radius > 0.0)) {
        throw ParameterError("check_assumptions: sample_radius must be positive");
    }
    std::vector<double> xs(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        xs[static_cast<std::size_t>(i)] = -sample_radius + 2.0 * sample_radius * i / (samples - 1);
    }
    const double outer = 0.8 * sample_radius;

    AssumptionReport rep;
    double b = std::numeric_limits<double>::infinity();
    for (double x : xs) {
        if (std::abs(x) >= outer) {
            b = std::min(b, model.dV(x) * x / (x * x));
        }
    }
    rep.b = b;
    double a = 0.0;
    for (double x : xs) {
        a = std::max(a, -model.dV(x) * x + b * x * x);
    }
    rep.a = a;
    rep.dissipative = b > 0.0;
    if (!rep.dissipative) {
        rep.violations.push_back("dissipativity: no b > 0 with -V'(x) x <= a - b x^2 on the sample grid");
    }

    // Both tails, walking outward from |x| = 0.8 r.
    const auto grows = [&](const auto& g) {
        for (int side : {-1, 1}) {
            double prev = -std::numeric_limits<double>::infinity();
            double first = 0.0;
            bool started = false;
            const int half = samples / 2;
            for (int k = 0; k <= half; ++k) {
                const auto idx = static_cast<std::size_t>(side > 0 ? half + k : half - k);
                const double x = xs[idx];
                if (std::abs(x) < outer) {
                    continue;
                }
                const double v = g(x);
                if (!started) {
                    first = v;
                    started = true;
                } else if (v < prev - 1e-12 * std::max(1.0, std::abs(prev))) {
                    return false;
                }
                prev = v;
            }
            if (!(prev > first)) {
                return false;
            }
        }
        return true;
    };
    rep.gradient_grows = grows([&](double x) { return std::abs(model.dV(x)); });
    if (!rep.gradient_grows) {
        rep.violations.push_back("compactness: |V'| does not grow on the outer sample region");
    }
    rep.schrodinger_potential_grows = grows([&](double x) {
        const double g = model.dV(x);
        return 0.25 * g * g - 0.5 * model.ddV(x);
    });
    if (!rep.schrodinger_potential_grows) {
        rep.violations.push_back("compactness: |V'|^2/4 - V''/2 does not grow on the outer sample region");
    }
    return rep;
}

} // namespace lhom
