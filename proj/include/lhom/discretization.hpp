#pragma once

/**
 * @file discretization.hpp
 * @brief Uniform P1 finite elements on [-R, R] with density-weighted
 *        mass/stiffness operators and natural (no-flux) boundaries.
 */

#include "lhom/errors.hpp"
#include "lhom/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lhom {

struct Grid {
    double R = 1.0;
    std::size_t n_elems = 1;
    double h = 2.0;
    std::vector<double> nodes;

    [[nodiscard]] std::size_t n_nodes() const noexcept { return nodes.size(); }

    friend bool operator==(const Grid& a, const Grid& b) { return a.R == b.R && a.n_elems == b.n_elems; }
};

using GridPtr = std::shared_ptr<const Grid>;

/// n_elems = ceil(2R / h_target), so the realized h never exceeds h_target.
inline GridPtr build_grid(double R, double h_target)
{
    if (!(R > 0.0)) {
        throw ParameterError("build_grid: R must be positive");
    }
    if (!(h_target > 0.0) || !(h_target < 2.0 * R)) {
        throw ParameterError("build_grid: need 0 < h_target < 2R");
    }
    const double ratio = 2.0 * R / h_target;
    // Absorb rounding noise so that exact divisions do not gain an element.
    auto n = static_cast<std::size_t>(std::ceil(ratio * (1.0 - 1e-12)));
    n = std::max<std::size_t>(n, 1);
    auto g = std::make_shared<Grid>();
    g->R = R;
    g->n_elems = n;
    g->h = 2.0 * R / static_cast<double>(n);
    g->nodes.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        g->nodes[i] = -R + g->h * static_cast<double>(i);
    }
    g->nodes.back() = R;
    return g;
}

/// Symmetric tridiagonal matrix: one diagonal and one off-diagonal array.
struct SymTridiagonal {
    std::vector<double> diag;
    std::vector<double> off;  ///< off[i] couples i and i+1

    [[nodiscard]] std::size_t size() const noexcept { return diag.size(); }

    void apply(std::span<const double> x, std::span<double> y) const
    {
        const std::size_t n = diag.size();
        for (std::size_t i = 0; i < n; ++i) {
            double s = diag[i] * x[i];
            if (i > 0) {
                s += off[i - 1] * x[i - 1];
            }
            if (i + 1 < n) {
                s += off[i] * x[i + 1];
            }
            y[i] = s;
        }
    }

    [[nodiscard]] std::vector<double> operator*(std::span<const double> x) const
    {
        std::vector<double> y(diag.size());
        apply(x, y);
        return y;
    }

    /// x^T T y, summed row by row: for stiffness matrices the diagonal and
    /// off-diagonal parts are O(1/h^2) each and cancel, so they must not be
    /// accumulated separately.
    [[nodiscard]] double bilinear(std::span<const double> x, std::span<const double> y) const
    {
        const std::size_t n = diag.size();
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double row = diag[i] * y[i];
            if (i > 0) {
                row += off[i - 1] * y[i - 1];
            }
            if (i + 1 < n) {
                row += off[i] * y[i + 1];
            }
            s += x[i] * row;
        }
        return s;
    }
};

/// a * P + b * Q
inline SymTridiagonal combine(double a, const SymTridiagonal& P, double b, const SymTridiagonal& Q)
{
    if (P.size() != Q.size()) {
        throw ShapeError("combine: operator sizes differ");
    }
    SymTridiagonal r;
    r.diag.resize(P.diag.size());
    r.off.resize(P.off.size());
    for (std::size_t i = 0; i < r.diag.size(); ++i) {
        r.diag[i] = a * P.diag[i] + b * Q.diag[i];
    }
    for (std::size_t i = 0; i < r.off.size(); ++i) {
        r.off[i] = a * P.off[i] + b * Q.off[i];
    }
    return r;
}

enum class OperatorKind { mass, stiffness };
enum class WeightId { multiscale, homogenized, custom };

struct WeightedOperator {
    OperatorKind kind = OperatorKind::mass;
    WeightId weight = WeightId::custom;
    double coefficient = 1.0;
    GridPtr grid;
    SymTridiagonal matrix;
};

/**
 * Element-by-element assembly with the 6-point Gauss rule. Entries are
 * coefficient * int phi_i phi_j w (mass) or coefficient * int phi_i' phi_j' w
 * (stiffness); boundary rows are left untouched.
 */
template <typename Weight>
WeightedOperator assemble(const GridPtr& grid, const Weight& weight, OperatorKind kind, double coefficient,
                          WeightId id = WeightId::custom)
{
    const GaussRule& rule = gauss6();
    const std::size_t ne = grid->n_elems;
    const double h = grid->h;
    WeightedOperator op;
    op.kind = kind;
    op.weight = id;
    op.coefficient = coefficient;
    op.grid = grid;
    op.matrix.diag.assign(ne + 1, 0.0);
    op.matrix.off.assign(ne, 0.0);
    for (std::size_t e = 0; e < ne; ++e) {
        const double a = grid->nodes[e];
        double m00 = 0.0;
        double m01 = 0.0;
        double m11 = 0.0;
        double w_int = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double t = 0.5 * (rule.nodes[q] + 1.0);
            const double x = a + h * t;
            const double w = weight(x);
            if (!(w > 0.0) || !std::isfinite(w)) {
                throw WeightError("assemble: weight is not strictly positive at x = " + std::to_string(x));
            }
            const double jw = 0.5 * h * rule.weights[q] * w;
            const double p0 = 1.0 - t;
            const double p1 = t;
            m00 += jw * p0 * p0;
            m01 += jw * p0 * p1;
            m11 += jw * p1 * p1;
            w_int += jw;
        }
        if (kind == OperatorKind::mass) {
            op.matrix.diag[e] += coefficient * m00;
            op.matrix.diag[e + 1] += coefficient * m11;
            op.matrix.off[e] += coefficient * m01;
        } else {
            const double k = coefficient * w_int / (h * h);
            op.matrix.diag[e] += k;
            op.matrix.diag[e + 1] += k;
            op.matrix.off[e] -= k;
        }
    }
    return op;
}

/// F_i = int f phi_i w, by the same per-element rule.
template <typename Rhs, typename Weight>
std::vector<double> load_vector(const Grid& grid, const Rhs& f, const Weight& weight)
{
    const GaussRule& rule = gauss6();
    std::vector<double> F(grid.n_nodes(), 0.0);
    for (std::size_t e = 0; e < grid.n_elems; ++e) {
        const double a = grid.nodes[e];
        double f0 = 0.0;
        double f1 = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double t = 0.5 * (rule.nodes[q] + 1.0);
            const double x = a + grid.h * t;
            const double jw = 0.5 * grid.h * rule.weights[q] * f(x) * weight(x);
            f0 += jw * (1.0 - t);
            f1 += jw * t;
        }
        F[e] += f0;
        F[e + 1] += f1;
    }
    return F;
}

/// sqrt(int f^2 w) over the grid's domain.
template <typename Rhs, typename Weight>
double weighted_l2_norm(const Grid& grid, const Rhs& f, const Weight& weight)
{
    const GaussRule& rule = gauss6();
    double s = 0.0;
    for (std::size_t e = 0; e < grid.n_elems; ++e) {
        const double a = grid.nodes[e];
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double x = a + 0.5 * grid.h * (rule.nodes[q] + 1.0);
            const double v = f(x);
            s += 0.5 * grid.h * rule.weights[q] * v * v * weight(x);
        }
    }
    return std::sqrt(s);
}

/// Nodal values on a grid.
struct GridFunction {
    GridPtr grid;
    std::vector<double> values;

    GridFunction() = default;
    GridFunction(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v))
    {
        if (!grid || values.size() != grid->n_nodes()) {
            throw ShapeError("GridFunction: value count does not match node count");
        }
    }

    template <typename F>
    static GridFunction interpolate(const GridPtr& g, const F& f)
    {
        std::vector<double> v(g->n_nodes());
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = f(g->nodes[i]);
        }
        return {g, std::move(v)};
    }

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where)
{
    if (!(a == b)) {
        throw ShapeError(std::string(where) + ": grid mismatch");
    }
}

inline GridFunction operator-(const GridFunction& a, const GridFunction& b)
{
    require_same_grid(*a.grid, *b.grid, "GridFunction difference");
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = a.values[i] - b.values[i];
    }
    return {a.grid, std::move(v)};
}

struct WeightedNorms {
    double l2 = 0.0;
    double h1 = 0.0;
};

/// Weighted L2 and H1 norms; both operators must carry coefficient 1.
inline WeightedNorms weighted_norms(const GridFunction& u, const WeightedOperator& mass,
                                    const WeightedOperator& stiffness)
{
    require_same_grid(*u.grid, *mass.grid, "weighted_norms");
    require_same_grid(*u.grid, *stiffness.grid, "weighted_norms");
    const double m = mass.matrix.bilinear(u.values, u.values);
    const double a = stiffness.matrix.bilinear(u.values, u.values);
    return {std::sqrt(std::max(m, 0.0)), std::sqrt(std::max(m + a, 0.0))};
}

/// LDL^T factorization of a symmetric positive definite tridiagonal matrix,
/// reusable across right-hand sides. Throws NotSpdError on a non-positive pivot.
class TridiagonalLdlt {
public:
    explicit TridiagonalLdlt(const SymTridiagonal& T) : d_(T.size()), l_(T.size() > 0 ? T.size() - 1 : 0)
    {
        const std::size_t n = T.size();
        if (n == 0) {
            return;
        }
        d_[0] = T.diag[0];
        if (!(d_[0] > 0.0)) {
            throw NotSpdError("TridiagonalLdlt: non-positive pivot at row 0");
        }
        for (std::size_t i = 1; i < n; ++i) {
            l_[i - 1] = T.off[i - 1] / d_[i - 1];
            d_[i] = T.diag[i] - l_[i - 1] * T.off[i - 1];
            if (!(d_[i] > 0.0)) {
                throw NotSpdError("TridiagonalLdlt: non-positive pivot at row " + std::to_string(i));
            }
        }
    }

    void solve_in_place(std::span<double> x) const
    {
        const std::size_t n = d_.size();
        if (x.size() != n) {
            throw ShapeError("TridiagonalLdlt: rhs size mismatch");
        }
        if (n == 0) {
            return;
        }
        for (std::size_t i = 1; i < n; ++i) {
            x[i] -= l_[i - 1] * x[i - 1];
        }
        x[n - 1] /= d_[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) {
            x[i] = x[i] / d_[i] - l_[i] * x[i + 1];
        }
    }

private:
    std::vector<double> d_;
    std::vector<double> l_;
};

inline std::vector<double> solve_tridiagonal_spd(const SymTridiagonal& T, std::span<const double> rhs)
{
    if (rhs.size() != T.size()) {
        throw ShapeError("solve_tridiagonal_spd: rhs size mismatch");
    }
    std::vector<double> x(rhs.begin(), rhs.end());
    TridiagonalLdlt(T).solve_in_place(x);
    return x;
}

/// max_i |(T x - b)_i|
inline double residual_inf(const SymTridiagonal& T, std::span<const double> x, std::span<const double> b)
{
    const auto y = T * x;
    double r = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        r = std::max(r, std::abs(y[i] - b[i]));
    }
    return r;
}

inline double norm_inf(std::span<const double> v)
{
    double r = 0.0;
    for (double x : v) {
        r = std::max(r, std::abs(x));
    }
    return r;
}

} // namespace lhom
