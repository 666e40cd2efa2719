#pragma once

// Adaptive Gauss-Kronrod quadrature in one and two dimensions.
//
// Both integrators are globally adaptive: the panel with the largest embedded
// error estimate is bisected until the summed error drops below
// max(rel_tol * |I|, abs_tol). A panel that reaches max_depth is frozen; if the
// frozen panels alone keep the error above tolerance, QuadratureError is thrown
// carrying the best estimate.

#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace nliconquer::quad {

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(double estimate, double error, double tolerance)
        : std::runtime_error("quadrature did not converge: estimate " + std::to_string(estimate) +
                             ", error " + std::to_string(error) + ", tolerance " +
                             std::to_string(tolerance)),
          estimate_(estimate), error_(error), tolerance_(tolerance) {}

    double estimate() const { return estimate_; }
    double error() const { return error_; }
    double tolerance() const { return tolerance_; }

private:
    double estimate_;
    double error_;
    double tolerance_;
};

struct Options {
    double rel_tol = 1e-4;
    double abs_tol = 0.0;
    int max_depth = 14;
};

struct Result {
    double value = 0.0;
    double error = 0.0;
    std::size_t evaluations = 0;
};

namespace detail {

// 15-point Kronrod nodes on [-1, 1] (non-negative half) with the embedded
// 7-point Gauss weights on the odd-indexed nodes.
inline constexpr std::array<double, 8> kronrod_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_w = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss_w = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

/// The 15 nodes on [-1,1] in ascending order with Kronrod and Gauss weights
/// (Gauss weight zero on the non-Gauss nodes).
struct Rule15 {
    std::array<double, 15> x{};
    std::array<double, 15> wk{};
    std::array<double, 15> wg{};
};

inline const Rule15& rule15() {
    static const Rule15 r = [] {
        Rule15 out;
        for (int i = 0; i < 7; ++i) {
            out.x[static_cast<std::size_t>(i)] = -kronrod_x[static_cast<std::size_t>(i)];
            out.x[static_cast<std::size_t>(14 - i)] = kronrod_x[static_cast<std::size_t>(i)];
            out.wk[static_cast<std::size_t>(i)] = kronrod_w[static_cast<std::size_t>(i)];
            out.wk[static_cast<std::size_t>(14 - i)] = kronrod_w[static_cast<std::size_t>(i)];
            if (i % 2 == 1) {
                out.wg[static_cast<std::size_t>(i)] = gauss_w[static_cast<std::size_t>(i / 2)];
                out.wg[static_cast<std::size_t>(14 - i)] =
                    gauss_w[static_cast<std::size_t>(i / 2)];
            }
        }
        out.x[7] = 0.0;
        out.wk[7] = kronrod_w[7];
        out.wg[7] = gauss_w[3];
        return out;
    }();
    return r;
}

struct Panel1 {
    double a, b, value, error;
    int depth;
    bool operator<(const Panel1& o) const { return error < o.error; }
};

template <class F>
Panel1 gk15(F& f, double a, double b, int depth, std::size_t& evals) {
    const auto& r = rule15();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double k = 0.0, g = 0.0;
    for (std::size_t i = 0; i < 15; ++i) {
        const double y = f(c + h * r.x[i]);
        k += r.wk[i] * y;
        g += r.wg[i] * y;
    }
    evals += 15;
    return {a, b, k * h, std::abs((k - g) * h), depth};
}

}  // namespace detail

/// Adaptive G7-K15 quadrature of f over [a, b].
template <class F>
Result integrate(F&& f, double a, double b, const Options& opt = {}) {
    Result res;
    if (a == b) return res;
    std::priority_queue<detail::Panel1> active;
    std::vector<detail::Panel1> frozen;
    auto first = detail::gk15(f, a, b, 0, res.evaluations);
    double total = first.value, err = first.error;
    active.push(first);
    while (true) {
        const double tol = std::max(opt.rel_tol * std::abs(total), opt.abs_tol);
        if (err <= tol || active.empty()) {
            if (err > tol) throw QuadratureError(total, err, tol);
            break;
        }
        auto p = active.top();
        active.pop();
        if (p.depth >= opt.max_depth) {
            frozen.push_back(p);
            continue;
        }
        const double m = 0.5 * (p.a + p.b);
        auto l = detail::gk15(f, p.a, m, p.depth + 1, res.evaluations);
        auto r = detail::gk15(f, m, p.b, p.depth + 1, res.evaluations);
        total += l.value + r.value - p.value;
        err += l.error + r.error - p.error;
        active.push(l);
        active.push(r);
    }
    // Re-sum from the panels to shed the running-sum rounding.
    double v = 0.0, e = 0.0;
    while (!active.empty()) {
        v += active.top().value;
        e += active.top().error;
        active.pop();
    }
    for (const auto& p : frozen) {
        v += p.value;
        e += p.error;
    }
    res.value = v;
    res.error = e;
    return res;
}

/// Integrate over consecutive sub-intervals [breaks[i], breaks[i+1]] so that
/// known kinks fall on panel boundaries. The tolerance applies to the total.
template <class F>
Result integrate_piecewise(F&& f, const std::vector<double>& breaks, const Options& opt = {}) {
    Result total;
    if (breaks.size() < 2) return total;
    // Per-piece relative error bounds the relative error of a same-sign sum.
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i + 1] <= breaks[i]) continue;
        auto r = integrate(f, breaks[i], breaks[i + 1], opt);
        total.value += r.value;
        total.error += r.error;
        total.evaluations += r.evaluations;
    }
    return total;
}

namespace detail {

struct Panel2 {
    double x0, x1, y0, y1, value, error;
    int depth;
    int split_axis;  // 0: x, 1: y
    bool operator<(const Panel2& o) const { return error < o.error; }
};

template <class F>
Panel2 gk15x15(F& f, double x0, double x1, double y0, double y1, int depth, std::size_t& evals) {
    const auto& r = rule15();
    const double cx = 0.5 * (x0 + x1), hx = 0.5 * (x1 - x0);
    const double cy = 0.5 * (y0 + y1), hy = 0.5 * (y1 - y0);
    double kk = 0.0, gg = 0.0, kg = 0.0, gk = 0.0;  // (x-rule, y-rule)
    for (std::size_t i = 0; i < 15; ++i) {
        const double x = cx + hx * r.x[i];
        double row_k = 0.0, row_g = 0.0;
        for (std::size_t j = 0; j < 15; ++j) {
            const double v = f(x, cy + hy * r.x[j]);
            row_k += r.wk[j] * v;
            row_g += r.wg[j] * v;
        }
        kk += r.wk[i] * row_k;
        gk += r.wg[i] * row_k;
        kg += r.wk[i] * row_g;
        gg += r.wg[i] * row_g;
    }
    evals += 225;
    const double area = hx * hy;
    const double ex = std::abs(kk - gk) * area;  // error from the x-rule
    const double ey = std::abs(kk - kg) * area;  // error from the y-rule
    const double e = std::max(std::abs(kk - gg) * area, ex + ey);
    return {x0, x1, y0, y1, kk * area, e, depth, ex >= ey ? 0 : 1};
}

}  // namespace detail

/// Adaptive tensor-product G7-K15 cubature of f(x, y) over [x0,x1]x[y0,y1].
/// Panels are bisected along the axis whose one-dimensional error dominates.
template <class F>
Result integrate_2d(F&& f, double x0, double x1, double y0, double y1, const Options& opt = {}) {
    Result res;
    if (x0 == x1 || y0 == y1) return res;
    std::priority_queue<detail::Panel2> active;
    std::vector<detail::Panel2> frozen;
    auto first = detail::gk15x15(f, x0, x1, y0, y1, 0, res.evaluations);
    double total = first.value, err = first.error;
    active.push(first);
    while (true) {
        const double tol = std::max(opt.rel_tol * std::abs(total), opt.abs_tol);
        if (err <= tol || active.empty()) {
            if (err > tol) throw QuadratureError(total, err, tol);
            break;
        }
        auto p = active.top();
        active.pop();
        if (p.depth >= opt.max_depth) {
            frozen.push_back(p);
            continue;
        }
        detail::Panel2 a, b;
        if (p.split_axis == 0) {
            const double m = 0.5 * (p.x0 + p.x1);
            a = detail::gk15x15(f, p.x0, m, p.y0, p.y1, p.depth + 1, res.evaluations);
            b = detail::gk15x15(f, m, p.x1, p.y0, p.y1, p.depth + 1, res.evaluations);
        } else {
            const double m = 0.5 * (p.y0 + p.y1);
            a = detail::gk15x15(f, p.x0, p.x1, p.y0, m, p.depth + 1, res.evaluations);
            b = detail::gk15x15(f, p.x0, p.x1, m, p.y1, p.depth + 1, res.evaluations);
        }
        total += a.value + b.value - p.value;
        err += a.error + b.error - p.error;
        active.push(a);
        active.push(b);
    }
    double v = 0.0, e = 0.0;
    while (!active.empty()) {
        v += active.top().value;
        e += active.top().error;
        active.pop();
    }
    for (const auto& p : frozen) {
        v += p.value;
        e += p.error;
    }
    res.value = v;
    res.error = e;
    return res;
}

}  // namespace nliconquer::quad
