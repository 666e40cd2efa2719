#pragma once

// Nonlinear interference under the incoherent GN model.
//
// Ground truth ("oracle") coefficients come from numerical integration of the
// GN double integral evaluated at the centre of the channel under test (CUT)
// and multiplied by its symbol rate. With u = f1 - f, v = f2 - f the single-span
// kernel depends on w = u*v only:
//
//   rho(w) = |1 - exp(-a L) exp(j c L w)|^2 / (a^2 + c^2 w^2),   c = 4 pi^2 beta2
//
// For a region {u in [a1,b1], v in [a2,b2], u+v in [a3,b3]} the inner
// integral over v has the closed antiderivative (F(u*v_hi) - F(u*v_lo)) / u,
// where F(x) = int_0^x rho(w) dw. F is tabulated once per span, leaving an
// adaptive one-dimensional outer integral. full_spectrum_integral() instead
// integrates rho in two dimensions directly and serves as the independent
// check of the pairwise (SCI + XCI) decomposition.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "phys.hpp"
#include "quadrature.hpp"
#include "sci_store.hpp"

namespace nliconquer {

namespace nli_detail {
inline constexpr double gn_prefactor = 16.0 / 27.0;
inline constexpr double cf_sci_prefactor = 8.0 / 27.0;
inline constexpr double pi = std::numbers::pi;
}  // namespace nli_detail

/// Span constants in km / s^2 / Hz units.
struct SpanKernel {
    double alpha = 0.0;  // Np/km
    double c = 0.0;      // 4 pi^2 beta2, s^2/km
    double length = 0.0; // km

    SpanKernel(const FiberParams& fiber, double span_length_km)
        : alpha(fiber.alpha_np_per_km()),
          c(4.0 * nli_detail::pi * nli_detail::pi * fiber.beta2_s2_per_km()),
          length(span_length_km) {}

    double kappa() const { return alpha * length; }
    double effective_length() const { return -std::expm1(-kappa()) / alpha; }

    /// rho as a function of w = u*v (Hz^2), in km^2.
    double rho_w(double w) const {
        const double e = std::exp(-kappa());
        const double phase = c * length * w;
        // (1 - e)^2 + 2e(1 - cos) keeps precision near w = 0.
        const double s = std::sin(0.5 * phase);
        const double num = (1.0 - e) * (1.0 - e) + 4.0 * e * s * s;
        const double cw = c * w;
        return num / (alpha * alpha + cw * cw);
    }
};

/// Single-span GN kernel for frequency offsets u, v (GHz) from the CUT centre.
inline double kernel_rho(const FiberParams& fiber, double span_length_km, double u_ghz,
                         double v_ghz) {
    return SpanKernel(fiber, span_length_km).rho_w(u_ghz * 1e9 * v_ghz * 1e9);
}

/// Tabulated antiderivative F(x) = int_0^x rho(w) dw (x in Hz^2, result in km^2 Hz^2).
///
/// With t = |c| w / a the integral splits into an arctan part and
/// g(T) = int_0^T cos(kappa t) / (1 + t^2) dt. g is stored on a uniform grid
/// together with its exact derivative and interpolated by cubic Hermite
/// polynomials; beyond the table an asymptotic tail is used.
class KernelPrimitive {
public:
    static constexpr double step = 0.01;
    static constexpr double t_max = 400.0;

    explicit KernelPrimitive(const SpanKernel& k)
        : alpha_(k.alpha), c_abs_(std::abs(k.c)), kappa_(k.kappa()),
          e1_(std::exp(-k.kappa())), e2_(std::exp(-2.0 * k.kappa())) {
        const auto n = static_cast<std::size_t>(std::lround(t_max / step)) + 2;
        g_.resize(n);
        dg_.resize(n);
        // Five-point Gauss-Legendre per cell; cos(kappa t) varies by < 0.06 rad per cell.
        static constexpr std::array<double, 5> x = {-0.906179845938664, -0.538469310105683, 0.0,
                                                    0.538469310105683, 0.906179845938664};
        static constexpr std::array<double, 5> w = {0.236926885056189, 0.478628670499366,
                                                    0.568888888888889, 0.478628670499366,
                                                    0.236926885056189};
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) * step;
            g_[i] = acc;
            dg_[i] = integrand(t);
            const double mid = t + 0.5 * step;
            double cell = 0.0;
            for (std::size_t q = 0; q < 5; ++q) cell += w[q] * integrand(mid + 0.5 * step * x[q]);
            acc += 0.5 * step * cell;
        }
        g_inf_ = 0.5 * nli_detail::pi * e1_;
    }

    /// g(T) for T >= 0.
    double g(double t) const {
        if (t >= t_max) {
            // Two integration-by-parts terms of int_T^inf cos(kt)/(1+t^2) dt.
            const double q = 1.0 + t * t;
            const double tail = -std::sin(kappa_ * t) / (kappa_ * q) -
                                2.0 * t * std::cos(kappa_ * t) / (kappa_ * kappa_ * q * q);
            return g_inf_ - tail;
        }
        const double s = t / step;
        const auto i = static_cast<std::size_t>(s);
        const double h = s - static_cast<double>(i);
        const double h2 = h * h, h3 = h2 * h;
        const double h00 = 2 * h3 - 3 * h2 + 1, h10 = h3 - 2 * h2 + h;
        const double h01 = -2 * h3 + 3 * h2, h11 = h3 - h2;
        return h00 * g_[i] + h10 * step * dg_[i] + h01 * g_[i + 1] + h11 * step * dg_[i + 1];
    }

    /// F(x), odd in x.
    double operator()(double x) const {
        const double t = c_abs_ * std::abs(x) / alpha_;
        const double val = ((1.0 + e2_) * std::atan(t) - 2.0 * e1_ * g(t)) / (alpha_ * c_abs_);
        return x < 0 ? -val : val;
    }

    /// F(+inf).
    double limit() const {
        return 0.5 * nli_detail::pi * (1.0 - e2_) / (alpha_ * c_abs_);
    }

private:
    double integrand(double t) const { return std::cos(kappa_ * t) / (1.0 + t * t); }

    double alpha_, c_abs_, kappa_, e1_, e2_;
    double g_inf_ = 0.0;
    std::vector<double> g_;
    std::vector<double> dg_;
};

namespace nli_detail {

/// Process-wide table cache keyed by (alpha, |c|, L).
inline std::shared_ptr<const KernelPrimitive> primitive_for(const SpanKernel& k) {
    static std::mutex mutex;
    static std::map<std::array<double, 3>, std::shared_ptr<const KernelPrimitive>> tables;
    const std::array<double, 3> key{k.alpha, std::abs(k.c), k.length};
    std::lock_guard lock(mutex);
    auto& slot = tables[key];
    if (!slot) slot = std::make_shared<const KernelPrimitive>(k);
    return slot;
}

/// Geometry of {u in [a1,b1], v in [a2,b2], u+v in [a3,b3]}: u-range and kinks.
struct StripRegion {
    double a1, b1, a2, b2, a3, b3;

    double u_min() const { return std::max(a1, a3 - b2); }
    double u_max() const { return std::min(b1, b3 - a2); }
    double v_lo(double u) const { return std::max(a2, a3 - u); }
    double v_hi(double u) const { return std::min(b2, b3 - u); }
    bool empty() const { return !(u_max() > u_min()); }

    std::vector<double> breaks(bool split_at_zero) const {
        std::vector<double> out{u_min(), u_max()};
        for (double k : {a3 - a2, b3 - b2}) out.push_back(k);
        if (split_at_zero) out.push_back(0.0);
        std::sort(out.begin(), out.end());
        std::vector<double> inside;
        for (double x : out)
            if (x >= u_min() && x <= u_max() &&
                (inside.empty() || x > inside.back()))
                inside.push_back(x);
        return inside;
    }
};

}  // namespace nli_detail

/// int int rho du dv over a strip region (all bounds in Hz), via the tabulated
/// primitive and an adaptive outer integral. Result in km^2 Hz^2.
inline double strip_region_integral(const SpanKernel& kernel, const nli_detail::StripRegion& r,
                                    const quad::Options& opt = {}) {
    if (r.empty()) return 0.0;
    const auto prim = nli_detail::primitive_for(kernel);
    const double rho0 = kernel.rho_w(0.0);
    const double scale = std::abs(kernel.c) / kernel.alpha;
    auto inner = [&](double u) {
        const double lo = r.v_lo(u), hi = r.v_hi(u);
        if (!(hi > lo)) return 0.0;
        if (scale * std::abs(u) * std::max(std::abs(lo), std::abs(hi)) < 1e-7)
            return rho0 * (hi - lo);
        return ((*prim)(u * hi) - (*prim)(u * lo)) / u;
    };
    return quad::integrate_piecewise(inner, r.breaks(true), opt).value;
}

/// Same integral evaluated by brute-force two-dimensional cubature of rho.
inline double strip_region_integral_2d(const SpanKernel& kernel,
                                       const nli_detail::StripRegion& r,
                                       const quad::Options& opt = {}) {
    if (r.empty()) return 0.0;
    const auto br = r.breaks(false);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < br.size(); ++i) {
        // v = lo(u) + s (hi(u) - lo(u)), s in [0,1]; lo/hi are linear on the piece.
        auto f = [&](double u, double s) {
            const double lo = r.v_lo(u), hi = r.v_hi(u);
            if (!(hi > lo)) return 0.0;
            const double v = lo + s * (hi - lo);
            return kernel.rho_w(u * v) * (hi - lo);
        };
        total += quad::integrate_2d(f, br[i], br[i + 1], 0.0, 1.0, opt).value;
    }
    return total;
}

namespace nli_detail {
inline StripRegion band(double lo1, double hi1, double lo2, double hi2, double lo3, double hi3) {
    return {lo1, hi1, lo2, hi2, lo3, hi3};
}
}  // namespace nli_detail

/// Per-span SCI coefficient eta (1/W^2) of a channel with the given symbol rate.
inline double sci_integral(const FiberParams& fiber, double symbol_rate_gbd,
                           double span_length_km, const quad::Options& opt = {}) {
    if (!(symbol_rate_gbd > 0.0)) throw DomainError("sci_integral: symbol rate must be > 0");
    const SpanKernel k(fiber, span_length_km);
    const double r = symbol_rate_gbd * 1e9, h = 0.5 * r;
    const double area = strip_region_integral(k, nli_detail::band(-h, h, -h, h, -h, h), opt);
    const double g = fiber.gamma_per_w_km;
    return nli_detail::gn_prefactor * g * g * area / (r * r);
}

/// Per-span XCI coefficient of one interferer, normalised so that the
/// interference power is eta * P_cut * P_interferer^2.
inline double xci_pair_integral(const FiberParams& fiber, double cut_rate_gbd,
                                double interferer_rate_gbd, double delta_f_ghz,
                                double span_length_km, const quad::Options& opt = {}) {
    if (!(cut_rate_gbd > 0.0) || !(interferer_rate_gbd > 0.0))
        throw DomainError("xci_pair_integral: symbol rates must be > 0");
    if (std::abs(delta_f_ghz) < 0.5 * (cut_rate_gbd + interferer_rate_gbd) - 1e-9)
        throw DomainError("xci_pair_integral: channels overlap (|df| = " +
                          std::to_string(std::abs(delta_f_ghz)) + " GHz)");
    const SpanKernel k(fiber, span_length_km);
    const double hc = 0.5 * cut_rate_gbd * 1e9;
    const double rk = interferer_rate_gbd * 1e9;
    const double lo = delta_f_ghz * 1e9 - 0.5 * rk, hi = delta_f_ghz * 1e9 + 0.5 * rk;
    // f1 and f1+f2-f in the interferer, f2 in the CUT; the mirrored region
    // (f1 <-> f2) contributes equally.
    const double area = strip_region_integral(k, nli_detail::band(lo, hi, -hc, hc, lo, hi), opt);
    const double g = fiber.gamma_per_w_km;
    return nli_detail::gn_prefactor * g * g * 2.0 * area / (rk * rk);
}

/// Brute-force NLI power (W, one span) at the CUT centre times its symbol rate,
/// integrating every (i, j, k) channel triple of the full spectrum in two
/// dimensions. Includes four-wave-mixing islands the pairwise model neglects.
inline double full_spectrum_integral(const FiberParams& fiber, const LinkConfig& link,
                                     std::size_t cut_index, const quad::Options& opt = {}) {
    if (link.channels.empty()) return 0.0;
    if (link.channels.size() > 5)
        throw DomainError("full_spectrum_integral: at most 5 channels supported");
    if (cut_index >= link.channels.size())
        throw DomainError("full_spectrum_integral: cut index out of range");
    const SpanKernel k(fiber, link.span_length_km);
    const auto& cut = link.channels[cut_index];
    struct Band {
        double lo, hi, psd;
    };
    std::vector<Band> bands;
    for (const auto& ch : link.channels) {
        const double off = (ch.center_freq_ghz - cut.center_freq_ghz) * 1e9;
        const double r = ch.symbol_rate_gbd * 1e9;
        bands.push_back({off - 0.5 * r, off + 0.5 * r, ch.power_w() / r});
    }
    const double g = fiber.gamma_per_w_km;
    const double rc = cut.symbol_rate_gbd * 1e9;
    const auto& b = bands[cut_index];
    const double sci_area =
        strip_region_integral_2d(k, nli_detail::band(b.lo, b.hi, b.lo, b.hi, b.lo, b.hi), opt);
    quad::Options piece = opt;
    piece.abs_tol = opt.rel_tol * sci_area * 1e-2;
    double sigma2 = 0.0;
    const std::size_t n = bands.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t m = 0; m < n; ++m) {
                const auto region = nli_detail::band(bands[i].lo, bands[i].hi, bands[j].lo,
                                                     bands[j].hi, bands[m].lo, bands[m].hi);
                if (region.empty()) continue;
                const bool is_sci = i == cut_index && j == cut_index && m == cut_index;
                const double area = is_sci ? sci_area : strip_region_integral_2d(k, region, piece);
                sigma2 += bands[i].psd * bands[j].psd * bands[m].psd * area;
            }
    return nli_detail::gn_prefactor * g * g * rc * sigma2;
}

/// Closed-form per-span SCI coefficient.
inline double closed_form_sci(const FiberParams& fiber, double symbol_rate_gbd,
                              double span_length_km) {
    const double leff = effective_length(fiber.alpha_db_per_km, span_length_km);
    const double la = asymptotic_effective_length(fiber.alpha_db_per_km);
    const double b2 = std::abs(fiber.beta2_s2_per_km());
    const double r = symbol_rate_gbd * 1e9;
    const double x = b2 * la * r * r;
    const double g = fiber.gamma_per_w_km;
    return nli_detail::cf_sci_prefactor * g * g * leff * leff *
           std::asinh(0.5 * nli_detail::pi * nli_detail::pi * x) / (nli_detail::pi * x);
}

/// Closed-form per-span XCI coefficient of an interferer at spacing delta_f.
inline double closed_form_xci(const FiberParams& fiber, double interferer_rate_gbd,
                              double delta_f_ghz, double span_length_km) {
    const double df = std::abs(delta_f_ghz);
    const double half = 0.5 * interferer_rate_gbd;
    if (!(df > half))
        throw DomainError("closed_form_xci: |df| must exceed half the interferer rate");
    const double leff = effective_length(fiber.alpha_db_per_km, span_length_km);
    const double la = asymptotic_effective_length(fiber.alpha_db_per_km);
    const double b2 = std::abs(fiber.beta2_s2_per_km());
    const double rk = interferer_rate_gbd * 1e9;
    const double g = fiber.gamma_per_w_km;
    return nli_detail::gn_prefactor * g * g * leff * leff * std::log((df + half) / (df - half)) /
           (nli_detail::pi * b2 * la * rk * rk);
}

/// Closed-form NLI power (W) on the CUT over the whole link.
inline double closed_form_nli(const FiberParams& fiber, const LinkConfig& link,
                              std::size_t cut_index) {
    if (cut_index >= link.channels.size())
        throw DomainError("closed_form_nli: cut index out of range");
    const auto& cut = link.channels[cut_index];
    const double pc = cut.power_w();
    double per_span = closed_form_sci(fiber, cut.symbol_rate_gbd, link.span_length_km) * pc * pc * pc;
    for (std::size_t k = 0; k < link.channels.size(); ++k) {
        if (k == cut_index) continue;
        const auto& ch = link.channels[k];
        const double pk = ch.power_w();
        per_span += closed_form_xci(fiber, ch.symbol_rate_gbd,
                                    ch.center_freq_ghz - cut.center_freq_ghz,
                                    link.span_length_km) *
                    pc * pk * pk;
    }
    return link.span_count * per_span;
}

/// Oracle coefficients backed by a SciStore; misses are integrated with the
/// dequantized key so stored values are a pure function of the key.
class OracleCoefficients {
public:
    OracleCoefficients(FiberParams fiber, SciStore& store, quad::Options opt = {})
        : fiber_(fiber), store_(&store), opt_(opt) {}

    double sci(double cut_rate_gbd, double span_length_km) const {
        return store_->get_or_compute(CoeffKey::sci(cut_rate_gbd, span_length_km),
                                      [&](const CoeffKey& k) {
                                          return sci_integral(fiber_, k.cut_rate_gbd(),
                                                              k.span_length_km(), opt_);
                                      });
    }

    double xci(double cut_rate_gbd, double interferer_rate_gbd, double delta_f_ghz,
               double span_length_km) const {
        return store_->get_or_compute(
            CoeffKey::xci(cut_rate_gbd, interferer_rate_gbd, delta_f_ghz, span_length_km),
            [&](const CoeffKey& k) {
                return xci_pair_integral(fiber_, k.cut_rate_gbd(), k.interferer_rate_gbd(),
                                         k.delta_f_ghz(), k.span_length_km(), opt_);
            });
    }

    const FiberParams& fiber() const { return fiber_; }
    SciStore& store() const { return *store_; }

private:
    FiberParams fiber_;
    SciStore* store_;
    quad::Options opt_;
};

/// Oracle NLI power (W) on the CUT over the whole link: pairwise SCI + XCI,
/// accumulated incoherently over spans.
inline double oracle_nli(const OracleCoefficients& coeffs, const LinkConfig& link,
                         std::size_t cut_index) {
    if (cut_index >= link.channels.size()) throw DomainError("oracle_nli: cut index out of range");
    const auto& cut = link.channels[cut_index];
    const double pc = cut.power_w();
    double per_span = coeffs.sci(cut.symbol_rate_gbd, link.span_length_km) * pc * pc * pc;
    for (std::size_t k = 0; k < link.channels.size(); ++k) {
        if (k == cut_index) continue;
        const auto& ch = link.channels[k];
        const double pk = ch.power_w();
        per_span += coeffs.xci(cut.symbol_rate_gbd, ch.symbol_rate_gbd,
                               ch.center_freq_ghz - cut.center_freq_ghz, link.span_length_km) *
                    pc * pk * pk;
    }
    return link.span_count * per_span;
}

}  // namespace nliconquer
