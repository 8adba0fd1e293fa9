#include "zeropi/errors.hpp"
#include "zeropi/optimize.hpp"
#include "zeropi/spectroscopy.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace zeropi {

std::pair<double, double> autler_townes_dispersion(double omega_q, double omega_c, double Omega_c, AtConvention c)
{
    require(Omega_c >= 0.0, "autler_townes_dispersion: Omega_c must be >= 0");
    const double d = omega_q - omega_c;
    const double root = std::sqrt(d * d + Omega_c * Omega_c);
    if (c == AtConvention::standard) return {0.5 * (d + root), 0.5 * (d - root)};
    return {d + root, d - root};
}

namespace {

// Residual to the nearer branch; branch[i] = +1 / -1 records the choice.
RVector branch_residuals(const std::vector<AtLine>& lines, double Omega, double wq, AtConvention c,
                         std::vector<int>* branch = nullptr)
{
    RVector r(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto [ep, em] = autler_townes_dispersion(wq, lines[i].omega_c, std::abs(Omega), c);
        const double rp = lines[i].frequency - ep;
        const double rm = lines[i].frequency - em;
        const bool plus = std::abs(rp) <= std::abs(rm);
        r[i] = plus ? rp : rm;
        if (branch) (*branch)[i] = plus ? 1 : -1;
    }
    return r;
}

}  // namespace

AtFit fit_autler_townes(const std::vector<AtLine>& lines, AtConvention c)
{
    require(lines.size() >= 4, "fit_autler_townes: need at least 4 lines");
    std::set<double> drives;
    double cmin = 1e300, cmax = -1e300, fmax = 0.0;
    for (const auto& l : lines) {
        require(std::isfinite(l.omega_c) && std::isfinite(l.frequency), "fit_autler_townes: non-finite line");
        drives.insert(l.omega_c);
        cmin = std::min(cmin, l.omega_c);
        cmax = std::max(cmax, l.omega_c);
        fmax = std::max(fmax, std::abs(l.frequency));
    }
    require(drives.size() >= 2, "fit_autler_townes: all lines share one coupler frequency");

    const double span = std::max(cmax - cmin, fmax);
    const double wq_lo = cmin - span, wq_hi = cmax + span;
    const double om_hi = 2.0 * fmax + span;

    // coarse grid, then simplex, then a least-squares polish with the branch choice frozen
    double best = 1e300, best_om = 0.0, best_wq = 0.5 * (cmin + cmax);
    for (int i = 0; i <= 200; ++i) {
        const double wq = wq_lo + (wq_hi - wq_lo) * i / 200.0;
        for (int j = 1; j <= 100; ++j) {
            const double om = om_hi * j / 100.0;
            const double sse = branch_residuals(lines, om, wq, c).squaredNorm();
            if (sse < best) {
                best = sse;
                best_om = om;
                best_wq = wq;
            }
        }
    }
    optimize::Bounds bounds{RVector(2), RVector(2)};
    bounds.lower << 0.0, wq_lo;
    bounds.upper << om_hi, wq_hi;
    RVector x0(2);
    x0 << best_om, best_wq;
    optimize::NelderMeadOptions nm;
    nm.initial_step = 0.01;
    auto sse = [&](const RVector& x) { return branch_residuals(lines, x[0], x[1], c).squaredNorm(); };
    optimize::Result r = optimize::nelder_mead(sse, x0, bounds, nm);

    std::vector<int> branch(lines.size());
    branch_residuals(lines, r.x[0], r.x[1], c, &branch);
    auto frozen = [&](const RVector& x) {
        RVector out(lines.size());
        for (std::size_t i = 0; i < lines.size(); ++i) {
            const auto [ep, em] = autler_townes_dispersion(x[1], lines[i].omega_c, std::abs(x[0]), c);
            out[i] = lines[i].frequency - (branch[i] > 0 ? ep : em);
        }
        return out;
    };
    optimize::Result polish = optimize::levenberg_marquardt(frozen, r.x, bounds);
    const RVector xf = polish.f <= r.f ? polish.x : r.x;

    AtFit fit;
    fit.Omega_c = std::abs(xf[0]);
    fit.omega_q = xf[1];
    const RVector res = branch_residuals(lines, xf[0], xf[1], c, &branch);
    double sp = 0.0, sm = 0.0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (branch[i] > 0) {
            sp += res[i] * res[i];
            ++fit.n_plus;
        } else {
            sm += res[i] * res[i];
            ++fit.n_minus;
        }
    }
    require(fit.n_plus > 0 && fit.n_minus > 0, "fit_autler_townes: lines do not span both branches");
    fit.rms = std::sqrt(res.squaredNorm() / lines.size());
    fit.rms_plus = std::sqrt(sp / fit.n_plus);
    fit.rms_minus = std::sqrt(sm / fit.n_minus);
    fit.converged = r.converged || polish.converged;
    return fit;
}

}  // namespace zeropi
