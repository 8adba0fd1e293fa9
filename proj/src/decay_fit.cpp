#include "zeropi/raman.hpp"

#include "zeropi/errors.hpp"
#include "zeropi/optimize.hpp"
#include "zeropi/units.hpp"

#include <algorithm>
#include <cmath>

namespace zeropi::raman {

namespace {

// Linear least squares for fixed nonlinear parameters; returns the residual sum of squares.
double linear_fit(const RMatrix& a, const RVector& y, RVector& coeff)
{
    coeff = a.colPivHouseholderQr().solve(y);
    return (a * coeff - y).squaredNorm();
}

RMatrix exp_design(const RVector& t, double rate)
{
    RMatrix a(t.size(), 2);
    for (long i = 0; i < t.size(); ++i) {
        a(i, 0) = std::exp(-rate * t[i]);
        a(i, 1) = 1.0;
    }
    return a;
}

RMatrix exp_cos_design(const RVector& t, double rate, double w)
{
    RMatrix a(t.size(), 3);
    for (long i = 0; i < t.size(); ++i) {
        const double e = std::exp(-rate * t[i]);
        a(i, 0) = e * std::cos(w * t[i]);
        a(i, 1) = e * std::sin(w * t[i]);
        a(i, 2) = 1.0;
    }
    return a;
}

}  // namespace

DecayFit fit_decay(const std::vector<double>& tv, const std::vector<double>& yv, DecayModel model)
{
    require(tv.size() == yv.size(), "fit_decay: t and y lengths differ");
    require(tv.size() >= 8, "fit_decay: need at least 8 samples");
    for (std::size_t i = 0; i < tv.size(); ++i)
        require(std::isfinite(tv[i]) && std::isfinite(yv[i]), "fit_decay: samples must be finite");
    const long n = static_cast<long>(tv.size());
    const RVector t = Eigen::Map<const RVector>(tv.data(), n);
    const RVector y = Eigen::Map<const RVector>(yv.data(), n);
    const double span = t.maxCoeff() - t.minCoeff();
    require(span > 0.0, "fit_decay: t must span a nonzero interval");

    DecayFit fit;
    fit.model = model;
    RVector coeff;

    // Grid search over rates (and frequencies) with the linear parameters eliminated.
    const int nr = 200;
    auto rate_at = [&](int i) { return std::pow(10.0, -3.0 + 5.0 * i / (nr - 1)) / span; };
    if (model == DecayModel::exp) {
        double best = INFINITY, rate = 0.0;
        for (int i = 0; i < nr; ++i) {
            const double r = rate_at(i);
            const double s = linear_fit(exp_design(t, r), y, coeff);
            if (s < best) {
                best = s;
                rate = r;
            }
        }
        linear_fit(exp_design(t, rate), y, coeff);
        RVector x0(3);
        x0 << coeff[0], rate, coeff[1];
        auto res = [&](const RVector& x) {
            RVector r(n);
            for (long i = 0; i < n; ++i) r[i] = x[0] * std::exp(-x[1] * t[i]) + x[2] - y[i];
            return r;
        };
        const optimize::Result r = optimize::levenberg_marquardt(res, x0, std::nullopt);
        fit.amplitude = r.x[0];
        fit.rate = r.x[1];
        fit.offset = r.x[2];
        fit.residual_rms = std::sqrt(res(r.x).squaredNorm() / n);
        fit.converged = r.converged;
        fit.status = r.status;
        fit.trace = r.trace;
        return fit;
    }

    // Frequencies up to the Nyquist limit of the mean spacing.
    const double w_max = units::pi * (n - 1) / span;
    const int nw = 400;
    double best = INFINITY, rate = 0.0, w = 0.0;
    for (int j = 1; j <= nw; ++j) {
        const double wj = w_max * j / nw;
        for (int i = 0; i < nr; i += 4) {
            const double r = rate_at(i);
            const double s = linear_fit(exp_cos_design(t, r, wj), y, coeff);
            if (s < best) {
                best = s;
                rate = r;
                w = wj;
            }
        }
    }
    linear_fit(exp_cos_design(t, rate, w), y, coeff);
    RVector x0(5);
    x0 << std::hypot(coeff[0], coeff[1]), rate, w, std::atan2(-coeff[1], coeff[0]), coeff[2];
    auto res = [&](const RVector& x) {
        RVector r(n);
        for (long i = 0; i < n; ++i) r[i] = x[0] * std::exp(-x[1] * t[i]) * std::cos(x[2] * t[i] + x[3]) + x[4] - y[i];
        return r;
    };
    const optimize::Result r = optimize::levenberg_marquardt(res, x0, std::nullopt);
    fit.amplitude = r.x[0];
    fit.rate = r.x[1];
    fit.frequency = r.x[2];
    fit.phase = r.x[3];
    fit.offset = r.x[4];
    if (fit.amplitude < 0.0) {
        fit.amplitude = -fit.amplitude;
        fit.phase += units::pi;
    }
    if (fit.frequency < 0.0) {
        fit.frequency = -fit.frequency;
        fit.phase = -fit.phase;
    }
    fit.phase = std::remainder(fit.phase, units::two_pi);
    fit.residual_rms = std::sqrt(res(r.x).squaredNorm() / n);
    fit.converged = r.converged;
    fit.status = r.status;
    fit.trace = r.trace;
    return fit;
}

}  // namespace zeropi::raman
