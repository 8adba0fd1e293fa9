#include "zeropi/optimize.hpp"
#include "zeropi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace zeropi::optimize {

void Bounds::validate(const RVector& x0) const
{
    require(lower.size() == x0.size() && upper.size() == x0.size(), "bounds: dimension mismatch");
    for (int i = 0; i < x0.size(); ++i) {
        require(std::isfinite(lower[i]) && std::isfinite(upper[i]) && lower[i] < upper[i],
                "bounds: parameter " + std::to_string(i) + " has non-finite or unordered bounds");
        require(x0[i] >= lower[i] && x0[i] <= upper[i],
                "bounds: initial value of parameter " + std::to_string(i) + " lies outside its bounds");
    }
}

RVector Bounds::clamp(const RVector& x) const { return x.cwiseMax(lower).cwiseMin(upper); }

Result nelder_mead(const Objective& f, const RVector& x0, const Bounds& bounds, const NelderMeadOptions& opt)
{
    bounds.validate(x0);
    const int n = static_cast<int>(x0.size());
    const RVector width = bounds.upper - bounds.lower;
    auto to_x = [&](const RVector& u) { return RVector(bounds.lower + width.cwiseProduct(u.cwiseMax(0.0).cwiseMin(1.0))); };

    const double alpha = 1.0;
    const double beta = 1.0 + 2.0 / n;
    const double gamma = 0.75 - 0.5 / n;
    const double delta = 1.0 - 1.0 / n;

    Result res;
    std::mt19937_64 rng(opt.seed);
    std::uniform_int_distribution<int> coin(0, 1);

    auto eval = [&](const RVector& u) {
        ++res.evaluations;
        const double v = f(to_x(u));
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    RVector best_u = (x0 - bounds.lower).cwiseQuotient(width);
    double best_f = eval(best_u);
    res.trace.push_back(best_f);

    for (int round = 0; round <= opt.restarts; ++round) {
        const double step = opt.initial_step * std::pow(0.5, round);
        std::vector<RVector> s(n + 1, best_u);
        std::vector<double> fv(n + 1, best_f);
        for (int i = 0; i < n; ++i) {
            double d = (round > 0 && coin(rng)) ? -step : step;
            if (best_u[i] + d > 1.0 || best_u[i] + d < 0.0) d = -d;
            s[i + 1][i] += d;
            fv[i + 1] = eval(s[i + 1]);
        }

        bool done = false;
        while (!done && res.evaluations < opt.max_evaluations) {
            std::vector<int> idx(n + 1);
            std::iota(idx.begin(), idx.end(), 0);
            std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
            std::vector<RVector> s2;
            std::vector<double> f2;
            for (int i : idx) {
                s2.push_back(s[i]);
                f2.push_back(fv[i]);
            }
            s.swap(s2);
            fv.swap(f2);

            double spread = 0.0, diam = 0.0;
            for (int i = 1; i <= n; ++i) {
                spread = std::max(spread, std::abs(fv[i] - fv[0]));
                diam = std::max(diam, (s[i] - s[0]).cwiseAbs().maxCoeff());
            }
            if (spread <= opt.f_tol && diam <= opt.x_tol) {
                done = true;
                break;
            }
            ++res.iterations;

            RVector centroid = RVector::Zero(n);
            for (int i = 0; i < n; ++i) centroid += s[i];
            centroid /= n;
            const RVector xr = centroid + alpha * (centroid - s[n]);
            const double fr = eval(xr);
            if (fr < fv[0]) {
                const RVector xe = centroid + beta * (xr - centroid);
                const double fe = eval(xe);
                if (fe < fr) {
                    s[n] = xe;
                    fv[n] = fe;
                } else {
                    s[n] = xr;
                    fv[n] = fr;
                }
            } else if (fr < fv[n - 1]) {
                s[n] = xr;
                fv[n] = fr;
            } else {
                const bool outside = fr < fv[n];
                const RVector xc = outside ? RVector(centroid + gamma * (xr - centroid))
                                           : RVector(centroid - gamma * (centroid - s[n]));
                const double fc = eval(xc);
                if (fc < std::min(fr, fv[n])) {
                    s[n] = xc;
                    fv[n] = fc;
                } else {
                    for (int i = 1; i <= n; ++i) {
                        s[i] = s[0] + delta * (s[i] - s[0]);
                        fv[i] = eval(s[i]);
                    }
                }
            }
            const int lo = static_cast<int>(std::min_element(fv.begin(), fv.end()) - fv.begin());
            if (fv[lo] < best_f) {
                best_f = fv[lo];
                best_u = s[lo].cwiseMax(0.0).cwiseMin(1.0);
            }
            res.trace.push_back(best_f);
        }
        res.converged = done;
        if (res.evaluations >= opt.max_evaluations) break;
    }
    res.x = to_x(best_u);
    res.f = best_f;
    res.status = res.converged ? "converged" : "evaluation budget exhausted";
    return res;
}

Result levenberg_marquardt(const Residuals& rfun, const RVector& x0, const std::optional<Bounds>& bounds,
                           const LevenbergMarquardtOptions& opt)
{
    if (bounds) bounds->validate(x0);
    const int n = static_cast<int>(x0.size());
    Result res;
    auto project = [&](const RVector& x) { return bounds ? bounds->clamp(x) : x; };

    RVector x = project(x0);
    RVector r = rfun(x);
    ++res.evaluations;
    double cost = r.squaredNorm();
    res.trace.push_back(cost);
    double lambda = opt.lambda;

    for (int it = 0; it < opt.max_iterations; ++it) {
        ++res.iterations;
        RMatrix jac(r.size(), n);
        for (int j = 0; j < n; ++j) {
            double scale = std::max(std::abs(x[j]), 1e-8);
            if (bounds) scale = std::max(scale, 1e-3 * (bounds->upper[j] - bounds->lower[j]));
            double h = opt.fd_step * scale;
            RVector xp = x;
            xp[j] += h;
            if (bounds && xp[j] > bounds->upper[j]) {
                h = -h;
                xp[j] = x[j] + h;
            }
            const RVector rp = rfun(xp);
            ++res.evaluations;
            jac.col(j) = (rp - r) / h;
        }
        const RMatrix jtj = jac.transpose() * jac;
        const RVector grad = jac.transpose() * r;
        if (grad.cwiseAbs().maxCoeff() == 0.0) {
            res.converged = true;
            res.status = "zero gradient";
            break;
        }

        bool improved = false;
        for (int attempt = 0; attempt < 12 && !improved; ++attempt) {
            RMatrix a = jtj;
            for (int j = 0; j < n; ++j) a(j, j) += lambda * std::max(jtj(j, j), 1e-30);
            const RVector step = a.ldlt().solve(-grad);
            const RVector xn = project(x + step);
            const RVector rn = rfun(xn);
            ++res.evaluations;
            const double cn = rn.squaredNorm();
            if (std::isfinite(cn) && cn < cost) {
                const double rel = (cost - cn) / std::max(cost, 1e-300);
                const double dx = (xn - x).cwiseAbs().maxCoeff() / std::max(x.cwiseAbs().maxCoeff(), 1e-300);
                x = xn;
                r = rn;
                cost = cn;
                lambda = std::max(lambda * 0.3, 1e-12);
                improved = true;
                if (rel < opt.f_tol || dx < opt.x_tol) res.converged = true;
            } else {
                lambda *= 10.0;
            }
        }
        res.trace.push_back(cost);
        if (!improved) {
            res.converged = true;
            res.status = "no further decrease";
            break;
        }
        if (res.converged) {
            res.status = "converged";
            break;
        }
    }
    if (res.status.empty()) res.status = "iteration limit reached";
    res.x = x;
    res.f = cost;
    return res;
}

}  // namespace zeropi::optimize
