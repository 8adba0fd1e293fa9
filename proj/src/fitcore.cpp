#include "zeropi/fitcore.hpp"
#include "zeropi/errors.hpp"
#include "zeropi/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <tuple>

namespace zeropi::fitcore {

namespace {

// Level energies of |i,0> measured from |0,0>, and drive weights of 0 -> i.
struct BiasModel {
    std::vector<double> levels;
    std::vector<double> weights;
    double strongest = 0.0;
};

BiasModel bias_model(const ZeroPiParams& p, const FitSettings& s, const PhiOperators& ops)
{
    EigenPairs ep = lowest_eigenpairs(build_hamiltonian(p, s.basis, ops), s.k_levels, true);
    Spectrum sp;
    sp.eigenvalues = std::move(ep.values);
    sp.eigenvectors = std::move(ep.vectors);
    sp.basis = s.basis;
    sp.phi_zpf = ops.zpf;
    sp.n_g = p.reduced_ng();
    sp.flux = p.flux;

    BiasModel m;
    const int k = s.k_levels;
    m.levels.assign(k, 0.0);
    m.weights.assign(k, 0.0);
    if (s.resonator) {
        CoupledOptions co;
        co.k_qubit = k;
        co.initial = {0};
        co.from_one_photon = false;
        const CoupledSpectrum cs = coupled_spectrum(sp, p.beta_phi, p.beta_theta, s.resonator_params, co);
        const DressedState* g = cs.find(0, 0);
        if (!g) throw NumericalError("dressed ground state not found");
        for (int i = 0; i < k; ++i) {
            const DressedState* d = cs.find(i, 0);
            if (!d) throw NumericalError("dressed level |" + std::to_string(i) + ",0> not found");
            m.levels[i] = d->energy - g->energy;
        }
        for (const auto& t : cs.transitions)
            if (t.from.qubit == 0 && t.from.photons == 0 && t.to.photons == 0) m.weights[t.to.qubit] = t.weight;
    } else {
        for (int i = 0; i < k; ++i) m.levels[i] = sp.eigenvalues[i] - sp.eigenvalues[0];
        for (const auto& t : transitions_from_spectrum(sp, {0}, p.beta_phi, p.beta_theta))
            m.weights[t.to] = t.drive_weight;
    }
    for (int i = 1; i < k; ++i) m.strongest = std::max(m.strongest, m.weights[i]);
    return m;
}

std::string describe(const ZeroPiParams& p)
{
    std::ostringstream os;
    os << "E_C_phi=" << p.E_C_phi << " E_C_theta=" << p.E_C_theta << " E_J=" << p.E_J << " E_L=" << p.E_L
       << " dE_J=" << p.dE_J << " beta_phi=" << p.beta_phi << " beta_theta=" << p.beta_theta
       << " g=" << p.g_phi_theta;
    return os.str();
}

struct BiasKey {
    double flux;
    double n_g;
    bool operator<(const BiasKey& o) const { return std::tie(flux, n_g) < std::tie(o.flux, o.n_g); }
};

}  // namespace

std::vector<std::string> parameter_names(bool with_g)
{
    std::vector<std::string> n{"E_C_phi", "E_C_theta", "E_J", "E_L", "dE_J", "beta_phi", "beta_theta"};
    if (with_g) n.emplace_back("g_phi_theta");
    return n;
}

RVector pack(const ZeroPiParams& p, bool with_g)
{
    RVector x(n_fit_parameters + (with_g ? 1 : 0));
    x << p.E_C_phi, p.E_C_theta, p.E_J, p.E_L, p.dE_J, p.beta_phi, p.beta_theta;
    if (with_g) x[n_fit_parameters] = p.g_phi_theta;
    return x;
}

ZeroPiParams unpack(const RVector& x, const ZeroPiParams& base, bool with_g)
{
    require(x.size() == n_fit_parameters + (with_g ? 1 : 0), "unpack: wrong parameter count");
    ZeroPiParams p = base;
    p.E_C_phi = x[0];
    p.E_C_theta = x[1];
    p.E_J = x[2];
    p.E_L = x[3];
    p.dE_J = x[4];
    p.beta_phi = x[5];
    p.beta_theta = x[6];
    if (with_g) p.g_phi_theta = x[n_fit_parameters];
    return p;
}

std::vector<double> model_lines(const ZeroPiParams& p, const FitSettings& s)
{
    p.validate();
    const BiasModel m = bias_model(p, s, phi_operators(p.E_C_phi, p.E_L, s.basis.n_phi_max));
    return {m.levels.begin() + 1, m.levels.end()};
}

ResidualReport residuals(const ZeroPiParams& p, const std::vector<SpectroscopyDataset>& data, const FitSettings& s)
{
    p.validate();
    s.basis.validate();
    require(s.k_levels >= 2, "residuals: k_levels must be >= 2");
    require(s.window_ghz > 0.0 && s.penalty_ghz >= 0.0, "residuals: window must be positive, penalty non-negative");

    std::map<BiasKey, int> index;
    std::vector<BiasKey> keys;
    for (const auto& d : data) {
        d.validate();
        for (const auto& pt : d.points) {
            if (pt.label)
                require(pt.label->second < s.k_levels, d.name + ": label " + std::to_string(pt.label->second) +
                                                           " needs k_levels > " + std::to_string(pt.label->second));
            const BiasKey key{pt.flux, pt.n_g};
            if (index.emplace(key, static_cast<int>(keys.size())).second) keys.push_back(key);
        }
    }

    const PhiOperators ops = phi_operators(p.E_C_phi, p.E_L, s.basis.n_phi_max);
    std::vector<BiasModel> models(keys.size());
    try {
        parallel_for(static_cast<int>(keys.size()), s.workers, [&](int i) {
            ZeroPiParams q = p;
            q.flux = keys[i].flux;
            q.n_g = keys[i].n_g;
            models[i] = bias_model(q, s, ops);
        });
    } catch (const std::exception& e) {
        throw NumericalError(std::string("model evaluation failed at ") + describe(p) + ": " + e.what());
    }

    ResidualReport rep;
    long total = 0;
    for (const auto& d : data) total += static_cast<long>(d.points.size());
    rep.residuals.resize(total);
    long row = 0;
    for (int di = 0; di < static_cast<int>(data.size()); ++di) {
        const auto& d = data[di];
        for (int pi = 0; pi < static_cast<int>(d.points.size()); ++pi, ++row) {
            const DataPoint& pt = d.points[pi];
            const BiasModel& m = models[index.at({pt.flux, pt.n_g})];
            Assignment a;
            a.dataset = di;
            a.point = pi;
            double r = 0.0;
            if (pt.label) {
                a.from = pt.label->first;
                a.to = pt.label->second;
                a.model_frequency = m.levels[a.to] - m.levels[a.from];
                r = pt.frequency - a.model_frequency;
            } else {
                double best = std::numeric_limits<double>::infinity();
                for (int j = 1; j < s.k_levels; ++j) {
                    if (m.weights[j] < s.visibility_floor * m.strongest) continue;
                    const double dist = std::abs(pt.frequency - m.levels[j]);
                    if (dist < best) {
                        best = dist;
                        a.from = 0;
                        a.to = j;
                    }
                }
                if (a.to >= 0 && best <= s.window_ghz) {
                    a.model_frequency = m.levels[a.to];
                    r = pt.frequency - a.model_frequency;
                } else {
                    a.excluded = true;
                    if (a.to >= 0) a.model_frequency = m.levels[a.to];
                    r = s.penalty_ghz;
                }
            }
            rep.residuals[row] = r;
            rep.metric += pt.weight * r * r;
            rep.assignments.push_back(a);
        }
    }
    return rep;
}

void FitProblem::validate() const
{
    initial.validate();
    const bool g = settings.fit_g;
    const RVector x0 = pack(initial, g);
    require(bounds.lower.size() == x0.size() && bounds.upper.size() == x0.size(),
            "fit problem: bounds must cover " + std::to_string(x0.size()) + " parameters");
    for (int i = 0; i < x0.size(); ++i)
        require(std::isfinite(bounds.lower[i]) && std::isfinite(bounds.upper[i]),
                "fit problem: bounds must be finite");
    bounds.validate(x0);
    require(bounds.lower[0] > 0 && bounds.lower[1] > 0 && bounds.lower[2] > 0 && bounds.lower[3] > 0,
            "fit problem: energy bounds must be positive");
    require(bounds.lower[4] >= 0, "fit problem: dE_J bound must be non-negative");
}

optimize::Bounds default_bounds(const ZeroPiParams& initial, bool with_g, double lo, double hi)
{
    require(lo > 0 && lo < 1 && hi > 1, "default_bounds: need 0 < lo < 1 < hi");
    const RVector x = pack(initial, with_g);
    optimize::Bounds b{x, x};
    for (int i : {0, 1, 2, 3, 5, 6}) {
        const double a = std::abs(x[i]);
        require(a > 0, "default_bounds: " + parameter_names(with_g)[i] + " must be non-zero");
        b.lower[i] = std::copysign(x[i] > 0 ? lo * a : hi * a, x[i]);
        b.upper[i] = std::copysign(x[i] > 0 ? hi * a : lo * a, x[i]);
        if (x[i] < 0) std::swap(b.lower[i], b.upper[i]);
        if (b.lower[i] > b.upper[i]) std::swap(b.lower[i], b.upper[i]);
    }
    b.lower[4] = 0.0;
    b.upper[4] = std::max(0.5, 2.0 * x[4]);
    if (with_g) {
        b.lower[n_fit_parameters] = -0.1;
        b.upper[n_fit_parameters] = 0.1;
    }
    return b;
}

FitResult fit_spectrum(const FitProblem& problem, const std::vector<SpectroscopyDataset>& data)
{
    problem.validate();
    require(!data.empty(), "fit_spectrum: no datasets");
    FitSettings s = problem.settings;
    const bool g = s.fit_g;
    const RVector x0 = pack(problem.initial, g);

    long informative = 0;
    for (const auto& d : data)
        for (const auto& pt : d.points)
            if (pt.weight > 0) ++informative;
    require(informative >= x0.size(), "fit_spectrum: " + std::to_string(informative) +
                                          " informative points for " + std::to_string(x0.size()) + " parameters");

    if (s.converge_basis) {
        const ConvergenceReport cr = converge_basis(problem.initial, s.basis_tol, s.k_levels);
        if (!cr.converged) throw ConvergenceError("fit_spectrum: basis did not converge at the initial point");
        s.basis = cr.basis;
    }

    FitResult out;
    out.basis = s.basis;
    int evaluations = 0;
    auto metric = [&](const RVector& x) {
        ++evaluations;
        return residuals(unpack(x, problem.initial, g), data, s).metric;
    };
    auto weighted = [&](const RVector& x) {
        ++evaluations;
        const ResidualReport r = residuals(unpack(x, problem.initial, g), data, s);
        RVector w = r.residuals;
        long row = 0;
        for (const auto& d : data)
            for (const auto& pt : d.points) w[row++] *= std::sqrt(pt.weight);
        return w;
    };

    const optimize::Result nm = optimize::nelder_mead(metric, x0, problem.bounds, s.simplex);
    RVector best = nm.x;
    double best_f = nm.f;
    out.trace = nm.trace;
    out.converged = nm.converged;
    out.status = "simplex: " + nm.status;

    if (s.polish && best_f > 0.0) {
        const optimize::Result lm = optimize::levenberg_marquardt(weighted, best, problem.bounds, s.lm);
        for (std::size_t i = 1; i < lm.trace.size(); ++i) out.trace.push_back(std::min(out.trace.back(), lm.trace[i]));
        if (lm.f < best_f) {
            best = lm.x;
            best_f = lm.f;
        }
        out.converged = nm.converged || lm.converged;
        out.status += "; polish: " + lm.status;
    }

    out.best = unpack(best, problem.initial, g);
    out.report = residuals(out.best, data, s);
    out.metric = out.report.metric;
    ++evaluations;
    out.evaluations = evaluations;

    std::map<BiasKey, int> seen;
    FitSettings big = s;
    big.basis = {s.basis.n_theta_max + 2, s.basis.n_phi_max + 8};
    for (const auto& d : data) {
        for (const auto& pt : d.points) {
            if (!seen.emplace(BiasKey{pt.flux, pt.n_g}, 0).second) continue;
            ZeroPiParams q = out.best;
            q.flux = pt.flux;
            q.n_g = pt.n_g;
            const auto a = model_lines(q, s);
            const auto b = model_lines(q, big);
            for (std::size_t j = 0; j < a.size(); ++j)
                out.basis_shift_ghz = std::max(out.basis_shift_ghz, std::abs(a[j] - b[j]));
        }
    }
    return out;
}

SpectroscopyDataset synthetic_dataset(const ZeroPiParams& truth, const SyntheticOptions& opt, const FitSettings& s)
{
    require(!opt.flux.empty(), "synthetic_dataset: empty flux grid");
    require(opt.transitions >= 1 && opt.transitions < s.k_levels, "synthetic_dataset: need 1 <= transitions < k_levels");
    require(opt.noise_ghz >= 0.0, "synthetic_dataset: noise must be non-negative");
    SpectroscopyDataset d;
    std::ostringstream name;
    name << "synthetic n_g=" << opt.n_g;
    d.name = name.str();
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<std::vector<double>> lines(opt.flux.size());
    parallel_for(static_cast<int>(opt.flux.size()), s.workers, [&](int i) {
        ZeroPiParams q = truth;
        q.flux = opt.flux[i];
        q.n_g = opt.n_g;
        lines[i] = model_lines(q, s);
    });
    for (std::size_t i = 0; i < opt.flux.size(); ++i) {
        for (int j = 1; j <= opt.transitions; ++j) {
            DataPoint p;
            p.flux = opt.flux[i];
            p.n_g = opt.n_g;
            p.frequency = lines[i][j - 1] + (opt.noise_ghz > 0 ? opt.noise_ghz * noise(rng) : 0.0);
            if (opt.labeled) p.label = std::make_pair(0, j);
            d.points.push_back(p);
        }
    }
    d.validate();
    return d;
}

}  // namespace zeropi::fitcore
