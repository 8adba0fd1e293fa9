#include "zeropi/raman.hpp"

#include "zeropi/errors.hpp"
#include "zeropi/parallel.hpp"
#include "zeropi/units.hpp"

#include <algorithm>
#include <cmath>

namespace zeropi::raman {

std::string to_string(SequenceKind k)
{
    switch (k) {
    case SequenceKind::rabi_amplitude: return "rabi_amplitude";
    case SequenceKind::rabi_detuning: return "rabi_detuning";
    case SequenceKind::t1: return "t1";
    case SequenceKind::ramsey: return "ramsey";
    case SequenceKind::echo: return "echo";
    }
    return "unknown";
}

SequenceKind sequence_kind_from_string(const std::string& s)
{
    for (SequenceKind k : {SequenceKind::rabi_amplitude, SequenceKind::rabi_detuning, SequenceKind::t1,
                           SequenceKind::ramsey, SequenceKind::echo})
        if (to_string(k) == s) return k;
    throw ValidationError("unknown sequence kind '" + s + "'");
}

namespace {

struct Step {
    double amplitude = 0.0;  // 0 is a wait
    double duration = 0.0;   // waits only
};

// Lays out Raman pulse pairs and waits back to back from t = 0.
PulseSchedule lay_out(const std::vector<Step>& steps, double sigma, double& end)
{
    PulseSchedule s;
    double t = 0.0;
    for (const Step& st : steps) {
        if (st.amplitude > 0.0) {
            const double c = t + 2.0 * sigma;
            s.alpha.push_back(Pulse::gaussian(c, sigma, st.amplitude));
            s.beta.push_back(Pulse::gaussian(c, sigma, st.amplitude));
            t += 4.0 * sigma;
        } else {
            t += st.duration;
        }
    }
    end = t;
    return s;
}

std::array<double, 3> run(const LambdaSystem& sys, double Delta, double sigma, const std::vector<Step>& steps,
                          const LindbladOptions& opt, double* signal = nullptr)
{
    double end = 0.0;
    const PulseSchedule s = lay_out(steps, sigma, end);
    const Trajectory tr = lindblad_evolve(sys, s, Delta, {0.0, end}, opt);
    if (signal) *signal = tr.signal.back();
    return tr.populations.back();
}

double transfer(const LambdaSystem& sys, double Delta, double sigma, double amplitude, const LindbladOptions& opt)
{
    return run(sys, Delta, sigma, {{amplitude, 0.0}}, opt)[2];
}

double calibrate_pi(const LambdaSystem& sys, double Delta, double sigma, const LindbladOptions& opt, double& best)
{
    // Effective two-photon area: integral of Omega(t)^2 / (2 |Delta|) over the truncated gaussian.
    const double overlap = sigma * std::sqrt(units::pi) * std::erf(2.0);
    const double guess = Delta != 0.0 ? std::sqrt(units::two_pi * std::abs(Delta) / overlap) : 10.0 / sigma;
    const int n = 48;
    const double hi = 2.5 * guess;
    std::vector<double> p(n + 1, 0.0);
    for (int i = 1; i <= n; ++i) p[i] = transfer(sys, Delta, sigma, hi * i / n, opt);
    // First lobe reaching 90 %, otherwise the global maximum.
    int ib = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    for (int i = 1; i <= n; ++i) {
        const bool peak = p[i] >= p[i - 1] && (i == n || p[i] >= p[i + 1]);
        if (peak && p[i] >= 0.9) {
            ib = i;
            break;
        }
    }
    best = p[ib];
    double amp = hi * ib / n;
    double lo = hi * (ib - 1) / n, up = hi * std::min(ib + 1, n) / n;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = up - gr * (up - lo), x2 = lo + gr * (up - lo);
    double f1 = transfer(sys, Delta, sigma, x1, opt), f2 = transfer(sys, Delta, sigma, x2, opt);
    for (int it = 0; it < 40; ++it) {
        if (f1 > f2) {
            up = x2;
            x2 = x1;
            f2 = f1;
            x1 = up - gr * (up - lo);
            f1 = transfer(sys, Delta, sigma, x1, opt);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (up - lo);
            f2 = transfer(sys, Delta, sigma, x2, opt);
        }
    }
    const double refined = 0.5 * (lo + up);
    const double pr = transfer(sys, Delta, sigma, refined, opt);
    if (pr > best) {
        best = pr;
        amp = refined;
    }
    return amp;
}

double calibrate_pi2(const LambdaSystem& sys, double Delta, double sigma, double pi_amp, const LindbladOptions& opt)
{
    double lo = 0.0, hi = pi_amp;
    for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (transfer(sys, Delta, sigma, mid, opt) < 0.5) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

SequenceResult simulate_sequence(const SequenceConfig& cfg)
{
    require(cfg.system.Gamma_10 >= 0.0 && cfg.system.Gamma_12 >= 0.0 && cfg.system.Gamma_1_phi >= 0.0,
            "simulate_sequence: rates must be >= 0");
    require(cfg.sigma > 0.0, "simulate_sequence: sigma must be > 0");
    require(std::isfinite(cfg.Delta), "simulate_sequence: Delta must be finite");
    require(!cfg.grid.empty(), "simulate_sequence: grid is empty");
    require(cfg.pi_amplitude >= 0.0 && cfg.pi2_amplitude >= 0.0, "simulate_sequence: amplitudes must be >= 0");
    const bool delays = cfg.kind == SequenceKind::t1 || cfg.kind == SequenceKind::ramsey || cfg.kind == SequenceKind::echo;
    for (double x : cfg.grid) {
        require(std::isfinite(x), "simulate_sequence: grid values must be finite");
        if (delays) require(x >= 0.0, "simulate_sequence: delays must be >= 0");
        if (cfg.kind == SequenceKind::rabi_amplitude) require(x >= 0.0, "simulate_sequence: amplitudes must be >= 0");
    }

    SequenceResult res;
    res.kind = cfg.kind;
    res.x = cfg.grid;
    const LambdaSystem& sys = cfg.system;

    const bool needs_pi = cfg.kind != SequenceKind::rabi_amplitude;
    const bool needs_pi2 = cfg.kind == SequenceKind::ramsey || cfg.kind == SequenceKind::echo;
    if (needs_pi) {
        if (cfg.pi_amplitude > 0.0) {
            res.pi_amplitude = cfg.pi_amplitude;
            res.pi_transfer = transfer(sys, cfg.Delta, cfg.sigma, res.pi_amplitude, cfg.lindblad);
        } else {
            res.pi_amplitude = calibrate_pi(sys, cfg.Delta, cfg.sigma, cfg.lindblad, res.pi_transfer);
            if (res.pi_transfer < 0.9)
                throw ConvergenceError("simulate_sequence: amplitude scan reached only " +
                                       std::to_string(res.pi_transfer) + " transfer to |2>");
        }
    }
    if (needs_pi2)
        res.pi2_amplitude = cfg.pi2_amplitude > 0.0
                                ? cfg.pi2_amplitude
                                : calibrate_pi2(sys, cfg.Delta, cfg.sigma, res.pi_amplitude, cfg.lindblad);

    const int n = static_cast<int>(cfg.grid.size());
    res.signal.resize(n);
    res.p2.resize(n);
    parallel_for(n, cfg.workers, [&](int i) {
        const double x = cfg.grid[i];
        double delta = cfg.Delta;
        std::vector<Step> steps;
        switch (cfg.kind) {
        case SequenceKind::rabi_amplitude: steps = {{x, 0.0}}; break;
        case SequenceKind::rabi_detuning:
            delta = x;
            steps = {{res.pi_amplitude, 0.0}};
            break;
        case SequenceKind::t1: steps = {{res.pi_amplitude, 0.0}, {0.0, x}}; break;
        case SequenceKind::ramsey: steps = {{res.pi2_amplitude, 0.0}, {0.0, x}, {res.pi2_amplitude, 0.0}}; break;
        case SequenceKind::echo:
            steps = {{res.pi2_amplitude, 0.0}, {0.0, 0.5 * x}, {res.pi_amplitude, 0.0}, {0.0, 0.5 * x},
                     {res.pi2_amplitude, 0.0}};
            break;
        }
        double sig = 0.0;
        const auto pops = run(sys, delta, cfg.sigma, steps, cfg.lindblad, &sig);
        res.signal[i] = sig;
        res.p2[i] = pops[2];
    });
    return res;
}

RMatrix amplitude_map(const LambdaSystem& sys, double Delta, double sigma, const std::vector<double>& omega_alpha,
                      const std::vector<double>& omega_beta, const LindbladOptions& opt, int workers)
{
    require(sigma > 0.0, "amplitude_map: sigma must be > 0");
    require(!omega_alpha.empty() && !omega_beta.empty(), "amplitude_map: empty amplitude grid");
    const int na = static_cast<int>(omega_alpha.size()), nb = static_cast<int>(omega_beta.size());
    RMatrix out(na, nb);
    parallel_for(na * nb, workers, [&](int idx) {
        const int i = idx / nb, j = idx % nb;
        PulseSchedule s;
        s.alpha.push_back(Pulse::gaussian(2.0 * sigma, sigma, omega_alpha[i]));
        s.beta.push_back(Pulse::gaussian(2.0 * sigma, sigma, omega_beta[j]));
        const Trajectory tr = lindblad_evolve(sys, s, Delta, {0.0, 4.0 * sigma}, opt);
        out(i, j) = tr.populations.back()[2];
    });
    return out;
}

}  // namespace zeropi::raman
