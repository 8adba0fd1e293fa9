#include "zeropi/raman.hpp"

#include "zeropi/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace zeropi::raman {

Pulse Pulse::square(double start, double stop, double amplitude, double phase)
{
    Pulse p;
    p.shape = PulseShape::square;
    p.start = start;
    p.stop = stop;
    p.amplitude = amplitude;
    p.phase = phase;
    p.validate();
    return p;
}

Pulse Pulse::gaussian(double centre, double sigma, double amplitude, double phase)
{
    require(sigma > 0.0, "Pulse: sigma must be > 0");
    Pulse p;
    p.shape = PulseShape::gaussian;
    p.start = centre - 2.0 * sigma;
    p.stop = centre + 2.0 * sigma;
    p.amplitude = amplitude;
    p.phase = phase;
    p.validate();
    return p;
}

namespace {

cplx envelope(const Pulse& p, double t)
{
    double a = p.amplitude;
    if (p.shape == PulseShape::gaussian) {
        const double x = (t - p.centre()) / p.sigma();
        a *= std::exp(-0.5 * x * x);
    }
    return std::polar(a, p.phase);
}

}  // namespace

cplx Pulse::value(double t) const
{
    if (t < start || t >= stop) return 0.0;
    return envelope(*this, t);
}

void Pulse::validate() const
{
    require(std::isfinite(start) && std::isfinite(stop) && stop > start, "Pulse: need finite start < stop");
    require(std::isfinite(amplitude) && amplitude >= 0.0, "Pulse: amplitude must be >= 0");
    require(std::isfinite(phase), "Pulse: phase must be finite");
}

void PulseSchedule::validate() const
{
    for (const Pulse& p : alpha) p.validate();
    for (const Pulse& p : beta) p.validate();
}

double PulseSchedule::end() const
{
    double e = 0.0;
    for (const Pulse& p : alpha) e = std::max(e, p.stop);
    for (const Pulse& p : beta) e = std::max(e, p.stop);
    return e;
}

std::vector<double> PulseSchedule::edges() const
{
    std::vector<double> e;
    for (const auto* list : {&alpha, &beta})
        for (const Pulse& p : *list) {
            e.push_back(p.start);
            e.push_back(p.stop);
        }
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    return e;
}

namespace {

using Mat3 = Eigen::Matrix3cd;

struct Dissipator {
    std::vector<Mat3> ops;
    Mat3 anti;  // sum L^dagger L / 2
};

Mat3 jump(int from, int to, double rate)
{
    Mat3 l = Mat3::Zero();
    l(to, from) = std::sqrt(rate);
    return l;
}

Dissipator build_dissipator(const LambdaSystem& sys, const LindbladOptions& opt)
{
    const double dephase = opt.dephasing == DephasingConvention::full_rate ? 2.0 : 1.0;
    Dissipator d;
    auto add = [&](int from, int to, double rate) {
        if (rate <= 0.0) return;
        d.ops.push_back(jump(from, to, from == to ? dephase * rate : rate));
    };
    add(1, 0, sys.Gamma_10);
    add(1, 2, sys.Gamma_12);
    add(1, 1, sys.Gamma_1_phi);
    for (const Channel& c : opt.extra) {
        require(c.from >= 0 && c.from < 3 && c.to >= 0 && c.to < 3, "lindblad_evolve: channel levels must be 0..2");
        require(std::isfinite(c.rate) && c.rate >= 0.0, "lindblad_evolve: channel rate must be >= 0");
        add(c.from, c.to, c.rate);
    }
    d.anti = Mat3::Zero();
    for (const Mat3& l : d.ops) d.anti += 0.5 * l.adjoint() * l;
    return d;
}

Mat3 rhs(const Mat3& h, const Dissipator& d, const Mat3& rho)
{
    const cplx mi(0.0, -1.0);
    Mat3 out = mi * (h * rho - rho * h);
    for (const Mat3& l : d.ops) out += l * rho * l.adjoint();
    out -= d.anti * rho + rho * d.anti;
    return out;
}

// Column-stacked Liouvillian for a constant Hamiltonian.
Eigen::Matrix<cplx, 9, 9> liouvillian(const Mat3& h, const Dissipator& d)
{
    Eigen::Matrix<cplx, 9, 9> lv = Eigen::Matrix<cplx, 9, 9>::Zero();
    for (int k = 0; k < 9; ++k) {
        Mat3 e = Mat3::Zero();
        e(k % 3, k / 3) = 1.0;
        const Mat3 r = rhs(h, d, e);
        for (int j = 0; j < 9; ++j) lv(j, k) = r(j % 3, j / 3);
    }
    return lv;
}

struct ActiveDrive {
    std::vector<const Pulse*> alpha;
    std::vector<const Pulse*> beta;
    bool empty() const { return alpha.empty() && beta.empty(); }
};

ActiveDrive active_in(const PulseSchedule& s, double a, double b)
{
    ActiveDrive d;
    for (const Pulse& p : s.alpha)
        if (p.start < b && p.stop > a && p.amplitude > 0.0) d.alpha.push_back(&p);
    for (const Pulse& p : s.beta)
        if (p.start < b && p.stop > a && p.amplitude > 0.0) d.beta.push_back(&p);
    return d;
}

class Tracker {
public:
    void check(const Mat3& rho)
    {
        trace_error = std::max(trace_error, std::abs(rho.trace() - 1.0));
        const Mat3 herm = 0.5 * (rho + rho.adjoint());
        Eigen::SelfAdjointEigenSolver<Mat3> es(herm, Eigen::EigenvaluesOnly);
        min_eig = std::min(min_eig, es.eigenvalues()[0]);
    }
    double trace_error = 0.0;
    double min_eig = 1.0;
};

}  // namespace

Trajectory lindblad_evolve(const LambdaSystem& sys, const PulseSchedule& sched, double Delta,
                           const std::vector<double>& t_grid, const LindbladOptions& opt, const Eigen::Matrix3cd& rho0)
{
    require(Delta == Delta && std::isfinite(Delta), "lindblad_evolve: Delta must be finite");
    require(sys.Gamma_10 >= 0.0 && sys.Gamma_12 >= 0.0 && sys.Gamma_1_phi >= 0.0, "lindblad_evolve: rates must be >= 0");
    sched.validate();
    require(!t_grid.empty(), "lindblad_evolve: empty time grid");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        require(t_grid[i] >= t_grid[i - 1], "lindblad_evolve: time grid must be ascending");
    require((rho0 - rho0.adjoint()).cwiseAbs().maxCoeff() < 1e-12 && std::abs(rho0.trace() - 1.0) < 1e-12,
            "lindblad_evolve: rho0 must be Hermitian with unit trace");
    require(opt.rtol > 0.0 && opt.atol > 0.0 && opt.min_step > 0.0, "lindblad_evolve: tolerances must be > 0");

    const Dissipator diss = build_dissipator(sys, opt);
    const double delta2 = opt.two_photon_detuning;

    std::vector<double> cuts = sched.edges();
    cuts.insert(cuts.end(), t_grid.begin(), t_grid.end());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    cuts.erase(std::remove_if(cuts.begin(), cuts.end(),
                              [&](double c) { return c < t_grid.front() || c > t_grid.back(); }),
               cuts.end());

    Trajectory out;
    Tracker tr;
    Mat3 rho = rho0;
    std::size_t next_out = 0;
    auto record = [&](double t) {
        while (next_out < t_grid.size() && t_grid[next_out] <= t) {
            out.t.push_back(t_grid[next_out]);
            std::array<double, 3> pops{rho(0, 0).real(), rho(1, 1).real(), rho(2, 2).real()};
            out.populations.push_back(pops);
            out.signal.push_back(opt.readout[0] * pops[0] + opt.readout[1] * pops[1] + opt.readout[2] * pops[2]);
            ++next_out;
        }
    };
    tr.check(rho);
    record(cuts.front());

    // Dormand-Prince 5(4) tableau.
    static const double c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static const double a[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
    };
    static const double b5[7] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
    static const double b4[7] = {5179.0 / 57600, 0.0, 7571.0 / 16695, 393.0 / 640, -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

    double h_guess = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double t0 = cuts[s], t1 = cuts[s + 1];
        const ActiveDrive act = active_in(sched, t0, t1);
        auto ham = [&](double t) {
            cplx oa = 0.0, ob = 0.0;
            for (const Pulse* p : act.alpha) oa += envelope(*p, t);
            for (const Pulse* p : act.beta) ob += envelope(*p, t);
            return lambda_hamiltonian(oa, ob, Delta, delta2);
        };

        if (act.empty()) {
            const Eigen::Matrix<cplx, 9, 9> prop = (liouvillian(ham(t0), diss) * (t1 - t0)).exp();
            Eigen::Matrix<cplx, 9, 1> v = Eigen::Map<const Eigen::Matrix<cplx, 9, 1>>(rho.data());
            v = prop * v;
            rho = Eigen::Map<const Mat3>(v.data());
            ++out.steps;
            tr.check(rho);
            record(t1);
            continue;
        }

        double t = t0;
        double h = h_guess > 0.0 ? std::min(h_guess, t1 - t0) : (t1 - t0) / 100.0;
        Mat3 k[7];
        k[0] = rhs(ham(t), diss, rho);
        while (t < t1) {
            if (t + h > t1) h = t1 - t;
            if (h < opt.min_step && t + h < t1)
                throw NumericalError("lindblad_evolve: step size fell below the minimum at t = " + std::to_string(t));
            for (int i = 1; i < 7; ++i) {
                Mat3 y = rho;
                for (int j = 0; j < i; ++j) y += h * a[i][j] * k[j];
                k[i] = rhs(ham(t + c[i] * h), diss, y);
            }
            Mat3 y5 = rho, err = Mat3::Zero();
            for (int i = 0; i < 7; ++i) {
                y5 += h * b5[i] * k[i];
                err += h * (b5[i] - b4[i]) * k[i];
            }
            double en = 0.0;
            for (int i = 0; i < 9; ++i) {
                const double sc = opt.atol + opt.rtol * std::max(std::abs(rho.data()[i]), std::abs(y5.data()[i]));
                en = std::max(en, std::abs(err.data()[i]) / sc);
            }
            if (en <= 1.0) {
                t += h;
                rho = y5;
                k[0] = k[6];  // first-same-as-last
                ++out.steps;
                tr.check(rho);
                h_guess = h;
                h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(en, 1e-16), -0.2)));
            } else {
                h *= std::max(0.1, 0.9 * std::pow(en, -0.25));
            }
        }
        record(t1);
    }
    record(t_grid.back());
    out.final_rho = rho;
    out.max_trace_error = tr.trace_error;
    out.min_eigenvalue = tr.min_eig;
    return out;
}

}  // namespace zeropi::raman
