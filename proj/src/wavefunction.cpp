#include "zeropi/errors.hpp"
#include "zeropi/hamiltonian.hpp"
#include "zeropi/units.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace zeropi {

std::vector<double> linspace(double lo, double hi, int n, bool endpoint)
{
    require(n >= 1, "linspace: n must be >= 1");
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double step = (hi - lo) / (endpoint ? n - 1 : n);
    for (int i = 0; i < n; ++i) out[i] = lo + step * i;
    if (endpoint) out.back() = hi;
    return out;
}

std::vector<double> default_theta_grid(int n)
{
    return linspace(-0.5 * units::pi, 1.5 * units::pi, n, false);
}

std::vector<double> default_phi_grid(double phi_zpf, int n)
{
    if (n % 2 == 0) ++n;
    const double half = units::pi + 6.0 * phi_zpf;
    return linspace(-half, half, n, true);
}

RMatrix hermite_functions(const std::vector<double>& x, int m)
{
    RMatrix h(x.size(), m);
    const double c0 = std::pow(units::pi, -0.25);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double q = x[i];
        h(i, 0) = c0 * std::exp(-0.5 * q * q);
        if (m > 1) h(i, 1) = std::sqrt(2.0) * q * h(i, 0);
        for (int k = 1; k + 1 < m; ++k)
            h(i, k + 1) = std::sqrt(2.0 / (k + 1)) * q * h(i, k) - std::sqrt(static_cast<double>(k) / (k + 1)) * h(i, k - 1);
    }
    return h;
}

Wavefunction2D evaluate_coefficients(const CVector& c, const BasisConfig& b, double phi_zpf, double n_g,
                                     const std::vector<double>& theta_grid, const std::vector<double>& phi_grid)
{
    require(!theta_grid.empty() && !phi_grid.empty(), "evaluate_wavefunction: empty grid");
    require(c.size() == b.dimension(), "evaluate_wavefunction: coefficient length does not match basis");
    require(phi_zpf > 0.0, "evaluate_wavefunction: phi_zpf is not set");
    const int nc = b.charge_states();
    const int m = b.n_phi_max;

    CMatrix coeff(nc, m);
    for (int i = 0; i < nc; ++i)
        for (int k = 0; k < m; ++k) coeff(i, k) = c[static_cast<long>(i) * m + k];

    CMatrix plane(theta_grid.size(), nc);
    const double norm = 1.0 / std::sqrt(units::two_pi);
    for (std::size_t i = 0; i < theta_grid.size(); ++i)
        for (int j = 0; j < nc; ++j) plane(i, j) = std::polar(norm, (j - b.n_theta_max) * theta_grid[i]);

    // chi_k(phi) = h_k(phi / (sqrt(2) zpf)) / (2 zpf^2)^(1/4)
    const double len = std::sqrt(2.0) * phi_zpf;
    std::vector<double> q(phi_grid.size());
    for (std::size_t j = 0; j < phi_grid.size(); ++j) q[j] = phi_grid[j] / len;
    const RMatrix chi = hermite_functions(q, m) / std::sqrt(len);

    Wavefunction2D w;
    w.theta = theta_grid;
    w.phi = phi_grid;
    w.n_g = n_g;
    w.values = plane * coeff * chi.transpose().cast<cplx>();
    return w;
}

Wavefunction2D evaluate_wavefunction(const Spectrum& s, int index, const std::vector<double>& theta_grid,
                                     const std::vector<double>& phi_grid)
{
    require(index >= 0 && index < s.size(), "evaluate_wavefunction: index outside the retained spectrum");
    return evaluate_coefficients(s.eigenvectors.col(index), s.basis, s.phi_zpf, s.n_g, theta_grid, phi_grid);
}

namespace {

bool uniform(const std::vector<double>& g)
{
    if (g.size() < 2) return false;
    const double step = g[1] - g[0];
    for (std::size_t i = 1; i < g.size(); ++i)
        if (std::abs((g[i] - g[i - 1]) - step) > 1e-9 * std::max(1.0, std::abs(step))) return false;
    return step > 0.0;
}

// One full period sampled without the duplicate endpoint.
bool periodic_theta(const std::vector<double>& g)
{
    if (!uniform(g)) return false;
    const double span = (g.back() - g.front()) + (g[1] - g[0]);
    return std::abs(span - units::two_pi) < 1e-9;
}

std::vector<double> quadrature_weights(const std::vector<double>& g, bool periodic)
{
    std::vector<double> w(g.size(), 0.0);
    if (g.size() == 1) {
        w[0] = 1.0;
        return w;
    }
    if (periodic) {
        std::fill(w.begin(), w.end(), g[1] - g[0]);
        return w;
    }
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        const double h = 0.5 * (g[i + 1] - g[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    return w;
}

double wrap_angle(double a)
{
    a = std::fmod(a + units::pi, units::two_pi);
    if (a < 0.0) a += units::two_pi;
    return a - units::pi;
}

int count_sign_changes(const std::vector<double>& re, const std::vector<double>& amp)
{
    const double peak = amp.empty() ? 0.0 : *std::max_element(amp.begin(), amp.end());
    int changes = 0;
    int last = 0;
    for (std::size_t i = 0; i < re.size(); ++i) {
        if (amp[i] < 0.05 * peak) continue;
        const int sgn = re[i] > 0.0 ? 1 : (re[i] < 0.0 ? -1 : 0);
        if (sgn == 0) continue;
        if (last != 0 && sgn != last) ++changes;
        last = sgn;
    }
    return changes;
}

}  // namespace

double Wavefunction2D::norm() const
{
    const auto wt = quadrature_weights(theta, periodic_theta(theta));
    const auto wp = quadrature_weights(phi, false);
    double s = 0.0;
    for (long i = 0; i < values.rows(); ++i)
        for (long j = 0; j < values.cols(); ++j) s += wt[i] * wp[j] * std::norm(values(i, j));
    return s;
}

StateLabel classify_state(const Wavefunction2D& w, double flux)
{
    const long nt = w.values.rows();
    const long np = w.values.cols();
    require(nt > 0 && np > 0, "classify_state: empty wavefunction");
    const bool periodic = periodic_theta(w.theta);
    const auto wt = quadrature_weights(w.theta, periodic);
    const auto wp = quadrature_weights(w.phi, false);

    // Bloch form e^{-i n_g theta} u is locally real inside a well, which keeps node counting stable.
    CMatrix psi = w.values;
    for (long i = 0; i < nt; ++i) psi.row(i) *= std::polar(1.0, -w.n_g * w.theta[i]);

    double total = 0.0, pi_weight = 0.0, best = -1.0;
    long bi = 0, bj = 0;
    for (long i = 0; i < nt; ++i) {
        const bool in_pi = std::abs(wrap_angle(w.theta[i] - units::pi)) < 0.5 * units::pi;
        for (long j = 0; j < np; ++j) {
            const double p = std::norm(psi(i, j));
            const double d = wt[i] * wp[j] * p;
            total += d;
            if (in_pi) pi_weight += d;
            if (p > best) {
                best = p;
                bi = i;
                bj = j;
            }
        }
    }
    require(total > 0.0, "classify_state: wavefunction vanishes on the grid");

    StateLabel label;
    const double frac = pi_weight / total;
    label.valley = frac > 0.75 ? Valley::pi : (frac < 0.25 ? Valley::zero : Valley::mixed);

    const cplx ref = std::polar(1.0, -std::arg(psi(bi, bj)));

    // theta line through the most probable point, restricted to the valley window
    {
        const double centre = label.valley == Valley::pi ? units::pi : 0.0;
        std::vector<std::pair<double, long>> order;
        for (long i = 0; i < nt; ++i) {
            const double rel = wrap_angle(w.theta[i] - centre);
            if (label.valley == Valley::mixed || std::abs(rel) < 0.5 * units::pi) order.emplace_back(rel, i);
        }
        std::sort(order.begin(), order.end());
        std::vector<double> re, amp;
        for (const auto& [rel, i] : order) {
            re.push_back((psi(i, bj) * ref).real());
            amp.push_back(std::abs(psi(i, bj)));
        }
        label.nodes_theta = count_sign_changes(re, amp);
    }

    // phi line through the most probable point; a pi-valley state is counted within one well
    {
        const long row = bi;
        std::vector<double> re, amp;
        const bool positive_side = w.phi[bj] >= 0.0;
        for (long j = 0; j < np; ++j) {
            if (label.valley == Valley::pi && (w.phi[j] >= 0.0) != positive_side) continue;
            re.push_back((psi(row, j) * ref).real());
            amp.push_back(std::abs(psi(row, j)));
        }
        label.nodes_phi = count_sign_changes(re, amp);
    }

    // reflection phi -> -phi at flux 0; combined with theta -> theta + pi at half flux
    const double af = std::abs(flux);
    const bool at_zero = af < 1e-9;
    const bool at_half = std::abs(af - 0.5) < 1e-9;
    bool symmetric_phi = uniform(w.phi) || np == 1;
    for (long j = 0; j < np && symmetric_phi; ++j)
        symmetric_phi = std::abs(w.phi[j] + w.phi[np - 1 - j]) < 1e-9 * std::max(1.0, std::abs(w.phi[j]));
    long shift = 0;
    bool usable = (at_zero || at_half) && symmetric_phi;
    if (at_half) {
        usable = usable && periodic && nt % 2 == 0;
        shift = nt / 2;
    }
    if (usable) {
        cplx overlap = 0.0;
        double norm = 0.0;
        for (long i = 0; i < nt; ++i) {
            const long ip = (i + shift) % nt;
            for (long j = 0; j < np; ++j) {
                overlap += wt[i] * wp[j] * std::conj(w.values(ip, np - 1 - j)) * w.values(i, j);
                norm += wt[i] * wp[j] * std::norm(w.values(i, j));
            }
        }
        overlap /= norm;
        if (std::abs(overlap) > 0.9) label.phi_parity = overlap.real() > 0.0 ? Parity::plus : Parity::minus;
    }
    return label;
}

namespace {

// Coefficient-space reflection: phi -> -phi gives (-1)^k, theta -> theta + pi gives (-1)^n.
CVector reflect(const CVector& v, const BasisConfig& b, bool half_flux)
{
    CVector out(v.size());
    for (int n = -b.n_theta_max; n <= b.n_theta_max; ++n)
        for (int k = 0; k < b.n_phi_max; ++k) {
            const long idx = basis_index(b, n, k);
            const int s = (k + (half_flux ? std::abs(n) : 0)) % 2;
            out[idx] = s ? -v[idx] : v[idx];
        }
    return out;
}

}  // namespace

void label_spectrum(Spectrum& s, double flux, int theta_points, int phi_points)
{
    require(s.phi_zpf > 0.0, "label_spectrum: spectrum has no basis context");
    const double af = std::abs(flux);
    const bool at_zero = af < 1e-9;
    const bool at_half = std::abs(af - 0.5) < 1e-9;
    if (at_zero || at_half) {
        for (int i = 0; i + 1 < s.size(); ++i) {
            if (s.eigenvalues[i + 1] - s.eigenvalues[i] >= 1e-7) continue;
            CMatrix pair = s.eigenvectors.middleCols(i, 2);
            Eigen::Matrix2cd p;
            for (int a = 0; a < 2; ++a) {
                const CVector r = reflect(pair.col(a), s.basis, at_half);
                for (int c = 0; c < 2; ++c) p(c, a) = pair.col(c).dot(r);
            }
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(0.5 * (p + p.adjoint()));
            // eigenvalues ascending: column 1 is the even combination
            s.eigenvectors.col(i) = pair * es.eigenvectors().col(1);
            s.eigenvectors.col(i + 1) = pair * es.eigenvectors().col(0);
            ++i;
        }
    }
    const auto theta = default_theta_grid(theta_points);
    const auto phi = default_phi_grid(s.phi_zpf, phi_points);
    s.labels.clear();
    for (int i = 0; i < s.size(); ++i) s.labels.push_back(classify_state(evaluate_wavefunction(s, i, theta, phi), flux));
}

}  // namespace zeropi
