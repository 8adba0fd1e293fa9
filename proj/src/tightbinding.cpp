#include "zeropi/tightbinding.hpp"

#include "zeropi/errors.hpp"
#include "zeropi/parallel.hpp"
#include "zeropi/spectroscopy.hpp"
#include "zeropi/units.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace zeropi {

namespace {

constexpr int tracking_margin = 4;
constexpr double tracking_tie = 0.05;  // best and runner-up overlaps closer than this count as a crossing

// <P> for the phi reflection, (-1)^k in the Fock index.
double phi_parity_expectation(const CVector& v, const BasisConfig& b)
{
    double s = 0.0;
    for (int i = 0; i < b.charge_states(); ++i)
        for (int k = 0; k < b.n_phi_max; ++k) {
            const double w = std::norm(v[static_cast<long>(i) * b.n_phi_max + k]);
            s += (k % 2 == 0) ? w : -w;
        }
    return s;
}

void check_uniform_period(const std::vector<double>& ng)
{
    require(ng.size() >= 16, "bloch_states: n_g grid needs at least 16 points");
    const double step = 1.0 / static_cast<double>(ng.size());
    require(ng.front() >= 0.0 && ng.front() < step + 1e-12, "bloch_states: n_g grid must start in [0, 1/N)");
    for (std::size_t j = 1; j < ng.size(); ++j)
        require(std::abs(ng[j] - ng[j - 1] - step) < 1e-9,
                "bloch_states: n_g grid must be uniform with spacing 1/N over one period");
}

std::vector<Spectrum> solve_grid(const ZeroPiParams& p, const std::vector<double>& ng, const BasisConfig& b, int k,
                                 int workers)
{
    std::vector<Spectrum> out(ng.size());
    parallel_for(static_cast<int>(ng.size()), workers, [&](int j) {
        ZeroPiParams q = p;
        q.n_g = ng[j];
        out[j] = solve(q, b, k);
    });
    return out;
}

// Columns of every spectrum reordered to follow the first one.
void track_grid(std::vector<Spectrum>& spectra, const std::vector<double>& ng)
{
    for (std::size_t j = 1; j < spectra.size(); ++j) {
        const int dn = static_cast<int>(std::floor(ng[j]) - std::floor(ng[j - 1]));
        track_states(spectra[j - 1].eigenvectors, spectra[j], dn);
    }
}

double rms(const std::vector<double>& v)
{
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

std::vector<double> ng_grid(int n)
{
    require(n >= 1, "ng_grid: n must be >= 1");
    std::vector<double> g(n);
    for (int j = 0; j < n; ++j) g[j] = static_cast<double>(j) / n;
    return g;
}

namespace {

// Phi reflection on product-basis vectors, (-1)^k on the Fock index.
CVector reflect_phi(const CVector& v, const BasisConfig& b)
{
    CVector out = v;
    for (int i = 0; i < b.charge_states(); ++i)
        for (int k = 1; k < b.n_phi_max; k += 2) out[static_cast<long>(i) * b.n_phi_max + k] *= -1.0;
    return out;
}

Eigen::Matrix2cd reflection_in_span(const CVector& a, const CVector& b, const BasisConfig& basis)
{
    const CVector* v[2] = {&a, &b};
    Eigen::Matrix2cd pr;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) pr(r, c) = v[r]->dot(reflect_phi(*v[c], basis));
    return pr;
}

// Partner of state m: the nearest level in energy with the opposite reflection sign.
int reflection_partner(const Spectrum& s, int m)
{
    const double pm = phi_parity_expectation(s.eigenvectors.col(m), s.basis);
    int partner = -1;
    for (int j = 0; j < s.size(); ++j) {
        if (j == m || phi_parity_expectation(s.eigenvectors.col(j), s.basis) * pm >= 0.0) continue;
        if (partner < 0 ||
            std::abs(s.eigenvalues[j] - s.eigenvalues[m]) < std::abs(s.eigenvalues[partner] - s.eigenvalues[m]))
            partner = j;
    }
    return partner >= 0 ? partner : (m + 1 < s.size() ? m + 1 : m - 1);
}

// Reflection eigenstate of the requested sign in span{v_m, v_partner}; energy as expectation value.
// False when no eigenstate has the requested sign.
bool resolve_parity(const Spectrum& s, int m, int partner, Parity want, CVector& state, double& energy)
{
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(
        reflection_in_span(s.eigenvectors.col(m), s.eigenvectors.col(partner), s.basis));
    const int col = want == Parity::plus ? 1 : 0;  // ascending eigenvalues
    const bool found = es.eigenvalues()[col] * (want == Parity::plus ? 1.0 : -1.0) > 0.0;
    const Eigen::Vector2cd a = es.eigenvectors().col(col);
    state = a[0] * s.eigenvectors.col(m) + a[1] * s.eigenvectors.col(partner);
    state.normalize();
    energy = std::norm(a[0]) * s.eigenvalues[m] + std::norm(a[1]) * s.eigenvalues[partner];
    return found;
}

}  // namespace

BlochFamily bloch_states(const ZeroPiParams& p, int band, const std::vector<double>& ng, const BlochOptions& opt)
{
    p.validate();
    const BasisConfig& b = opt.basis;
    b.validate();
    require(band >= 0, "bloch_states: band must be >= 0");
    check_uniform_period(ng);
    const bool integer_flux = std::abs(p.flux - std::round(p.flux)) < 1e-12;
    require(opt.resolve_parity == Parity::none || integer_flux,
            "bloch_states: parity resolution needs integer flux");
    const int n = static_cast<int>(ng.size());
    const int k = band + 1 + tracking_margin;
    std::vector<Spectrum> spectra = solve_grid(p, ng, b, k, opt.workers);

    BlochFamily f;
    f.band = band;
    f.ng_grid = ng;
    f.basis = b;
    f.phi_zpf = p.phi_zpf();
    f.resolved = opt.resolve_parity;
    f.states.resize(n);
    f.energies.resize(n);

    if (opt.resolve_parity == Parity::none) {
        f.states[0] = spectra[0].eigenvectors.col(band);
        f.energies[0] = spectra[0].eigenvalues[band];
        const bool parity_usable = integer_flux && p.dE_J == 0.0 && p.g_phi_theta == 0.0;
        for (int j = 1; j < n; ++j) {
            const CVector& prev = f.states[j - 1];
            const CMatrix& v = spectra[j].eigenvectors;
            Eigen::VectorXd ov = (v.adjoint() * prev).cwiseAbs2();
            int best = 0;
            ov.maxCoeff(&best);
            double runner_up = 0.0;
            for (int m = 0; m < k; ++m)
                if (m != best) runner_up = std::max(runner_up, ov[m]);
            if (ov[best] < 0.5 || ov[best] - runner_up < tracking_tie) {
                const double pp = phi_parity_expectation(prev, b);
                int pick = -1;
                if (parity_usable && std::abs(pp) > 0.5) {
                    for (int m = 0; m < k; ++m) {
                        const double pm = phi_parity_expectation(v.col(m), b);
                        if (pm * pp > 0.25 && ov[m] >= 0.2 && (pick < 0 || ov[m] > ov[pick])) pick = m;
                    }
                }
                if (pick >= 0) {
                    f.note = "phi parity used to follow the band";
                    best = pick;
                } else {
                    f.ambiguous = true;
                    f.note = "band tracking ambiguous near n_g = " + std::to_string(ng[j]);
                }
            }
            f.min_overlap = std::min(f.min_overlap, ov[best]);
            f.states[j] = v.col(best);
            f.energies[j] = spectra[j].eigenvalues[best];
        }
    } else {
        // Follow the doublet as a two-dimensional subspace, then split it by reflection sign.
        int m = band;
        int partner = reflection_partner(spectra[0], m);
        for (int j = 0; j < n; ++j) {
            const Spectrum& s = spectra[j];
            if (j > 0) {
                CMatrix prev(s.eigenvectors.rows(), 2);
                prev.col(0) = spectra[j - 1].eigenvectors.col(m);
                prev.col(1) = spectra[j - 1].eigenvectors.col(partner);
                const Eigen::VectorXd w = (prev.adjoint() * s.eigenvectors).cwiseAbs2().colwise().sum();
                std::vector<int> order(k);
                std::iota(order.begin(), order.end(), 0);
                std::sort(order.begin(), order.end(), [&](int x, int y) { return w[x] > w[y]; });
                m = std::min(order[0], order[1]);
                partner = std::max(order[0], order[1]);
                f.min_overlap = std::min(f.min_overlap, w[order[1]]);
            }
            if (!resolve_parity(s, m, partner, opt.resolve_parity, f.states[j], f.energies[j])) {
                f.ambiguous = true;
                f.note = "no state of the requested phi parity near n_g = " + std::to_string(ng[j]);
            }
        }
    }
    if (f.min_overlap < 0.5 && !f.ambiguous) {
        f.ambiguous = true;
        f.note = "neighbouring states overlap below 0.5";
    }

    // Parallel transport: real positive overlaps between neighbours.
    for (int j = 1; j < n; ++j) {
        const cplx o = f.states[j - 1].dot(f.states[j]);
        f.states[j] *= std::polar(1.0, -std::arg(o));
    }
    // The state at n_g + 1 is the first state moved up one charge unit.
    const CMatrix closing = shift_charge(f.states[0], b, -1);
    const cplx oc = f.states[n - 1].dot(closing.col(0));
    f.min_overlap = std::min(f.min_overlap, std::norm(oc));
    f.closure_phase = std::arg(oc);
    if (f.closure_phase < -units::pi + 1e-6) f.closure_phase += units::two_pi;
    for (int j = 0; j < n; ++j) f.states[j] *= std::polar(1.0, f.closure_phase * j / n);

    f.step_phases.resize(n);
    for (int j = 0; j + 1 < n; ++j) f.step_phases[j] = std::arg(f.states[j].dot(f.states[j + 1]));
    f.step_phases[n - 1] = std::arg(f.states[n - 1].dot(shift_charge(f.states[0], b, -1).col(0)));
    return f;
}

std::vector<double> wannier_theta_grid(double centre, const WannierGridOptions& opt)
{
    require(opt.cells >= 3 && opt.cells % 2 == 1, "wannier: cells must be odd and >= 3");
    require(opt.points_per_cell >= 8 && opt.points_per_cell % 2 == 0, "wannier: points_per_cell must be even and >= 8");
    const int half = opt.cells * opt.points_per_cell / 2;
    const double h = units::two_pi / opt.points_per_cell;
    std::vector<double> t(2 * half + 1);
    for (int i = -half; i <= half; ++i) t[i + half] = centre + h * i;
    return t;
}

namespace {

struct BlochFields {
    CMatrix values;
    CMatrix d_theta;
    CMatrix d_phi;
};

BlochFields bloch_fields(const BlochFamily& f, const std::vector<cplx>& weights, int cell,
                         const std::vector<double>& theta, const std::vector<double>& phi, bool derivatives)
{
    const int n = static_cast<int>(f.states.size());
    require(n > 0, "bloch_sum: empty family");
    require(static_cast<int>(weights.size()) == n, "bloch_sum: one weight per n_g point is required");
    const BasisConfig& b = f.basis;
    const int nc = b.charge_states();
    const int m = b.n_phi_max;
    const long nt = static_cast<long>(theta.size());

    CMatrix a = CMatrix::Zero(nt, m);
    CMatrix ad = CMatrix::Zero(nt, m);
    const double norm = 1.0 / std::sqrt(units::two_pi);
    for (int j = 0; j < n; ++j) {
        const double ngj = f.ng_grid[j];
        const cplx wj = weights[j] * std::polar(1.0 / n, units::two_pi * cell * ngj);
        CMatrix coeff(nc, m);
        for (int i = 0; i < nc; ++i)
            for (int k = 0; k < m; ++k) coeff(i, k) = f.states[j][static_cast<long>(i) * m + k];
        CMatrix plane(nt, nc);
        for (long t = 0; t < nt; ++t)
            for (int i = 0; i < nc; ++i) plane(t, i) = wj * std::polar(norm, (i - b.n_theta_max - ngj) * theta[t]);
        a.noalias() += plane * coeff;
        if (derivatives) {
            for (int i = 0; i < nc; ++i) plane.col(i) *= cplx(0.0, i - b.n_theta_max - ngj);
            ad.noalias() += plane * coeff;
        }
    }

    const double len = std::sqrt(2.0) * f.phi_zpf;
    std::vector<double> q(phi.size());
    for (std::size_t j = 0; j < phi.size(); ++j) q[j] = phi[j] / len;
    const RMatrix h = hermite_functions(q, m + 1);
    const RMatrix chi = h.leftCols(m) / std::sqrt(len);

    BlochFields out;
    out.values = a * chi.transpose().cast<cplx>();
    if (derivatives) {
        RMatrix dchi(phi.size(), m);
        for (int k = 0; k < m; ++k) {
            dchi.col(k) = -std::sqrt((k + 1) / 2.0) * h.col(k + 1);
            if (k > 0) dchi.col(k) += std::sqrt(k / 2.0) * h.col(k - 1);
        }
        dchi /= len * std::sqrt(len);
        out.d_theta = ad * chi.transpose().cast<cplx>();
        out.d_phi = a * dchi.transpose().cast<cplx>();
    }
    return out;
}

double grid_step(const std::vector<double>& g) { return g.size() > 1 ? g[1] - g[0] : 1.0; }

}  // namespace

CMatrix bloch_sum(const BlochFamily& f, const std::vector<cplx>& weights, int cell, const std::vector<double>& theta,
                  const std::vector<double>& phi)
{
    return bloch_fields(f, weights, cell, theta, phi, false).values;
}

Wannier2D wannier_function(const BlochFamily& f, int cell, const WannierGridOptions& opt)
{
    require(!f.states.empty(), "wannier_function: empty family");
    require(opt.phi_points >= 9 && opt.phi_points % 2 == 1, "wannier_function: phi_points must be odd and >= 9");
    Wannier2D w;
    w.band = f.band;
    w.cell = cell;
    w.centre = f.closure_phase + units::two_pi * cell;
    w.points_per_cell = opt.points_per_cell;
    w.theta = wannier_theta_grid(w.centre, opt);
    const double phi_max = units::pi + 6.0 * f.phi_zpf;
    w.phi = linspace(-phi_max, phi_max, opt.phi_points);

    const std::vector<cplx> ones(f.states.size(), cplx(1.0, 0.0));
    BlochFields fields = bloch_fields(f, ones, cell, w.theta, w.phi, true);

    Eigen::Index r = 0, c = 0;
    const double peak = fields.values.cwiseAbs().maxCoeff(&r, &c);
    require(peak > 0.0, "wannier_function: vanishing function");
    const cplx phase = std::polar(1.0, -std::arg(fields.values(r, c)));
    w.phase = phase;
    w.values = fields.values * phase;
    w.d_theta = fields.d_theta * phase;
    w.d_phi = fields.d_phi * phase;

    const double area = grid_step(w.theta) * grid_step(w.phi);
    const RMatrix dens = w.values.cwiseAbs2();
    w.norm = dens.sum() * area;
    double tail = 0.0;
    for (std::size_t i = 0; i < w.theta.size(); ++i)
        if (std::abs(w.theta[i] - w.centre) > 1.5 * units::two_pi) tail += dens.row(i).sum();
    w.tail_norm = tail * area / w.norm;
    w.imag_residual = w.values.imag().cwiseAbs().maxCoeff() / peak;
    const Eigen::VectorXd marginal = dens.rowwise().sum() * grid_step(w.phi) / w.norm;
    w.participation_width = 1.0 / (marginal.squaredNorm() * grid_step(w.theta));

    if (w.tail_norm > 1e-3)
        throw NumericalError("wannier_function: gauge fixing failed, tail weight " + std::to_string(w.tail_norm) +
                             " beyond 1.5 cells");
    return w;
}

std::vector<double> band_dispersion(const ZeroPiParams& p, int band, const std::vector<double>& ng,
                                    const BasisConfig& b, int workers)
{
    p.validate();
    b.validate();
    require(band >= 0, "band_dispersion: band must be >= 0");
    require(!ng.empty(), "band_dispersion: empty grid");
    std::vector<Spectrum> spectra = solve_grid(p, ng, b, band + 1 + tracking_margin, workers);
    track_grid(spectra, ng);
    std::vector<double> e(ng.size());
    for (std::size_t j = 0; j < ng.size(); ++j) e[j] = spectra[j].eigenvalues[band];
    return e;
}

double hopping_integral(const ZeroPiParams& p, int band, const BasisConfig& b, int workers)
{
    const std::vector<double> e = band_dispersion(p, band, linspace(0.0, 0.5, 11), b, workers);
    return (e.front() - e.back()) / 4.0;
}

BandEnergies wannier_band_energies(const BlochFamily& f, const Wannier2D& w)
{
    require(f.states.size() == f.energies.size(), "wannier_band_energies: family is incomplete");
    std::vector<cplx> eps(f.energies.begin(), f.energies.end());
    const CMatrix hphi = bloch_sum(f, eps, w.cell, w.theta, w.phi) * w.phase;
    const double area = grid_step(w.theta) * grid_step(w.phi);
    const int s = w.points_per_cell;
    const long nt = static_cast<long>(w.theta.size());
    const long np = static_cast<long>(w.phi.size());
    BandEnergies out;
    out.epsilon0 = (w.values.conjugate().cwiseProduct(hphi)).sum().real() * area / w.norm;
    // Phi(theta - 2 pi) sampled on the grid is values shifted s rows down.
    cplx t = 0.0;
    for (long i = s; i < nt; ++i)
        for (long j = 0; j < np; ++j) t += std::conj(w.values(i - s, j)) * hphi(i, j);
    out.t = t.real() * area / w.norm;
    return out;
}

CosineFit fit_cosine_band(const std::vector<double>& ng, const std::vector<double>& energies)
{
    require(ng.size() == energies.size() && ng.size() >= 3, "fit_cosine_band: need >= 3 matching samples");
    const long n = static_cast<long>(ng.size());
    RMatrix a(n, 2);
    RVector y(n);
    for (long i = 0; i < n; ++i) {
        a(i, 0) = 1.0;
        a(i, 1) = 2.0 * std::cos(units::two_pi * ng[i]);
        y[i] = energies[i];
    }
    const RVector x = a.colPivHouseholderQr().solve(y);
    CosineFit fit;
    fit.epsilon0 = x[0];
    fit.t = x[1];
    fit.peak_to_peak = y.maxCoeff() - y.minCoeff();
    fit.max_residual = (a * x - y).cwiseAbs().maxCoeff();
    return fit;
}

EtaCoefficients eta_coefficients(const Wannier2D& p, const Wannier2D& q)
{
    require(p.theta.size() == q.theta.size() && p.phi.size() == q.phi.size() &&
                p.points_per_cell == q.points_per_cell,
            "eta_coefficients: Wannier functions must share one grid");
    for (std::size_t j = 0; j < p.phi.size(); ++j)
        require(std::abs(p.phi[j] - q.phi[j]) < 1e-12, "eta_coefficients: phi grids differ");
    const int s = p.points_per_cell;
    const double h = units::two_pi / s;
    const double offset = (q.theta.front() - p.theta.front()) / h;
    require(std::abs(offset - std::round(offset)) < 1e-6, "eta_coefficients: theta grids are not commensurate");
    const long base = std::lround(offset);  // q sample i sits at p index i + base

    const double dc = q.centre - p.centre;
    const long half_steps = std::lround(dc / units::pi);
    require(std::abs(dc - half_steps * units::pi) < 0.25 * units::pi,
            "eta_coefficients: centres must differ by a multiple of pi");

    EtaCoefficients e;
    e.inter_valley = (half_steps % 2) != 0;
    const double area = h * (p.phi[1] - p.phi[0]);
    const long nt = static_cast<long>(p.theta.size());
    const long np = static_cast<long>(p.phi.size());

    // Integrals against Phi_q(theta - d), d a lattice translation of `lat` cells.
    auto integrate = [&](long lat, cplx& eta0, cplx& eta1, cplx& eta) {
        const long shift = base + lat * s;
        cplx s0 = 0.0, s1 = 0.0, sp = 0.0;
        for (long i = 0; i < nt; ++i) {
            const long iq = i - shift;
            if (iq < 0 || iq >= nt) continue;
            for (long j = 0; j < np; ++j) {
                const cplx a = std::conj(p.values(i, j));
                s0 += a * q.values(iq, j);
                s1 += a * q.d_theta(iq, j);
                sp += a * q.d_phi(iq, j);
            }
        }
        eta0 = s0 * area;
        eta1 = cplx(0.0, 1.0) * s1 * area;
        eta = cplx(0.0, 1.0) * sp * area;
    };

    if (!e.inter_valley) {
        const long l0 = -half_steps / 2;  // brings Phi_q onto the site of Phi_p
        e.l_C = static_cast<int>(l0);
        e.l_L = static_cast<int>(l0 - 1);
        e.l_R = static_cast<int>(l0 + 1);
        integrate(e.l_C, e.eta0_C, e.eta1_C, e.eta_C);
    } else {
        // Copies of Phi_q at centre_p - pi and centre_p + pi.
        e.l_L = static_cast<int>(std::lround((-1.0 - half_steps) / 2.0));
        e.l_R = static_cast<int>(std::lround((1.0 - half_steps) / 2.0));
        e.l_C = 0;
    }
    integrate(e.l_L, e.eta0_L, e.eta1_L, e.eta_L);
    integrate(e.l_R, e.eta0_R, e.eta1_R, e.eta_R);
    // Bloch phases refer to the cell-0 functions of both families.
    const int dcell = q.cell - p.cell;
    e.l_C += dcell;
    e.l_L += dcell;
    e.l_R += dcell;
    return e;
}

std::string to_string(ParityCase c)
{
    switch (c) {
    case ParityCase::same_same: return "same-theta/same-phi";
    case ParityCase::opposite_theta: return "opposite-theta/same-phi";
    case ParityCase::opposite_phi: return "same-theta/opposite-phi";
    case ParityCase::opposite_both: return "opposite-theta/opposite-phi";
    }
    return "unknown";
}

double tb_shape(double n_g, ParityCase c, TransitionKind k, TbOperator op, double epsilon)
{
    const bool fluxon = k == TransitionKind::fluxon;
    const double x = fluxon ? units::pi * n_g : units::two_pi * n_g;
    const double odd_shape = std::abs(std::sin(x));
    const double even_shape = fluxon ? std::abs(std::cos(x)) : std::abs(1.0 + epsilon * std::cos(x));
    if (op == TbOperator::d_theta) {
        switch (c) {
        case ParityCase::same_same: return odd_shape;
        case ParityCase::opposite_theta: return even_shape;
        default: return 0.0;
        }
    }
    switch (c) {
    case ParityCase::opposite_phi: return even_shape;
    case ParityCase::opposite_both: return odd_shape;
    default: return 0.0;
    }
}

double tb_matrix_element(const EtaCoefficients& e, double n_g, ParityCase c, TransitionKind k, TbOperator op)
{
    const bool theta = op == TbOperator::d_theta;
    const cplx ec = theta ? e.eta1_C : e.eta_C;
    const cplx el = theta ? e.eta1_L : e.eta_L;
    const cplx er = theta ? e.eta1_R : e.eta_R;
    const double path = std::abs(el) + std::abs(er);
    if (k == TransitionKind::fluxon) return path * tb_shape(n_g, c, k, op);

    const bool odd = theta ? c == ParityCase::same_same : c == ParityCase::opposite_both;
    if (odd) return path * tb_shape(n_g, c, k, op);
    if (std::abs(ec) == 0.0) return path * std::abs(std::cos(units::two_pi * n_g)) * (tb_shape(n_g, c, k, op) != 0.0);
    const double eps = (2.0 * el / ec).real();
    return std::abs(ec) * tb_shape(n_g, c, k, op, eps);
}

cplx tb_two_path_sum(const EtaCoefficients& e, double n_g, TbOperator op)
{
    auto phase = [&](int l) { return std::polar(1.0, -units::two_pi * l * n_g); };
    cplx sum = 0.0;
    if (op == TbOperator::d_theta) {
        sum += phase(e.l_L) * (e.eta1_L - n_g * e.eta0_L) + phase(e.l_R) * (e.eta1_R - n_g * e.eta0_R);
        if (!e.inter_valley) sum += phase(e.l_C) * (e.eta1_C - n_g * e.eta0_C);
    } else {
        sum += phase(e.l_L) * e.eta_L + phase(e.l_R) * e.eta_R;
        if (!e.inter_valley) sum += phase(e.l_C) * e.eta_C;
    }
    return sum;
}

std::vector<double> matrix_element_scan(const ZeroPiParams& p, int i, int j, const std::vector<double>& ng,
                                        ChargeOperator op, const BasisConfig& b, int workers)
{
    p.validate();
    b.validate();
    require(i >= 0 && j >= 0, "matrix_element_scan: indices must be >= 0");
    require(!ng.empty(), "matrix_element_scan: empty grid");
    std::vector<Spectrum> spectra = solve_grid(p, ng, b, std::max(i, j) + 1 + tracking_margin, workers);
    track_grid(spectra, ng);
    std::vector<double> out(ng.size());
    for (std::size_t g = 0; g < ng.size(); ++g) {
        const Spectrum& s = spectra[g];
        const CMatrix v = apply_charge_operator(s.basis, s.phi_zpf, op, s.eigenvectors.col(j));
        out[g] = std::abs(s.eigenvectors.col(i).dot(v.col(0)));
    }
    return out;
}

namespace {

TbReport score(const std::vector<double>& ng, std::vector<double> exact, const std::function<double(double)>& shape)
{
    TbReport r;
    r.ng = ng;
    r.exact = std::move(exact);
    double sy = 0.0, ss = 0.0;
    std::vector<double> s(ng.size());
    for (std::size_t g = 0; g < ng.size(); ++g) {
        s[g] = shape(ng[g]);
        sy += s[g] * r.exact[g];
        ss += s[g] * s[g];
    }
    r.scale = ss > 0.0 ? sy / ss : 0.0;
    std::vector<double> res(ng.size());
    r.model.resize(ng.size());
    for (std::size_t g = 0; g < ng.size(); ++g) {
        r.model[g] = r.scale * s[g];
        res[g] = r.exact[g] - r.model[g];
    }
    const double peak = *std::max_element(r.exact.begin(), r.exact.end());
    r.nrms = peak > 0.0 ? rms(res) / peak : (rms(res) > 0.0 ? INFINITY : 0.0);
    return r;
}

}  // namespace

TbReport verify_tb_against_exact(const ZeroPiParams& p, int i, int j, const std::vector<double>& ng,
                                 ChargeOperator op, const std::function<double(double)>& shape, const BasisConfig& b,
                                 int workers)
{
    require(static_cast<bool>(shape), "verify_tb_against_exact: shape is empty");
    return score(ng, matrix_element_scan(p, i, j, ng, op, b, workers), shape);
}

TbReport verify_tb_against_exact(const ZeroPiParams& p, int i, int j, const std::vector<double>& ng, ParityCase c,
                                 TransitionKind k, TbOperator op, const BasisConfig& b, int workers)
{
    const ChargeOperator cop = op == TbOperator::d_theta ? ChargeOperator::n_theta : ChargeOperator::n_phi;
    const std::vector<double> exact = matrix_element_scan(p, i, j, ng, cop, b, workers);
    const bool needs_eps = k == TransitionKind::plasmon &&
                           ((op == TbOperator::d_theta && c == ParityCase::opposite_theta) ||
                            (op == TbOperator::d_phi && c == ParityCase::opposite_phi));
    if (!needs_eps) return score(ng, exact, [&](double x) { return tb_shape(x, c, k, op); });

    auto eval = [&](double eps) { return score(ng, exact, [&](double x) { return tb_shape(x, c, k, op, eps); }); };
    double best_eps = 0.0;
    double best = INFINITY;
    for (int s = -400; s <= 400; ++s) {
        const double eps = s * 0.01;
        const double v = eval(eps).nrms;
        if (v < best) {
            best = v;
            best_eps = eps;
        }
    }
    double lo = best_eps - 0.01, hi = best_eps + 0.01;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 60; ++it) {
        const double a = hi - gr * (hi - lo), bb = lo + gr * (hi - lo);
        if (eval(a).nrms < eval(bb).nrms) hi = bb;
        else lo = a;
    }
    TbReport r = eval(0.5 * (lo + hi));
    r.epsilon = 0.5 * (lo + hi);
    return r;
}

}  // namespace zeropi
