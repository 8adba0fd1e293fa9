#include "zeropi/hamiltonian.hpp"
#include "zeropi/errors.hpp"
#include "zeropi/units.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace zeropi {

void ZeroPiParams::validate() const
{
    auto positive = [](double v, const char* name) {
        require(std::isfinite(v) && v > 0.0, std::string("ZeroPiParams: ") + name + " must be > 0");
    };
    positive(E_C_theta, "E_C_theta");
    positive(E_C_phi, "E_C_phi");
    positive(E_J, "E_J");
    positive(E_L, "E_L");
    require(std::isfinite(dE_J) && std::abs(dE_J) < 1.0, "ZeroPiParams: |dE_J| must be < 1");
    require(std::isfinite(g_phi_theta), "ZeroPiParams: g_phi_theta must be finite");
    require(std::isfinite(n_g), "ZeroPiParams: n_g must be finite");
    require(std::isfinite(flux), "ZeroPiParams: flux must be finite");
    require(std::isfinite(beta_phi) && std::isfinite(beta_theta), "ZeroPiParams: beta must be finite");
}

double ZeroPiParams::reduced_ng() const
{
    double r = n_g - std::floor(n_g);
    return r >= 1.0 ? 0.0 : r;
}

double ZeroPiParams::omega_phi() const { return 4.0 * std::sqrt(E_L * E_C_phi); }

double ZeroPiParams::phi_zpf() const { return std::pow(E_C_phi / E_L, 0.25); }

ZeroPiParams fitted_device_params()
{
    ZeroPiParams p;
    p.E_C_phi = 1.142;
    p.E_C_theta = 0.092;
    p.E_J = 6.013;
    p.E_L = 0.377;
    p.dE_J = 0.1;
    p.beta_phi = 0.27;
    p.beta_theta = 6.6e-3;
    return p;
}

void BasisConfig::validate(long ceiling) const
{
    require(n_theta_max >= 1, "BasisConfig: n_theta_max must be >= 1");
    require(n_phi_max >= 2, "BasisConfig: n_phi_max must be >= 2");
    require(dimension() <= ceiling, "BasisConfig: dimension " + std::to_string(dimension()) +
                                        " exceeds ceiling " + std::to_string(ceiling));
}

PhiOperators phi_operators(double E_C_phi, double E_L, int size)
{
    require(size >= 2, "phi_operators: size must be >= 2");
    require(E_C_phi > 0.0 && E_L > 0.0, "phi_operators: energies must be > 0");
    PhiOperators ops;
    ops.size = size;
    ops.zpf = std::pow(E_C_phi / E_L, 0.25);
    ops.omega = 4.0 * std::sqrt(E_L * E_C_phi);

    RMatrix x = RMatrix::Zero(size, size);
    ops.n_phi = CMatrix::Zero(size, size);
    for (int k = 0; k + 1 < size; ++k) {
        const double s = std::sqrt(static_cast<double>(k + 1));
        x(k, k + 1) = x(k + 1, k) = ops.zpf * s;
        ops.n_phi(k + 1, k) = cplx(0.0, s / (2.0 * ops.zpf));
        ops.n_phi(k, k + 1) = cplx(0.0, -s / (2.0 * ops.zpf));
    }
    Eigen::SelfAdjointEigenSolver<RMatrix> es(x);
    const RMatrix& v = es.eigenvectors();
    const RVector& lam = es.eigenvalues();
    ops.cos_phi = v * lam.array().cos().matrix().asDiagonal() * v.transpose();
    ops.sin_phi = v * lam.array().sin().matrix().asDiagonal() * v.transpose();
    return ops;
}

CMatrix build_hamiltonian(const ZeroPiParams& p, const BasisConfig& b, long ceiling)
{
    p.validate();
    b.validate(ceiling);
    return build_hamiltonian(p, b, phi_operators(p.E_C_phi, p.E_L, b.n_phi_max));
}

CMatrix build_hamiltonian(const ZeroPiParams& p, const BasisConfig& b, const PhiOperators& ops)
{
    require(ops.size == b.n_phi_max, "build_hamiltonian: phi operators do not match the basis");
    const int nmax = b.n_theta_max;
    const int m = b.n_phi_max;
    const long dim = b.dimension();

    const double shift = units::pi * p.flux;
    const double cs = std::cos(shift);
    const double sn = std::sin(shift);
    const RMatrix cos_shifted = ops.cos_phi * cs + ops.sin_phi * sn;  // cos(phi - s)
    const RMatrix sin_shifted = ops.sin_phi * cs - ops.cos_phi * sn;  // sin(phi - s)

    // <n+1| cos theta |n> = 1/2, <n+1| sin theta |n> = -i/2
    const CMatrix hop = (-p.E_J) * cos_shifted.cast<cplx>() +
                        cplx(0.0, -0.5 * p.E_J * p.dE_J) * sin_shifted.cast<cplx>();
    const CMatrix hop_adj = hop.adjoint();

    const double ng = p.reduced_ng();
    const double g = p.g_phi_theta / units::two_pi;

    CMatrix h = CMatrix::Zero(dim, dim);
    for (int n = -nmax; n <= nmax; ++n) {
        const long off = basis_index(b, n, 0);
        const double charging = 4.0 * p.E_C_theta * (n - ng) * (n - ng);
        for (int k = 0; k < m; ++k) h(off + k, off + k) = charging + ops.omega * (k + 0.5);
        if (g != 0.0) h.block(off, off, m, m) += (g * n) * ops.n_phi;
        if (n < nmax) {
            const long up = off + m;
            h.block(up, off, m, m) = hop;
            h.block(off, up, m, m) = hop_adj;
        }
    }
    return h;
}

std::string to_string(Valley v)
{
    switch (v) {
    case Valley::zero: return "zero";
    case Valley::pi: return "pi";
    default: return "mixed";
    }
}

std::string to_string(Parity p)
{
    switch (p) {
    case Parity::plus: return "+";
    case Parity::minus: return "-";
    default: return "none";
    }
}

std::string to_string(ChargeOperator op) { return op == ChargeOperator::n_theta ? "n_theta" : "n_phi"; }

std::string StateLabel::name() const
{
    static const char* orbital = "spdfghik";
    const int l = nodes_theta + nodes_phi;
    std::string s = valley == Valley::zero ? "0" : valley == Valley::pi ? "pi" : "mixed";
    s += '_';
    s += l < 8 ? std::string(1, orbital[l]) : "l" + std::to_string(l);
    if (l > 0) {
        if (nodes_phi == 0) s += "theta";
        else if (nodes_theta == 0) s += "phi";
        else s += "thetaphi";
    }
    if (valley == Valley::pi && phi_parity == Parity::plus) s += '+';
    if (valley == Valley::pi && phi_parity == Parity::minus) s += '-';
    return s;
}

Spectrum diagonalize(const CMatrix& h, int k)
{
    require(h.rows() == h.cols() && h.rows() > 0, "diagonalize: matrix must be square and nonempty");
    require(k >= 1 && k <= h.rows(), "diagonalize: k=" + std::to_string(k) + " outside [1, " +
                                          std::to_string(h.rows()) + "]");
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    require(hermiticity_error(h) <= 1e-10 * scale, "diagonalize: matrix is not Hermitian");
    EigenPairs ep = lowest_eigenpairs(h, k, true);
    Spectrum s;
    s.eigenvalues = std::move(ep.values);
    s.eigenvectors = std::move(ep.vectors);
    return s;
}

Spectrum solve(const ZeroPiParams& p, const BasisConfig& b, int k)
{
    p.validate();
    b.validate();
    require(k >= 1 && k <= b.dimension(), "solve: k=" + std::to_string(k) + " exceeds basis dimension");
    const PhiOperators ops = phi_operators(p.E_C_phi, p.E_L, b.n_phi_max);
    EigenPairs ep = lowest_eigenpairs(build_hamiltonian(p, b, ops), k, true);
    Spectrum s;
    s.eigenvalues = std::move(ep.values);
    s.eigenvectors = std::move(ep.vectors);
    s.basis = b;
    s.phi_zpf = ops.zpf;
    s.n_g = p.reduced_ng();
    s.flux = p.flux;
    return s;
}

CMatrix apply_charge_operator(const BasisConfig& b, double phi_zpf, ChargeOperator op, const CMatrix& v)
{
    require(v.rows() == b.dimension(), "apply_charge_operator: vector length does not match basis");
    const int m = b.n_phi_max;
    CMatrix out(v.rows(), v.cols());
    if (op == ChargeOperator::n_theta) {
        for (int n = -b.n_theta_max; n <= b.n_theta_max; ++n) {
            const long off = basis_index(b, n, 0);
            out.middleRows(off, m) = static_cast<double>(n) * v.middleRows(off, m);
        }
        return out;
    }
    require(phi_zpf > 0.0, "apply_charge_operator: phi_zpf is not set");
    CMatrix nphi = CMatrix::Zero(m, m);
    for (int k = 0; k + 1 < m; ++k) {
        const double s = std::sqrt(static_cast<double>(k + 1)) / (2.0 * phi_zpf);
        nphi(k + 1, k) = cplx(0.0, s);
        nphi(k, k + 1) = cplx(0.0, -s);
    }
    for (int n = -b.n_theta_max; n <= b.n_theta_max; ++n) {
        const long off = basis_index(b, n, 0);
        out.middleRows(off, m).noalias() = nphi * v.middleRows(off, m);
    }
    return out;
}

CMatrix operator_in_eigenbasis(const Spectrum& s, ChargeOperator op)
{
    return s.eigenvectors.adjoint() * apply_charge_operator(s.basis, s.phi_zpf, op, s.eigenvectors);
}

namespace {

RVector lowest_energies(const ZeroPiParams& p, const BasisConfig& b, int k)
{
    const PhiOperators ops = phi_operators(p.E_C_phi, p.E_L, b.n_phi_max);
    return lowest_eigenpairs(build_hamiltonian(p, b, ops), k, false).values;
}

double relative_shift(const RVector& a, const RVector& b, double floor)
{
    double worst = 0.0;
    for (int i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), floor));
    return worst;
}

}  // namespace

ConvergenceReport converge_basis(const ZeroPiParams& p, double tol, int k, const ConvergeOptions& opt)
{
    p.validate();
    require(std::isfinite(tol) && tol > 0.0, "converge_basis: tol must be > 0");
    require(k >= 1, "converge_basis: k must be >= 1");
    const double floor = p.omega_phi();

    ConvergenceReport rep;
    BasisConfig cur{std::max(1, opt.n_theta_start), opt.n_phi_start > 0 ? opt.n_phi_start : k + 2};
    require(cur.dimension() >= k, "converge_basis: starting basis smaller than k");
    rep.achieved_tol = std::numeric_limits<double>::infinity();
    rep.basis = cur;

    auto fits = [&](const BasisConfig& b) { return b.dimension() <= opt.max_dimension; };
    while (true) {
        const BasisConfig more_n{2 * cur.n_theta_max, cur.n_phi_max};
        const BasisConfig more_m{cur.n_theta_max, 2 * cur.n_phi_max};
        const BasisConfig both{2 * cur.n_theta_max, 2 * cur.n_phi_max};
        if (!fits(more_n) || !fits(more_m) || !fits(both)) break;
        rep.visited.push_back(cur);

        const RVector e0 = lowest_energies(p, cur, k);
        const double dn = relative_shift(e0, lowest_energies(p, more_n, k), floor);
        const double dm = relative_shift(e0, lowest_energies(p, more_m, k), floor);
        if (dn < tol && dm < tol) {
            const double db = relative_shift(e0, lowest_energies(p, both, k), floor);
            if (db < rep.achieved_tol) {
                rep.achieved_tol = db;
                rep.basis = cur;
            }
            if (db < tol) {
                rep.converged = true;
                return rep;
            }
            cur = both;
            continue;
        }
        if (std::max(dn, dm) < rep.achieved_tol) {
            rep.achieved_tol = std::max(dn, dm);
            rep.basis = cur;
        }
        if (dn >= tol) cur.n_theta_max *= 2;
        if (dm >= tol) cur.n_phi_max *= 2;
    }
    return rep;
}

}  // namespace zeropi
