#include "zeropi/errors.hpp"
#include "zeropi/hamiltonian.hpp"
#include "zeropi/units.hpp"

#include "approx.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace zeropi;

namespace {

ZeroPiParams free_rotor(double n_g)
{
    ZeroPiParams p;
    p.E_C_theta = 0.092;
    p.E_C_phi = 1.142;
    p.E_J = 1e-12;
    p.E_L = 0.377;
    p.n_g = n_g;
    return p;
}

int find_label(const Spectrum& s, const std::string& name)
{
    for (int i = 0; i < s.size(); ++i)
        if (s.labels[i].name() == name) return i;
    return -1;
}

}  // namespace

TEST_SUITE("hamiltonian")
{
    TEST_CASE("parameter validation")
    {
        ZeroPiParams p = fitted_device_params();
        p.E_L = 0.0;
        CHECK_THROWS_AS(p.validate(), ValidationError);
        p = fitted_device_params();
        p.dE_J = -1.0;
        CHECK_THROWS_AS(p.validate(), ValidationError);
        p = fitted_device_params();
        p.n_g = 2.3;
        CHECK(p.reduced_ng() == approx(0.3));
        CHECK_THROWS_AS((BasisConfig{0, 10}.validate()), ValidationError);
        CHECK_THROWS_AS((BasisConfig{100, 100}.validate()), ValidationError);
    }

    TEST_CASE("free rotor and oscillator limit")
    {
        for (double ng : {0.0, 0.21, 0.5}) {
            const ZeroPiParams p = free_rotor(ng);
            const BasisConfig b{8, 12};
            const Spectrum s = solve(p, b, 20);
            std::vector<double> want;
            for (int n = -8; n <= 8; ++n)
                for (int k = 0; k < 12; ++k)
                    want.push_back(4 * p.E_C_theta * (n - ng) * (n - ng) +
                                   std::sqrt(16 * p.E_L * p.E_C_phi) * (k + 0.5));
            std::sort(want.begin(), want.end());
            for (int i = 0; i < 20; ++i) CHECK(std::abs(s.eigenvalues[i] - want[i]) / want[i] < 1e-9);
        }
    }

    TEST_CASE("Hermitian at the fitted parameters")
    {
        const CMatrix h = build_hamiltonian(fitted_device_params(), BasisConfig{});
        CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    }

    TEST_CASE("real matrix at zero flux without asymmetry")
    {
        ZeroPiParams p = fitted_device_params();
        p.dE_J = 0.0;
        p.n_g = 0.3;
        CHECK(build_hamiltonian(p, BasisConfig{}).imag().cwiseAbs().maxCoeff() < 1e-14);
    }

    TEST_CASE("dimension ceiling")
    {
        CHECK_THROWS_AS(build_hamiltonian(fitted_device_params(), BasisConfig{10, 40}, 100), ValidationError);
    }

    TEST_CASE("two-level closed form")
    {
        const double g = 0.3, d = 1.7;
        CMatrix h(2, 2);
        h << 0.0, g, g, d;
        const Spectrum s = diagonalize(h, 2);
        CHECK(s.eigenvalues[0] == approx(0.5 * (d - std::sqrt(d * d + 4 * g * g))));
        CHECK(s.eigenvalues[1] == approx(0.5 * (d + std::sqrt(d * d + 4 * g * g))));
        CHECK_THROWS_AS(diagonalize(h, 3), ValidationError);
    }

    TEST_CASE("eigenpairs are orthonormal with small residuals")
    {
        const ZeroPiParams p = fitted_device_params();
        const CMatrix h = build_hamiltonian(p, BasisConfig{});
        const Spectrum s = diagonalize(h, 12);
        const CMatrix g = s.eigenvectors.adjoint() * s.eigenvectors;
        CHECK((g - CMatrix::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-10);
        const double hn = h.norm();
        for (int i = 0; i < 12; ++i) {
            CHECK((h * s.eigenvectors.col(i) - s.eigenvalues[i] * s.eigenvectors.col(i)).norm() < 1e-8 * hn);
            if (i > 0) CHECK(s.eigenvalues[i] >= s.eigenvalues[i - 1]);
        }
    }

    TEST_CASE("hybridization gap between the pi-valley ground doublet")
    {
        ZeroPiParams p = fitted_device_params();
        p.n_g = 0.25;
        Spectrum s = solve(p, BasisConfig{}, 12);
        label_spectrum(s, p.flux);
        const int plus = find_label(s, "pi_s+"), minus = find_label(s, "pi_s-");
        REQUIRE(plus >= 0);
        REQUIRE(minus >= 0);
        const double gap = (s.eigenvalues[minus] - s.eigenvalues[plus]) * 1e3;
        CHECK(gap > 10.0);
        CHECK(gap < 40.0);
    }

    TEST_CASE("integer charge shift leaves the spectrum unchanged")
    {
        ZeroPiParams p = fitted_device_params();
        p.n_g = 0.17;
        const Spectrum a = solve(p, BasisConfig{}, 10);
        p.n_g = 1.17;
        const Spectrum b = solve(p, BasisConfig{}, 10);
        for (int i = 0; i < 10; ++i) CHECK(std::abs(a.eigenvalues[i] - b.eigenvalues[i]) < 1e-9 * std::abs(a.eigenvalues[i]));
    }

    TEST_CASE("flux reversal symmetry without asymmetry")
    {
        ZeroPiParams p = fitted_device_params();
        p.dE_J = 0.0;
        p.n_g = 0.1;
        p.flux = 0.13;
        const Spectrum a = solve(p, BasisConfig{}, 10);
        p.flux = -0.13;
        const Spectrum b = solve(p, BasisConfig{}, 10);
        for (int i = 0; i < 10; ++i) CHECK(std::abs(a.eigenvalues[i] - b.eigenvalues[i]) < 1e-9 * std::abs(a.eigenvalues[i]));
    }

    TEST_CASE("parity sectors at zero flux")
    {
        ZeroPiParams p = fitted_device_params();
        p.dE_J = 0.0;
        p.n_g = 0.25;
        const Spectrum s = solve(p, BasisConfig{}, 8);
        const auto theta = default_theta_grid(64);
        const auto phi = default_phi_grid(p.phi_zpf(), 81);
        for (int i = 0; i < 8; ++i) {
            const bool degenerate = (i > 0 && s.eigenvalues[i] - s.eigenvalues[i - 1] < 1e-7) ||
                                    (i < 7 && s.eigenvalues[i + 1] - s.eigenvalues[i] < 1e-7);
            if (degenerate) continue;
            const auto w = evaluate_wavefunction(s, i, theta, phi);
            cplx ov = 0.0;
            double n = 0.0;
            const long m = static_cast<long>(phi.size());
            for (long a = 0; a < w.values.rows(); ++a)
                for (long b = 0; b < m; ++b) {
                    ov += std::conj(w.values(a, m - 1 - b)) * w.values(a, b);
                    n += std::norm(w.values(a, b));
                }
            CHECK(std::abs(ov) / n > 0.999);
        }
    }

    TEST_CASE("logical splitting is of order E_L pi^2")
    {
        const ZeroPiParams p = fitted_device_params();
        Spectrum s = solve(p, BasisConfig{}, 12);
        label_spectrum(s, p.flux);
        const int g = find_label(s, "0_s"), e = find_label(s, "pi_s+");
        REQUIRE(g >= 0);
        REQUIRE(e >= 0);
        const double f = s.eigenvalues[e] - s.eigenvalues[g];
        const double scale = p.E_L * units::pi * units::pi;
        CHECK(f > scale / 3);
        CHECK(f < scale * 3);
    }

    TEST_CASE("basis convergence at the fitted parameters")
    {
        const ZeroPiParams p = fitted_device_params();
        const auto r = converge_basis(p, 1e-6, 12);
        REQUIRE(r.converged);
        const BasisConfig big{2 * r.basis.n_theta_max, 2 * r.basis.n_phi_max};
        const Spectrum a = solve(p, r.basis, 12);
        const Spectrum b = solve(p, big, 12);
        for (int i = 0; i < 12; ++i)
            CHECK(std::abs(a.eigenvalues[i] - b.eigenvalues[i]) <
                  1e-6 * std::max(std::abs(b.eigenvalues[i]), p.omega_phi()));
        // charge truncation is a compression of the same operator, so a larger charge cutoff lowers the levels
        for (const BasisConfig& v : r.visited) {
            const Spectrum lo = solve(p, v, 12);
            const Spectrum hi = solve(p, BasisConfig{2 * v.n_theta_max, v.n_phi_max}, 12);
            for (int i = 0; i < 12; ++i) CHECK(hi.eigenvalues[i] <= lo.eigenvalues[i] + 1e-10);
        }
    }

    TEST_CASE("harmonic limit converges at the minimal oscillator cutoff")
    {
        const ZeroPiParams p = free_rotor(0.3);
        const auto r = converge_basis(p, 1e-6, 6);
        REQUIRE(r.converged);
        CHECK(r.basis.n_phi_max == 6 + 2);
    }

    TEST_CASE("theta cutoff grows with E_J / E_C_theta")
    {
        // logged trend: required charge cutoff at fixed tolerance
        int previous = 0;
        for (double ej : {1.0, 16.0, 256.0}) {
            ZeroPiParams p = fitted_device_params();
            p.E_J = ej;
            p.dE_J = 0.0;
            const auto r = converge_basis(p, 1e-6, 4);
            MESSAGE("E_J/E_C_theta = " << ej / p.E_C_theta << ": N = " << r.basis.n_theta_max
                                       << ", M = " << r.basis.n_phi_max);
            CHECK(r.basis.n_theta_max >= previous);
            previous = r.basis.n_theta_max;
        }
    }

    TEST_CASE("wavefunctions")
    {
        const ZeroPiParams p = fitted_device_params();
        const Spectrum s = solve(p, BasisConfig{}, 4);
        const auto theta = default_theta_grid(128);
        const auto phi = default_phi_grid(p.phi_zpf());
        const auto w = evaluate_wavefunction(s, 0, theta, phi);
        CHECK(w.norm() == approx(1.0).epsilon(1e-6));
        double near = 0.0, total = 0.0;
        for (std::size_t a = 0; a < theta.size(); ++a)
            for (long b = 0; b < w.values.cols(); ++b) {
                const double d = std::norm(w.values(static_cast<long>(a), b));
                total += d;
                if (std::abs(theta[a]) < units::pi / 2) near += d;
            }
        CHECK(near / total > 0.9);

        const ZeroPiParams f = free_rotor(0.0);
        const Spectrum sf = solve(f, BasisConfig{4, 8}, 1);
        const auto wf = evaluate_wavefunction(sf, 0, theta, phi);
        std::vector<double> marginal(theta.size(), 0.0);
        for (std::size_t a = 0; a < theta.size(); ++a)
            for (long b = 0; b < wf.values.cols(); ++b) marginal[a] += std::norm(wf.values(static_cast<long>(a), b));
        const auto [lo, hi] = std::minmax_element(marginal.begin(), marginal.end());
        CHECK((*hi - *lo) / *hi < 1e-10);

        CHECK_THROWS_AS(evaluate_wavefunction(s, 0, {}, phi), ValidationError);
    }

    TEST_CASE("state labels")
    {
        const ZeroPiParams p = fitted_device_params();
        Spectrum s = solve(p, BasisConfig{}, 12);
        label_spectrum(s, p.flux);
        CHECK(s.labels[0].name() == "0_s");
        CHECK(s.labels[0].phi_parity == Parity::plus);
        const int d = find_label(s, "pi_dtheta-");
        REQUIRE(d >= 0);
        CHECK(s.labels[d].valley == Valley::pi);
        CHECK(s.labels[d].nodes_theta == 2);
        CHECK(s.labels[d].phi_parity == Parity::minus);
    }

    TEST_CASE("even function of phi is classified with plus parity")
    {
        Wavefunction2D w;
        w.theta = default_theta_grid(64);
        w.phi = linspace(-4, 4, 81);
        w.values = CMatrix::Zero(64, 81);
        for (int a = 0; a < 64; ++a)
            for (int b = 0; b < 81; ++b)
                w.values(a, b) = std::exp(-w.theta[a] * w.theta[a] - w.phi[b] * w.phi[b]);
        const StateLabel l = classify_state(w, 0.0);
        CHECK(l.valley == Valley::zero);
        CHECK(l.phi_parity == Parity::plus);
        CHECK(classify_state(w, 0.2).phi_parity == Parity::none);
    }
}
