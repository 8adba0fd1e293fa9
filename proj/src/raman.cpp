#include "zeropi/raman.hpp"

#include "zeropi/errors.hpp"

#include <cmath>

namespace zeropi::raman {

void LambdaSystem::validate() const
{
    require(std::isfinite(omega_1) && std::isfinite(omega_2), "LambdaSystem: level frequencies must be finite");
    require(0.0 < omega_2 && omega_2 < omega_1, "LambdaSystem: need 0 < omega_2 < omega_1");
    require(Gamma_10 >= 0.0 && Gamma_12 >= 0.0 && Gamma_1_phi >= 0.0, "LambdaSystem: rates must be >= 0");
}

double LambdaDrive::Omega_tilde() const
{
    return std::sqrt(Delta * Delta + Omega_alpha * Omega_alpha + Omega_beta * Omega_beta);
}

void LambdaDrive::validate() const
{
    require(std::isfinite(Omega_alpha) && std::isfinite(Omega_beta) && std::isfinite(Delta),
            "LambdaDrive: values must be finite");
}

DressedLambda dressed_lambda_eigensystem(const LambdaDrive& d)
{
    d.validate();
    const double oa = d.Omega_alpha, ob = d.Omega_beta, delta = d.Delta;
    const double w2 = oa * oa + ob * ob;
    const double wt = d.Omega_tilde();
    DressedLambda out;
    out.eps_0 = 0.0;
    out.eps_plus = 0.5 * (delta + wt);
    out.eps_minus = 0.5 * (delta - wt);
    if (w2 == 0.0) {
        out.dark = Eigen::Vector3cd(0.0, 0.0, 1.0);
        const Eigen::Vector3cd e0(1.0, 0.0, 0.0), e1(0.0, 1.0, 0.0);
        out.plus = delta > 0.0 ? e1 : e0;
        out.minus = delta > 0.0 ? e0 : e1;
        return out;
    }
    // Delta -/+ Omega_tilde without cancellation.
    const double dp = delta >= 0.0 ? delta + wt : w2 / (wt - delta);
    const double dm = delta >= 0.0 ? -w2 / (delta + wt) : delta - wt;
    out.dark = Eigen::Vector3cd(-ob, 0.0, oa).normalized();
    out.plus = Eigen::Vector3cd(oa, dp, ob).normalized();
    out.minus = Eigen::Vector3cd(oa, dm, ob).normalized();
    return out;
}

LambdaAmplitudes lambda_analytic_evolution(const LambdaDrive& d, double t)
{
    d.validate();
    require(std::isfinite(t), "lambda_analytic_evolution: t must be finite");
    const double oa = d.Omega_alpha, ob = d.Omega_beta, delta = d.Delta;
    const double w2 = oa * oa + ob * ob;
    if (w2 == 0.0) return {1.0, 0.0, 0.0};
    const double wt = d.Omega_tilde();
    const cplx rot = std::polar(1.0, -0.5 * delta * t);
    const double s = std::sin(0.5 * wt * t);
    const cplx x = rot * cplx(std::cos(0.5 * wt * t), delta / wt * s);
    LambdaAmplitudes a;
    a.alpha = (ob * ob + oa * oa * x) / w2;
    a.beta = oa / wt * (cplx(0.0, -1.0) * rot * s);
    a.gamma = oa * ob / w2 * (x - 1.0);
    return a;
}

double effective_rabi_rate(double Omega_alpha, double Omega_beta, double Delta)
{
    require(std::isfinite(Omega_alpha) && std::isfinite(Omega_beta) && std::isfinite(Delta),
            "effective_rabi_rate: values must be finite");
    require(Delta != 0.0, "effective_rabi_rate: Delta = 0 leaves the ancillary level resonant");
    return Omega_alpha * Omega_beta / (2.0 * Delta);
}

Eigen::Matrix3cd lambda_hamiltonian(cplx Omega_alpha, cplx Omega_beta, double Delta, double two_photon_detuning)
{
    Eigen::Matrix3cd h = Eigen::Matrix3cd::Zero();
    h(1, 1) = Delta;
    h(2, 2) = two_photon_detuning;
    h(0, 1) = 0.5 * Omega_alpha;
    h(1, 0) = std::conj(h(0, 1));
    h(1, 2) = 0.5 * Omega_beta;
    h(2, 1) = std::conj(h(1, 2));
    return h;
}

Eigen::Matrix3cd level_density(int i)
{
    require(i >= 0 && i < 3, "level_density: level must be 0, 1 or 2");
    Eigen::Matrix3cd r = Eigen::Matrix3cd::Zero();
    r(i, i) = 1.0;
    return r;
}

}  // namespace zeropi::raman
