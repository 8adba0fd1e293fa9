#include "zeropi/circuitq.hpp"
#include "zeropi/errors.hpp"
#include "zeropi/units.hpp"

#include <cmath>
#include <string>

namespace zeropi::circuitq {

void CapacitanceNetwork::validate() const
{
    require(std::isfinite(C) && C > 0.0, "CapacitanceNetwork: C must be > 0");
    require(std::isfinite(C_J) && C_J > 0.0, "CapacitanceNetwork: C_J must be > 0");
    require(std::isfinite(C_L_x) && C_L_x >= 0.0, "CapacitanceNetwork: C_L_x must be >= 0");
    require(std::isfinite(C_J_x) && C_J_x >= 0.0, "CapacitanceNetwork: C_J_x must be >= 0");
    for (int i = 0; i < 4; ++i) {
        require(std::isfinite(C_r[i]) && C_r[i] >= 0.0, "CapacitanceNetwork: C_r[" + std::to_string(i + 1) + "] must be >= 0");
        require(std::isfinite(C_0[i]) && C_0[i] >= 0.0, "CapacitanceNetwork: C_0[" + std::to_string(i + 1) + "] must be >= 0");
    }
    require(std::isfinite(E_J) && E_J > 0.0, "CapacitanceNetwork: E_J must be > 0");
    require(std::isfinite(E_L) && E_L > 0.0, "CapacitanceNetwork: E_L must be > 0");
    require(std::isfinite(dE_J) && std::abs(dE_J) < 1.0, "CapacitanceNetwork: |dE_J| must be < 1");
}

CapacitanceNetwork CapacitanceNetwork::scaled(double s) const
{
    require(std::isfinite(s) && s > 0.0, "scale factor must be > 0");
    CapacitanceNetwork out = *this;
    out.C *= s;
    out.C_J *= s;
    out.C_L_x *= s;
    out.C_J_x *= s;
    out.C_r *= s;
    out.C_0 *= s;
    return out;
}

CapacitanceNetwork CapacitanceNetwork::without_cross_caps() const
{
    CapacitanceNetwork out = *this;
    out.C_L_x = 0.0;
    out.C_J_x = 0.0;
    return out;
}

CapacitanceNetwork measured_device_network()
{
    CapacitanceNetwork net;
    net.C = 100.5;
    net.C_J = 2.0;
    net.C_L_x = 0.7;
    net.C_J_x = 1.0;
    net.C_r << 9.1, 0.3, 3.8, 0.3;
    net.C_0 << 8.2, 7.9, 6.2, 11.6;
    net.E_J = 6.013;
    net.E_L = 0.38;
    net.dE_J = 0.1;
    return net;
}

const Matrix4& mode_rotation()
{
    static const Matrix4 r = [] {
        Matrix4 m;
        m << -1, 1, -1, 1,
             -1, 1, 1, -1,
              1, 1, -1, -1,
              1, 1, 1, 1;
        return Matrix4(0.5 * m);
    }();
    return r;
}

namespace {

void add_branch(Matrix4& m, int a, int b, double c)
{
    m(a, a) += c;
    m(b, b) += c;
    m(a, b) -= c;
    m(b, a) -= c;
}

bool positive_definite(const Matrix4& m)
{
    Eigen::LLT<Matrix4> llt(m);
    return llt.info() == Eigen::Success;
}

}  // namespace

NodeCapacitanceMatrix build_capacitance_matrix(const CapacitanceNetwork& net)
{
    net.validate();
    Matrix4 m = Matrix4::Zero();
    const double cj = net.C_J + net.C_J_x;
    add_branch(m, 0, 1, cj);
    add_branch(m, 2, 3, cj);
    add_branch(m, 0, 2, net.C);
    add_branch(m, 1, 3, net.C);
    add_branch(m, 0, 3, net.C_L_x);
    add_branch(m, 1, 2, net.C_L_x);
    for (int i = 0; i < 4; ++i) m(i, i) += net.C_r[i] + net.C_0[i];

    if (!positive_definite(m))
        throw ValidationError("capacitance matrix is not positive definite (a node has no path to ground)");
    return {m, net.C_r};
}

ModeCapacitances to_mode_basis(const NodeCapacitanceMatrix& m)
{
    require(positive_definite(m.entries), "to_mode_basis: node matrix is not positive definite");
    const Matrix4& r = mode_rotation();
    // R^-1 = R^T, so (R^-1)^T C R^-1 = R C R^T
    ModeCapacitances out;
    out.c_theta = r * m.entries * r.transpose();
    out.c_r_tilde = r * Matrix4(m.gate.asDiagonal()) * r.transpose();
    return out;
}

ModeEnergies derive_mode_energies(const ModeCapacitances& mc, double E_L)
{
    require(std::isfinite(E_L) && E_L > 0.0, "derive_mode_energies: E_L must be > 0");
    Eigen::LLT<Matrix4> llt(mc.c_theta);
    if (llt.info() != Eigen::Success) throw ValidationError("derive_mode_energies: C_Theta is singular or indefinite");
    const Matrix4 inv = llt.solve(Matrix4::Identity());

    constexpr double k = units::charging_ghz_per_inverse_ff;
    ModeEnergies e;
    e.E_C_phi = k * inv(0, 0);
    e.E_C_theta = k * inv(1, 1);
    e.E_C_zeta = k * inv(2, 2);
    // kinetic energy 4e^2 (C^-1)_{phi theta} n_phi n_theta
    e.g_phi_theta = units::two_pi * 8.0 * k * inv(0, 1);
    e.omega_zeta = units::two_pi * std::sqrt(16.0 * E_L * e.E_C_zeta);

    const Vector4 drive = mode_rotation() * Vector4::Ones();
    const Vector4 beta = inv * mc.c_r_tilde * drive;
    e.beta_phi = beta[0];
    e.beta_theta = beta[1];
    return e;
}

ModeEnergies quantize(const CapacitanceNetwork& net)
{
    return derive_mode_energies(to_mode_basis(build_capacitance_matrix(net)), net.E_L);
}

}  // namespace zeropi::circuitq
