#pragma once

#include <Eigen/Dense>

namespace zeropi::circuitq {

using Matrix4 = Eigen::Matrix4d;
using Vector4 = Eigen::Vector4d;

// Four-node network. Capacitances in fF, energies in GHz (E/h).
struct CapacitanceNetwork {
    double C = 0.0;      // large shunt, nodes 1-3 and 2-4
    double C_J = 0.0;    // junction, nodes 1-2 and 3-4
    double C_L_x = 0.0;  // cross-cap over the superinductors, nodes 1-4 and 2-3
    double C_J_x = 0.0;  // cross-cap in parallel with each junction
    Vector4 C_r = Vector4::Zero();  // node to resonator centre pin
    Vector4 C_0 = Vector4::Zero();  // node to ground
    double E_J = 1.0;
    double E_L = 1.0;
    double dE_J = 0.0;

    void validate() const;
    // Every capacitance multiplied by s.
    CapacitanceNetwork scaled(double s) const;
    // Same network with C_L_x = C_J_x = 0.
    CapacitanceNetwork without_cross_caps() const;
};

// Finite-element capacitances of the measured device (fF), E_J and E_L in GHz.
CapacitanceNetwork measured_device_network();

struct NodeCapacitanceMatrix {
    Matrix4 entries;  // fF
    Vector4 gate;     // C_r per node, carried along for the drive coupling
};

struct ModeCapacitances {
    Matrix4 c_theta;    // mode order (phi, theta, zeta, Sigma)
    Matrix4 c_r_tilde;
};

struct ModeEnergies {
    double E_C_theta = 0.0;    // GHz
    double E_C_phi = 0.0;      // GHz
    double E_C_zeta = 0.0;     // GHz
    double g_phi_theta = 0.0;  // rad/ns
    double omega_zeta = 0.0;   // rad/ns
    double beta_phi = 0.0;
    double beta_theta = 0.0;
};

// Theta = R * Phi with rows (phi, theta, zeta, Sigma). R is orthogonal, R^-1 = R^T.
const Matrix4& mode_rotation();

NodeCapacitanceMatrix build_capacitance_matrix(const CapacitanceNetwork& net);
ModeCapacitances to_mode_basis(const NodeCapacitanceMatrix& m);
ModeEnergies derive_mode_energies(const ModeCapacitances& mc, double E_L);

// build -> rotate -> energies
ModeEnergies quantize(const CapacitanceNetwork& net);

}  // namespace zeropi::circuitq
