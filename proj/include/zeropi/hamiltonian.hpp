#pragma once

#include "zeropi/linalg.hpp"

#include <string>
#include <vector>

namespace zeropi {

// Energies in GHz (E/h); g_phi_theta in rad/ns; n_g in units of 2e; flux in flux quanta.
struct ZeroPiParams {
    double E_C_theta = 0.092;
    double E_C_phi = 1.142;
    double E_J = 6.013;
    double E_L = 0.377;
    double dE_J = 0.0;
    double g_phi_theta = 0.0;
    double n_g = 0.0;
    double flux = 0.0;
    double beta_phi = 0.0;
    double beta_theta = 0.0;

    void validate() const;
    double reduced_ng() const;      // n_g folded into [0, 1)
    double omega_phi() const;       // phi oscillator quantum in GHz, sqrt(16 E_L E_C_phi)
    double phi_zpf() const;         // (E_C_phi / E_L)^(1/4)
};

// Multivariate-fit parameters of the measured device.
ZeroPiParams fitted_device_params();

inline constexpr long default_dimension_ceiling = 6000;

struct BasisConfig {
    int n_theta_max = 10;  // theta charge states n in [-N, N]
    int n_phi_max = 40;    // phi Fock levels 0 .. M-1

    int charge_states() const { return 2 * n_theta_max + 1; }
    long dimension() const { return static_cast<long>(charge_states()) * n_phi_max; }
    void validate(long ceiling = default_dimension_ceiling) const;
    bool operator==(const BasisConfig&) const = default;
};

// Operators on the truncated phi oscillator space.
struct PhiOperators {
    int size = 0;
    double zpf = 0.0;    // phi = zpf (a + a^dagger)
    double omega = 0.0;  // GHz
    RMatrix cos_phi;
    RMatrix sin_phi;
    CMatrix n_phi;       // i (a^dagger - a) / (2 zpf)
};

PhiOperators phi_operators(double E_C_phi, double E_L, int size);

// Index of |n, k> in the charge (x) Fock product basis.
inline long basis_index(const BasisConfig& b, int n, int k)
{
    return static_cast<long>(n + b.n_theta_max) * b.n_phi_max + k;
}

CMatrix build_hamiltonian(const ZeroPiParams& p, const BasisConfig& b, long ceiling = default_dimension_ceiling);
CMatrix build_hamiltonian(const ZeroPiParams& p, const BasisConfig& b, const PhiOperators& ops);

enum class Valley { zero, pi, mixed };
enum class Parity { plus, minus, none };

struct StateLabel {
    Valley valley = Valley::mixed;
    int nodes_theta = 0;
    int nodes_phi = 0;
    Parity phi_parity = Parity::none;

    // e.g. "0_s", "0_ptheta", "pi_dtheta-"
    std::string name() const;
    bool operator==(const StateLabel&) const = default;
};

std::string to_string(Valley v);
std::string to_string(Parity p);

struct Spectrum {
    RVector eigenvalues;   // GHz, ascending
    CMatrix eigenvectors;  // columns
    std::vector<StateLabel> labels;  // empty until labelled

    // Context for wavefunction evaluation; unset when built from a bare matrix.
    BasisConfig basis{};
    double phi_zpf = 0.0;
    double n_g = 0.0;
    double flux = 0.0;

    int size() const { return static_cast<int>(eigenvalues.size()); }
};

Spectrum diagonalize(const CMatrix& h, int k);
Spectrum solve(const ZeroPiParams& p, const BasisConfig& b, int k);

enum class ChargeOperator { n_theta, n_phi };
std::string to_string(ChargeOperator op);

// <i|op|j> for all retained eigenstates, a k x k matrix.
CMatrix operator_in_eigenbasis(const Spectrum& s, ChargeOperator op);
// op applied to the columns of v (vectors in the product basis).
CMatrix apply_charge_operator(const BasisConfig& b, double phi_zpf, ChargeOperator op, const CMatrix& v);

struct ConvergeOptions {
    int n_theta_start = 3;
    int n_phi_start = 0;  // 0 picks k + 2
    long max_dimension = default_dimension_ceiling;
};

struct ConvergenceReport {
    BasisConfig basis;
    bool converged = false;
    double achieved_tol = 0.0;  // largest relative shift when both cutoffs double
    std::vector<BasisConfig> visited;
};

// Doubling schedule on (N, M); shifts are measured relative to max(|E_i|, omega_phi).
ConvergenceReport converge_basis(const ZeroPiParams& p, double tol, int k, const ConvergeOptions& opt = {});

struct Wavefunction2D {
    std::vector<double> theta;
    std::vector<double> phi;
    CMatrix values;    // rows follow theta, columns follow phi
    double n_g = 0.0;  // values hold the periodic part u; e^{-i n_g theta} u is the quasi-periodic form

    double norm() const;  // integral of |psi|^2
};

std::vector<double> linspace(double lo, double hi, int n, bool endpoint = true);
// One full theta period starting at -pi/2, so both valleys sit inside the grid.
std::vector<double> default_theta_grid(int n = 128);
// Symmetric about zero with an odd point count.
std::vector<double> default_phi_grid(double phi_zpf, int n = 161);

Wavefunction2D evaluate_wavefunction(const Spectrum& s, int index, const std::vector<double>& theta_grid,
                                     const std::vector<double>& phi_grid);
Wavefunction2D evaluate_coefficients(const CVector& c, const BasisConfig& b, double phi_zpf, double n_g,
                                     const std::vector<double>& theta_grid, const std::vector<double>& phi_grid);

// Normalised Hermite functions h_0..h_{m-1} at x, row per point.
RMatrix hermite_functions(const std::vector<double>& x, int m);

StateLabel classify_state(const Wavefunction2D& w, double flux);

// Classifies every state; near-degenerate pairs at symmetric flux are rotated into parity eigenstates first.
void label_spectrum(Spectrum& s, double flux, int theta_points = 128, int phi_points = 161);

}  // namespace zeropi
