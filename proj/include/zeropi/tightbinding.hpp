#pragma once

#include "zeropi/hamiltonian.hpp"

#include <functional>
#include <string>
#include <vector>

namespace zeropi {

// Sign convention: a charge-basis eigenvector c(n_g) of 4E_C(n - n_g)^2 + ... gives the periodic
// part u(theta) = sum_n c_n e^{i n theta}; the quasi-periodic state is Psi = e^{-i n_g theta} u,
// so Psi = sum_l e^{-i 2 pi l n_g} Phi(theta - 2 pi l).

// Wider charge window than the spectrum default; Wannier reality is limited by charge truncation.
inline constexpr BasisConfig tight_binding_basis{12, 40};

struct BlochFamily {
    int band = 0;                 // energy rank at the first grid point
    std::vector<double> ng_grid;  // uniform over one period
    std::vector<CVector> states;  // gauge-fixed charge (x) Fock vectors
    std::vector<double> energies;  // GHz
    std::vector<double> step_phases;  // arg <c_j|c_{j+1}>, last entry closes the loop
    double closure_phase = 0.0;   // total phase in (-pi, pi]; also the Wannier centre in theta
    double min_overlap = 1.0;     // smallest |<c_j|c_{j+1}>|^2 seen while tracking
    bool ambiguous = false;       // tracking could not follow the band unambiguously
    std::string note;
    BasisConfig basis;
    double phi_zpf = 0.0;
    Parity resolved = Parity::none;
};

struct BlochOptions {
    BasisConfig basis = tight_binding_basis;
    // plus/minus: replace the tracked state by the phi-reflection eigenstate of the given sign inside the span
    // of the state and its strongest reflection partner. Follows symmetric/antisymmetric doublets through
    // dE_J anticrossings; energies become expectation values. Needs integer flux.
    Parity resolve_parity = Parity::none;
    int workers = 1;
};

BlochFamily bloch_states(const ZeroPiParams& p, int band, const std::vector<double>& ng_grid,
                         const BlochOptions& opt = {});

// Uniform n_g grid over [0, 1).
std::vector<double> ng_grid(int n);

struct WannierGridOptions {
    int cells = 5;
    int points_per_cell = 128;
    int phi_points = 129;
};

struct Wannier2D {
    int band = 0;
    int cell = 0;
    double centre = 0.0;  // theta of the localisation centre
    int points_per_cell = 0;
    std::vector<double> theta;
    std::vector<double> phi;
    CMatrix values;   // rows follow theta
    CMatrix d_theta;  // d/dtheta of values
    CMatrix d_phi;    // d/dphi of values
    cplx phase{1.0, 0.0};  // global phase applied to the raw Bloch sum
    double norm = 0.0;
    double tail_norm = 0.0;      // weight farther than 1.5 cells from the centre
    double imag_residual = 0.0;  // max |Im| / max |value| after the global phase
    double participation_width = 0.0;  // 1 / integral of |Phi|^4 marginal along theta
};

// Grid-sampled sum (1/N) sum_j w_j e^{i 2 pi l n_j} Psi_j; w = 1 gives the Wannier function.
CMatrix bloch_sum(const BlochFamily& f, const std::vector<cplx>& weights, int cell, const std::vector<double>& theta,
                  const std::vector<double>& phi);

Wannier2D wannier_function(const BlochFamily& f, int cell = 0, const WannierGridOptions& opt = {});

// theta grid of a Wannier function centred at `centre`.
std::vector<double> wannier_theta_grid(double centre, const WannierGridOptions& opt);

// [E(0) - E(1/2)] / 4 along the tracked band.
double hopping_integral(const ZeroPiParams& p, int band, const BasisConfig& b = tight_binding_basis, int workers = 1);

struct BandEnergies {
    double epsilon0 = 0.0;
    double t = 0.0;
};

// <Phi|H|Phi> and <Phi(theta - 2 pi)|H|Phi(theta)> by quadrature on the Wannier grid.
BandEnergies wannier_band_energies(const BlochFamily& f, const Wannier2D& w);

struct CosineFit {
    double epsilon0 = 0.0;
    double t = 0.0;
    double peak_to_peak = 0.0;
    double max_residual = 0.0;  // absolute, GHz
    double relative_residual() const { return peak_to_peak > 0.0 ? max_residual / peak_to_peak : 0.0; }
};

// Least-squares epsilon0 + 2 t cos(2 pi n_g) through sampled band energies.
CosineFit fit_cosine_band(const std::vector<double>& ng, const std::vector<double>& energies);

struct EtaCoefficients {
    cplx eta0_C, eta0_L, eta0_R;
    cplx eta1_C, eta1_L, eta1_R;
    cplx eta_C, eta_L, eta_R;  // phi-derivative integrals
    bool inter_valley = false;  // C integrals are not defined and left at zero
    int l_C = 0, l_L = 0, l_R = 0;  // lattice translation of Phi_q used for each integral
};

// L: copy of Phi_q one neighbour spacing below the centre of Phi_p, R: above, C: same site.
// Spacing is 2 pi within a valley and pi between valleys.
EtaCoefficients eta_coefficients(const Wannier2D& w_p, const Wannier2D& w_q);

enum class ParityCase { same_same, opposite_theta, opposite_phi, opposite_both };
enum class TransitionKind { fluxon, plasmon };
enum class TbOperator { d_theta, d_phi };

std::string to_string(ParityCase c);

// Normalised table entry; exact zero for the forbidden cells.
double tb_shape(double n_g, ParityCase c, TransitionKind k, TbOperator op, double epsilon = 0.0);

// Table form scaled by the eta prefactors; epsilon of the plasmon forms comes from 2 eta_L / eta_C.
double tb_matrix_element(const EtaCoefficients& etas, double n_g, ParityCase c, TransitionKind k, TbOperator op);

// Nearest-neighbour sum for <u_p| i d |u_q> including phases, in the sign convention above.
cplx tb_two_path_sum(const EtaCoefficients& etas, double n_g, TbOperator op);

struct TbReport {
    std::vector<double> ng;
    std::vector<double> exact;  // |<i|op|j>|
    std::vector<double> model;  // scale * shape
    double scale = 0.0;
    double epsilon = 0.0;
    double nrms = 0.0;  // rms residual / peak of exact values
};

// Exact matrix elements along the grid (states followed by overlap) against the best-scale shape.
TbReport verify_tb_against_exact(const ZeroPiParams& p, int i, int j, const std::vector<double>& ng,
                                 ChargeOperator op, const std::function<double(double)>& shape,
                                 const BasisConfig& b = tight_binding_basis, int workers = 1);
TbReport verify_tb_against_exact(const ZeroPiParams& p, int i, int j, const std::vector<double>& ng,
                                 ParityCase c, TransitionKind k, TbOperator op, const BasisConfig& b = tight_binding_basis,
                                 int workers = 1);

// Tracked band energies over an n_g grid, state `band` picked by energy at the first point.
std::vector<double> band_dispersion(const ZeroPiParams& p, int band, const std::vector<double>& ng,
                                    const BasisConfig& b = tight_binding_basis, int workers = 1);

// Tracked |<i|op|j>| over an n_g grid.
std::vector<double> matrix_element_scan(const ZeroPiParams& p, int i, int j, const std::vector<double>& ng,
                                        ChargeOperator op, const BasisConfig& b = tight_binding_basis, int workers = 1);

}  // namespace zeropi
