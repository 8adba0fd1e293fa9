#pragma once

#include "zeropi/hamiltonian.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace zeropi {

struct Transition {
    int from = 0;
    int to = 0;
    std::optional<StateLabel> from_label;
    std::optional<StateLabel> to_label;
    double frequency = 0.0;  // GHz
    cplx me_theta;           // <from|n_theta|to>
    cplx me_phi;             // <from|n_phi|to>
    double drive_weight = 0.0;  // |beta_phi me_phi + beta_theta me_theta|
};

// Upward transitions out of each initial state of an already computed spectrum.
std::vector<Transition> transitions_from_spectrum(const Spectrum& s, const std::vector<int>& initial,
                                                  double beta_phi, double beta_theta);

std::vector<Transition> transition_table(const ZeroPiParams& p, const std::vector<int>& initial, int k,
                                         const BasisConfig& b = {}, bool label = true);

// Transitions whose drive weight reaches floor * (strongest weight in the list).
std::vector<Transition> visible_transitions(const std::vector<Transition>& t, double floor = 1e-4);

enum class SweepAxis { flux, charge };
enum class Branch { even, odd };

std::string to_string(SweepAxis a);
std::string to_string(Branch b);

struct SweepOptions {
    int k = 12;
    std::vector<int> initial{0};
    bool parity_branches = false;
    bool track = true;   // follow states by eigenvector overlap
    bool label = false;  // classify states at every point
    BasisConfig basis{};
    int workers = 1;
};

struct SweepPoint {
    double axis_value = 0.0;
    Branch branch = Branch::even;
    double n_g = 0.0;
    double flux = 0.0;
    RVector energies;      // indexed by tracked identity
    std::vector<int> order;  // order[i] = energy rank of tracked state i
    std::vector<Transition> transitions;
};

struct SweepResult {
    SweepAxis axis = SweepAxis::flux;
    std::vector<double> grid;
    std::vector<SweepPoint> points;  // grid-major; even before odd when branches are on
};

SweepResult sweep(const ZeroPiParams& p, SweepAxis axis, const std::vector<double>& grid, const SweepOptions& opt = {});

cplx charge_matrix_element(const ZeroPiParams& p, int i, int j, ChargeOperator op, const BasisConfig& b = {});

// Reorders spectrum columns so that column i continues reference column i (max overlap,
// energy order for the rest). Returns the permutation applied: new column i = old column perm[i].
// charge_shift moves the reference by that many charge units first (n_g wrapped across an integer).
std::vector<int> track_states(const CMatrix& reference, Spectrum& s, int charge_shift = 0, double min_overlap = 0.5);

// Shifts product-basis vectors by dn charge units, c_n -> c_{n+dn}; amplitude pushed out of the window is dropped.
CMatrix shift_charge(const CMatrix& v, const BasisConfig& b, int dn);

struct ResonatorParams {
    double f_r = 7.35;     // GHz
    double Z_r = 50.0;     // ohm
    int n_photon_max = 5;

    void validate() const;
    // 2 e V_rms / h in GHz with V_rms = sqrt(2 h f_r^2 Z_r)
    double voltage_coupling() const;
};

struct DressedState {
    int qubit = 0;
    int photons = 0;
    double energy = 0.0;   // GHz, relative to the dressed ground state
    double overlap = 0.0;  // |<dressed|qubit, photons>|^2
};

struct DressedTransition {
    DressedState from;
    DressedState to;
    double frequency = 0.0;
    double weight = 0.0;  // |<to| (beta.n) x 1 |from>|
};

struct CoupledSpectrum {
    std::vector<DressedState> states;  // ascending energy
    std::vector<DressedTransition> transitions;

    // Dressed state continuing bare |qubit, photons>, or nullptr when not retained.
    const DressedState* find(int qubit, int photons) const;
};

struct CoupledOptions {
    int k_qubit = 20;
    std::vector<int> initial{0};    // qubit indices whose |i,0> dressed states start transitions
    bool from_one_photon = true;    // also start from |0,1>, giving red sidebands
    bool transitions = true;
};

CoupledSpectrum coupled_spectrum(const ZeroPiParams& p, const ResonatorParams& r, const CoupledOptions& opt = {},
                                 const BasisConfig& b = {});
// Uses a qubit spectrum that already holds at least k_qubit states.
CoupledSpectrum coupled_spectrum(const Spectrum& qubit, double beta_phi, double beta_theta, const ResonatorParams& r,
                                 const CoupledOptions& opt = {});

enum class AtConvention { as_printed, standard };

// as_printed: eps = d +- sqrt(d^2 + Omega^2); standard: half of that; d = omega_q - omega_c.
std::pair<double, double> autler_townes_dispersion(double omega_q, double omega_c, double Omega_c,
                                                   AtConvention c = AtConvention::as_printed);

struct AtLine {
    double omega_c = 0.0;
    double frequency = 0.0;  // dressed-state energy measured from the bare probe line
};

struct AtFit {
    double Omega_c = 0.0;
    double omega_q = 0.0;
    double rms = 0.0;
    double rms_plus = 0.0;
    double rms_minus = 0.0;
    int n_plus = 0;
    int n_minus = 0;
    bool converged = false;
};

AtFit fit_autler_townes(const std::vector<AtLine>& lines, AtConvention c = AtConvention::as_printed);

}  // namespace zeropi
