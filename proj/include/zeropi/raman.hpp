#pragma once

#include "zeropi/linalg.hpp"

#include <array>
#include <string>
#include <vector>

namespace zeropi::raman {

// Rotating-frame units: angular frequencies in rad/us (MHz x 2 pi), times in us.
// Levels: |0> and |2> are the ground states, |1> the ancillary level.

struct LambdaSystem {
    double omega_1 = 0.0;  // GHz x 2 pi
    double omega_2 = 0.0;  // GHz x 2 pi
    double Gamma_10 = 0.0;
    double Gamma_12 = 0.0;
    double Gamma_1_phi = 0.0;

    void validate() const;
};

struct LambdaDrive {
    double Omega_alpha = 0.0;
    double Omega_beta = 0.0;
    double Delta = 0.0;

    double Omega_tilde() const;
    void validate() const;
};

struct DressedLambda {
    double eps_0 = 0.0;
    double eps_plus = 0.0;
    double eps_minus = 0.0;
    Eigen::Vector3cd dark;  // normalised, -Omega_beta|0> + Omega_alpha|2>
    Eigen::Vector3cd plus;
    Eigen::Vector3cd minus;
};

DressedLambda dressed_lambda_eigensystem(const LambdaDrive& d);

struct LambdaAmplitudes {
    cplx alpha;
    cplx beta;
    cplx gamma;
};

// Closed-form square-pulse evolution from |0> at t = 0.
LambdaAmplitudes lambda_analytic_evolution(const LambdaDrive& d, double t);

// Omega_alpha Omega_beta / (2 Delta); Delta = 0 is rejected.
double effective_rabi_rate(double Omega_alpha, double Omega_beta, double Delta);

// Delta |1><1| + delta |2><2| + [Omega_alpha/2 |0><1| + Omega_beta/2 |1><2| + h.c.]
Eigen::Matrix3cd lambda_hamiltonian(cplx Omega_alpha, cplx Omega_beta, double Delta, double two_photon_detuning = 0.0);

enum class PulseShape { square, gaussian };

struct Pulse {
    PulseShape shape = PulseShape::square;
    double amplitude = 0.0;  // peak, rad/us
    double start = 0.0;      // us
    double stop = 0.0;       // us; a gaussian spans exactly 4 sigma
    double phase = 0.0;      // rad

    static Pulse square(double start, double stop, double amplitude, double phase = 0.0);
    static Pulse gaussian(double centre, double sigma, double amplitude, double phase = 0.0);

    double sigma() const { return (stop - start) / 4.0; }
    double centre() const { return 0.5 * (start + stop); }
    // Envelope at t, zero outside [start, stop); gaussians are truncated without rescaling.
    cplx value(double t) const;
    void validate() const;
};

struct PulseSchedule {
    std::vector<Pulse> alpha;
    std::vector<Pulse> beta;

    void validate() const;
    double end() const;
    std::vector<double> edges() const;
};

enum class DephasingConvention {
    half_rate,  // L = sqrt(G) |i><i|, coherences with |i> decay at G/2
    full_rate,  // L = sqrt(2G) |i><i|, coherences with |i> decay at G
};

// Extra collapse channel sqrt(rate) |to><from|; from == to is dephasing and follows the convention.
struct Channel {
    int from = 0;
    int to = 0;
    double rate = 0.0;
};

struct LindbladOptions {
    DephasingConvention dephasing = DephasingConvention::half_rate;
    std::vector<Channel> extra;
    std::array<double, 3> readout{0.0, 0.0, 1.0};  // signal = sum w_i P_i
    double two_photon_detuning = 0.0;              // rad/us on |2>
    double rtol = 1e-8;
    double atol = 1e-10;
    double min_step = 1e-12;  // us
};

struct Trajectory {
    std::vector<double> t;
    std::vector<std::array<double, 3>> populations;
    std::vector<double> signal;
    Eigen::Matrix3cd final_rho;
    double max_trace_error = 0.0;
    double min_eigenvalue = 1.0;
    long steps = 0;
};

// |i><i|
Eigen::Matrix3cd level_density(int i);

// Starts from rho0 at t_grid.front(); drive-free stretches are propagated with the exact Liouvillian exponential.
Trajectory lindblad_evolve(const LambdaSystem& sys, const PulseSchedule& sched, double Delta,
                           const std::vector<double>& t_grid, const LindbladOptions& opt = {},
                           const Eigen::Matrix3cd& rho0 = level_density(0));

enum class SequenceKind { rabi_amplitude, rabi_detuning, t1, ramsey, echo };

std::string to_string(SequenceKind k);
SequenceKind sequence_kind_from_string(const std::string& s);

struct SequenceConfig {
    SequenceKind kind = SequenceKind::t1;
    LambdaSystem system;
    double Delta = 0.0;           // rad/us
    double sigma = 0.2;           // us, gaussian width of every Raman pulse
    double pi_amplitude = 0.0;    // rad/us; 0 calibrates by amplitude scan
    double pi2_amplitude = 0.0;   // rad/us; 0 calibrates by bisection
    std::vector<double> grid;     // delays (us), amplitudes (rad/us) or detunings (rad/us)
    LindbladOptions lindblad;
    int workers = 1;
};

struct SequenceResult {
    SequenceKind kind = SequenceKind::t1;
    std::vector<double> x;
    std::vector<double> signal;
    std::vector<double> p2;
    double pi_amplitude = 0.0;
    double pi2_amplitude = 0.0;
    double pi_transfer = 0.0;  // |2> population after a calibrated pi pulse without waits
};

// Each Raman pulse drives alpha and beta together with equal gaussian envelopes.
SequenceResult simulate_sequence(const SequenceConfig& cfg);

// |2> population after one Raman pulse pair (Omega_alpha, Omega_beta), parallel over the map.
RMatrix amplitude_map(const LambdaSystem& sys, double Delta, double sigma, const std::vector<double>& omega_alpha,
                      const std::vector<double>& omega_beta, const LindbladOptions& opt = {}, int workers = 1);

enum class DecayModel { exp, exp_cos };

struct DecayFit {
    DecayModel model = DecayModel::exp;
    double rate = 0.0;       // 1/unit of t
    double amplitude = 0.0;
    double offset = 0.0;
    double frequency = 0.0;  // rad per unit of t, exp_cos only
    double phase = 0.0;
    double residual_rms = 0.0;
    bool converged = false;
    std::string status;
    std::vector<double> trace;
};

// y = A e^{-rate t} + C, or A e^{-rate t} cos(frequency t + phase) + C.
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& y, DecayModel model);

}  // namespace zeropi::raman
