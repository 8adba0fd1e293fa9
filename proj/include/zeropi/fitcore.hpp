#pragma once

#include "zeropi/hamiltonian.hpp"
#include "zeropi/optimize.hpp"
#include "zeropi/spectroscopy.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace zeropi::fitcore {

struct DataPoint {
    double flux = 0.0;       // flux quanta
    double n_g = 0.0;
    double frequency = 0.0;  // GHz
    double weight = 1.0;
    std::optional<std::pair<int, int>> label;  // (from, to) energy ranks
    int line = 0;  // source line, 0 when generated
};

struct SpectroscopyDataset {
    std::string name;
    std::vector<DataPoint> points;

    bool has_labeled() const;
    bool has_unlabeled() const;
    // n_g shared by every point, if any.
    std::optional<double> scan_ng() const;
    void validate() const;
};

// CSV with header flux_phi0,ng,freq_ghz,weight,from_label,to_label; label columns may be empty or absent.
SpectroscopyDataset load_dataset(const std::string& path);
SpectroscopyDataset parse_dataset(std::istream& in, const std::string& name);
void write_dataset(const SpectroscopyDataset& d, std::ostream& out);

inline constexpr int n_fit_parameters = 7;
// E_C_phi, E_C_theta, E_J, E_L, dE_J, beta_phi, beta_theta, then g_phi_theta when free.
std::vector<std::string> parameter_names(bool with_g);
RVector pack(const ZeroPiParams& p, bool with_g);
ZeroPiParams unpack(const RVector& x, const ZeroPiParams& base, bool with_g);

struct FitSettings {
    BasisConfig basis{7, 24};
    bool converge_basis = false;  // replace `basis` by a converged one at the initial point
    double basis_tol = 1e-6;
    int k_levels = 10;
    bool resonator = true;  // dressed |i,0> levels of the qubit-resonator system
    ResonatorParams resonator_params{7.35, 50.0, 2};
    double window_ghz = 0.5;   // unlabeled points farther than this from every visible line get the penalty
    double penalty_ghz = 0.5;
    double visibility_floor = 1e-4;
    bool fit_g = false;
    optimize::NelderMeadOptions simplex{};
    bool polish = true;  // Levenberg-Marquardt on the residual vector after the simplex
    optimize::LevenbergMarquardtOptions lm{100, 1e-6, 1e-10, 1e-12, 1e-3};  // stops once the cost falls by less than 1e-10 relative
    int workers = 1;
};

struct Assignment {
    int dataset = 0;
    int point = 0;
    int from = -1;
    int to = -1;
    double model_frequency = 0.0;
    bool excluded = false;  // outside the window, penalty applied
};

struct ResidualReport {
    RVector residuals;  // GHz, one per point, unweighted
    double metric = 0.0;  // sum w r^2
    std::vector<Assignment> assignments;
};

ResidualReport residuals(const ZeroPiParams& p, const std::vector<SpectroscopyDataset>& data, const FitSettings& s);

// Model line frequencies from the ground state at one bias point: index j-1 holds 0 -> j.
std::vector<double> model_lines(const ZeroPiParams& p, const FitSettings& s);

struct FitProblem {
    ZeroPiParams initial;
    optimize::Bounds bounds;  // in pack() order
    FitSettings settings;

    void validate() const;
};

// Energies and betas within [lo, hi] x |initial|, dE_J within [0, 0.5], g within +-0.1 rad/ns.
optimize::Bounds default_bounds(const ZeroPiParams& initial, bool with_g, double lo = 0.5, double hi = 1.5);

struct FitResult {
    ZeroPiParams best;
    double metric = 0.0;
    ResidualReport report;
    std::vector<double> trace;  // best metric after each iteration
    bool converged = false;
    std::string status;
    int evaluations = 0;
    BasisConfig basis;
    double basis_shift_ghz = 0.0;  // largest model-line change with both cutoffs raised at the optimum
};

FitResult fit_spectrum(const FitProblem& problem, const std::vector<SpectroscopyDataset>& data);

struct SyntheticOptions {
    double n_g = 0.0;
    std::vector<double> flux;
    int transitions = 8;      // 0 -> 1 .. 0 -> transitions
    bool labeled = true;
    double noise_ghz = 0.0;   // gaussian
    std::uint64_t seed = 0;
};

SpectroscopyDataset synthetic_dataset(const ZeroPiParams& truth, const SyntheticOptions& opt, const FitSettings& s);

}  // namespace zeropi::fitcore
