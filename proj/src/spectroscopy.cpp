#include "zeropi/spectroscopy.hpp"
#include "zeropi/errors.hpp"
#include "zeropi/parallel.hpp"
#include "zeropi/units.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace zeropi {

std::string to_string(SweepAxis a) { return a == SweepAxis::flux ? "flux" : "charge"; }
std::string to_string(Branch b) { return b == Branch::even ? "even" : "odd"; }

std::vector<Transition> transitions_from_spectrum(const Spectrum& s, const std::vector<int>& initial,
                                                  double beta_phi, double beta_theta)
{
    for (int i : initial)
        require(i >= 0 && i < s.size(), "transition table: initial index " + std::to_string(i) +
                                            " outside the " + std::to_string(s.size()) + " computed levels");
    const CMatrix mt = operator_in_eigenbasis(s, ChargeOperator::n_theta);
    const CMatrix mp = operator_in_eigenbasis(s, ChargeOperator::n_phi);
    const bool labelled = static_cast<int>(s.labels.size()) == s.size();

    std::vector<Transition> out;
    for (int i : initial) {
        for (int j = 0; j < s.size(); ++j) {
            if (j == i || s.eigenvalues[j] <= s.eigenvalues[i]) continue;
            Transition t;
            t.from = i;
            t.to = j;
            t.frequency = s.eigenvalues[j] - s.eigenvalues[i];
            t.me_theta = mt(i, j);
            t.me_phi = mp(i, j);
            t.drive_weight = std::abs(beta_phi * t.me_phi + beta_theta * t.me_theta);
            if (labelled) {
                t.from_label = s.labels[i];
                t.to_label = s.labels[j];
            }
            out.push_back(t);
        }
    }
    return out;
}

std::vector<Transition> transition_table(const ZeroPiParams& p, const std::vector<int>& initial, int k,
                                         const BasisConfig& b, bool label)
{
    for (int i : initial)
        require(i >= 0 && i < k, "transition_table: initial index " + std::to_string(i) + " must be < k");
    Spectrum s = solve(p, b, k);
    if (label) label_spectrum(s, p.flux);
    return transitions_from_spectrum(s, initial, p.beta_phi, p.beta_theta);
}

std::vector<Transition> visible_transitions(const std::vector<Transition>& t, double floor)
{
    double strongest = 0.0;
    for (const auto& x : t) strongest = std::max(strongest, x.drive_weight);
    std::vector<Transition> out;
    for (const auto& x : t)
        if (x.drive_weight >= floor * strongest && x.drive_weight > 0.0) out.push_back(x);
    return out;
}

CMatrix shift_charge(const CMatrix& v, const BasisConfig& b, int dn)
{
    const int m = b.n_phi_max;
    CMatrix out = CMatrix::Zero(v.rows(), v.cols());
    for (int n = -b.n_theta_max; n <= b.n_theta_max; ++n) {
        const int src = n + dn;
        if (src < -b.n_theta_max || src > b.n_theta_max) continue;
        out.middleRows(basis_index(b, n, 0), m) = v.middleRows(basis_index(b, src, 0), m);
    }
    return out;
}

std::vector<int> track_states(const CMatrix& reference, Spectrum& s, int charge_shift, double min_overlap)
{
    const int k = s.size();
    require(reference.cols() == k && reference.rows() == s.eigenvectors.rows(), "track_states: shape mismatch");
    const CMatrix ref = charge_shift == 0 ? reference : shift_charge(reference, s.basis, charge_shift);
    const RMatrix ov = (ref.adjoint() * s.eigenvectors).cwiseAbs2();

    std::vector<int> perm(k, -1);
    std::vector<bool> used(k, false);
    std::vector<std::tuple<double, int, int>> cand;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (ov(i, j) >= min_overlap) cand.emplace_back(ov(i, j), i, j);
    std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });
    for (const auto& [o, i, j] : cand) {
        if (perm[i] >= 0 || used[j]) continue;
        perm[i] = j;
        used[j] = true;
    }
    int next = 0;
    for (int i = 0; i < k; ++i) {
        if (perm[i] >= 0) continue;
        while (used[next]) ++next;
        perm[i] = next;
        used[next] = true;
    }

    RVector e(k);
    CMatrix v(s.eigenvectors.rows(), k);
    std::vector<StateLabel> labels;
    for (int i = 0; i < k; ++i) {
        e[i] = s.eigenvalues[perm[i]];
        v.col(i) = s.eigenvectors.col(perm[i]);
        if (!s.labels.empty()) labels.push_back(s.labels[perm[i]]);
    }
    s.eigenvalues = e;
    s.eigenvectors = v;
    s.labels = labels;
    return perm;
}

SweepResult sweep(const ZeroPiParams& p, SweepAxis axis, const std::vector<double>& grid, const SweepOptions& opt)
{
    p.validate();
    require(!grid.empty(), "sweep: grid is empty");
    require(opt.k >= 1, "sweep: k must be >= 1");
    for (int i : opt.initial) require(i >= 0 && i < opt.k, "sweep: initial index must be < k");
    opt.basis.validate();

    const int nb = opt.parity_branches ? 2 : 1;
    const int npts = static_cast<int>(grid.size());
    SweepResult res;
    res.axis = axis;
    res.grid = grid;
    res.points.resize(static_cast<std::size_t>(npts) * nb);

    std::vector<Spectrum> spectra(res.points.size());
    std::vector<double> raw_ng(res.points.size());
    parallel_for(static_cast<int>(res.points.size()), opt.workers, [&](int idx) {
        const int g = idx / nb;
        const Branch br = (idx % nb == 0) ? Branch::even : Branch::odd;
        ZeroPiParams q = p;
        if (axis == SweepAxis::flux) q.flux = grid[g];
        else q.n_g = grid[g];
        if (br == Branch::odd) q.n_g += 0.5;
        raw_ng[idx] = q.n_g;
        spectra[idx] = solve(q, opt.basis, opt.k);
        if (opt.label) label_spectrum(spectra[idx], q.flux);
        SweepPoint& pt = res.points[idx];
        pt.axis_value = grid[g];
        pt.branch = br;
        pt.n_g = q.n_g;
        pt.flux = q.flux;
    });

    for (int b = 0; b < nb; ++b) {
        for (int g = 0; g < npts; ++g) {
            const int idx = g * nb + b;
            Spectrum& s = spectra[idx];
            std::vector<int> order(opt.k);
            std::iota(order.begin(), order.end(), 0);
            if (opt.track && g > 0) {
                const int prev = (g - 1) * nb + b;
                const int dn = static_cast<int>(std::floor(raw_ng[idx]) - std::floor(raw_ng[prev]));
                order = track_states(spectra[prev].eigenvectors, s, dn);
            }
            SweepPoint& pt = res.points[idx];
            pt.energies = s.eigenvalues;
            pt.order = order;
            pt.transitions = transitions_from_spectrum(s, opt.initial, p.beta_phi, p.beta_theta);
        }
    }
    return res;
}

cplx charge_matrix_element(const ZeroPiParams& p, int i, int j, ChargeOperator op, const BasisConfig& b)
{
    require(i >= 0 && j >= 0, "charge_matrix_element: indices must be >= 0");
    const Spectrum s = solve(p, b, std::max(i, j) + 1);
    const CMatrix v = apply_charge_operator(s.basis, s.phi_zpf, op, s.eigenvectors.col(j));
    return s.eigenvectors.col(i).dot(v.col(0));
}

void ResonatorParams::validate() const
{
    require(std::isfinite(f_r) && f_r > 0.0, "ResonatorParams: f_r must be > 0");
    require(std::isfinite(Z_r) && Z_r > 0.0, "ResonatorParams: Z_r must be > 0");
    require(n_photon_max >= 1, "ResonatorParams: n_photon_max must be >= 1");
}

double ResonatorParams::voltage_coupling() const
{
    const double f_hz = f_r * 1e9;
    const double v_rms = std::sqrt(2.0 * units::planck * f_hz * f_hz * Z_r);
    return 2.0 * units::elementary_charge * v_rms / units::planck * 1e-9;
}

const DressedState* CoupledSpectrum::find(int qubit, int photons) const
{
    for (const auto& s : states)
        if (s.qubit == qubit && s.photons == photons) return &s;
    return nullptr;
}

CoupledSpectrum coupled_spectrum(const Spectrum& qubit, double beta_phi, double beta_theta, const ResonatorParams& r,
                                 const CoupledOptions& opt)
{
    r.validate();
    const int k = opt.k_qubit;
    require(k >= 1 && k <= qubit.size(), "coupled_spectrum: qubit spectrum holds fewer than k_qubit states");
    for (int i : opt.initial) require(i >= 0 && i < k, "coupled_spectrum: initial index must be < k_qubit");
    const int nph = r.n_photon_max + 1;
    const long dim = static_cast<long>(k) * nph;
    require(dim <= default_dimension_ceiling, "coupled_spectrum: dimension exceeds ceiling");

    Spectrum q = qubit;
    q.eigenvalues.conservativeResize(k);
    q.eigenvectors.conservativeResize(Eigen::NoChange, k);
    const CMatrix drive = beta_phi * operator_in_eigenbasis(q, ChargeOperator::n_phi) +
                          beta_theta * operator_in_eigenbasis(q, ChargeOperator::n_theta);
    const double scale = r.voltage_coupling();

    CMatrix h = CMatrix::Zero(dim, dim);
    for (int i = 0; i < k; ++i) {
        for (int n = 0; n < nph; ++n) h(i * nph + n, i * nph + n) = q.eigenvalues[i] - q.eigenvalues[0] + r.f_r * n;
        for (int j = 0; j < k; ++j) {
            const cplx g = scale * drive(i, j);
            for (int n = 0; n + 1 < nph; ++n) {
                const double a = std::sqrt(static_cast<double>(n + 1));
                h(i * nph + n, j * nph + n + 1) += g * a;
                h(i * nph + n + 1, j * nph + n) += g * a;
            }
        }
    }
    const EigenPairs ep = lowest_eigenpairs(h, static_cast<int>(dim), true);

    // unique assignment of dressed to bare product states, strongest overlaps first
    const RMatrix ov = ep.vectors.cwiseAbs2();  // (bare, dressed)
    std::vector<std::tuple<double, int, int>> cand;
    for (int b = 0; b < dim; ++b)
        for (int d = 0; d < dim; ++d) cand.emplace_back(ov(b, d), b, d);
    std::sort(cand.begin(), cand.end(), [](const auto& x, const auto& y) {
        if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
        return std::make_pair(std::get<1>(x), std::get<2>(x)) < std::make_pair(std::get<1>(y), std::get<2>(y));
    });
    std::vector<int> bare_of(dim, -1), dressed_of(dim, -1);
    for (const auto& [o, b, d] : cand) {
        if (bare_of[d] >= 0 || dressed_of[b] >= 0) continue;
        bare_of[d] = b;
        dressed_of[b] = d;
    }

    CoupledSpectrum out;
    const double e0 = ep.values[0];
    for (int d = 0; d < dim; ++d) {
        DressedState s;
        s.qubit = bare_of[d] / nph;
        s.photons = bare_of[d] % nph;
        s.energy = ep.values[d] - e0;
        s.overlap = ov(bare_of[d], d);
        out.states.push_back(s);
    }
    if (!opt.transitions) return out;

    auto apply_drive = [&](const CVector& v) {
        CVector w = CVector::Zero(dim);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                for (int n = 0; n < nph; ++n) w[i * nph + n] += drive(i, j) * v[j * nph + n];
        return w;
    };
    std::vector<int> starts;
    for (int i : opt.initial) starts.push_back(dressed_of[i * nph]);
    if (opt.from_one_photon) starts.push_back(dressed_of[1]);
    for (int d0 : starts) {
        const CVector dv = apply_drive(ep.vectors.col(d0));
        for (int d = 0; d < dim; ++d) {
            if (ep.values[d] <= ep.values[d0]) continue;
            DressedTransition t;
            t.from = out.states[d0];
            t.to = out.states[d];
            t.frequency = ep.values[d] - ep.values[d0];
            t.weight = std::abs(ep.vectors.col(d).dot(dv));
            out.transitions.push_back(t);
        }
    }
    return out;
}

CoupledSpectrum coupled_spectrum(const ZeroPiParams& p, const ResonatorParams& r, const CoupledOptions& opt,
                                 const BasisConfig& b)
{
    const Spectrum s = solve(p, b, opt.k_qubit);
    return coupled_spectrum(s, p.beta_phi, p.beta_theta, r, opt);
}

}  // namespace zeropi
