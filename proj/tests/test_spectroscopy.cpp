#include "zeropi/errors.hpp"
#include "zeropi/spectroscopy.hpp"

#include "approx.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace zeropi;

namespace {

int find_label(const Spectrum& s, const std::string& name)
{
    for (int i = 0; i < s.size(); ++i)
        if (s.labels[i].name() == name) return i;
    for (int i = 0; i < s.size(); ++i) {
        const std::string n = s.labels[i].name();
        if (n.size() == name.size() + 1 && n.compare(0, name.size(), name) == 0 && (n.back() == '+' || n.back() == '-'))
            return i;
    }
    return -1;
}

Spectrum labelled(const ZeroPiParams& p, int k = 12)
{
    Spectrum s = solve(p, BasisConfig{}, k);
    label_spectrum(s, p.flux);
    return s;
}

double transition_frequency(const ZeroPiParams& p, const std::string& from, const std::string& to)
{
    const Spectrum s = labelled(p);
    const int i = find_label(s, from), j = find_label(s, to);
    REQUIRE(i >= 0);
    REQUIRE(j >= 0);
    return s.eigenvalues[j] - s.eigenvalues[i];
}

}  // namespace

TEST_SUITE("spectroscopy")
{
    TEST_CASE("ground-state table holds a flat plasmon line")
    {
        ZeroPiParams p = fitted_device_params();
        const auto t = transition_table(p, {0}, 12);
        bool found = false;
        for (const auto& x : t)
            if (x.to_label && x.to_label->name() == "0_ptheta") found = true;
        CHECK(found);
        p.flux = 0.0;
        const double f0 = transition_frequency(p, "0_s", "0_ptheta");
        p.flux = 0.3;
        const double f1 = transition_frequency(p, "0_s", "0_ptheta");
        p.flux = 0.0;
        const double g0 = transition_frequency(p, "0_s", "pi_s");
        p.flux = 0.3;
        const double g1 = transition_frequency(p, "0_s", "pi_s");
        CHECK(std::abs(f1 - f0) < 0.1 * std::abs(g1 - g0));
    }

    TEST_CASE("phi-parity selection rule")
    {
        ZeroPiParams p = fitted_device_params();
        p.dE_J = 0.0;
        p.n_g = 0.1;
        const auto t = transition_table(p, {0}, 10);
        int same = 0;
        for (const auto& x : t) {
            if (x.from_label->phi_parity == Parity::none || x.to_label->phi_parity == Parity::none) continue;
            if (x.from_label->phi_parity == x.to_label->phi_parity) {
                ++same;
                CHECK(std::abs(x.me_phi) < 1e-10);
            }
        }
        CHECK(same > 0);
    }

    TEST_CASE("initial states enlarge the table monotonically")
    {
        const ZeroPiParams p = fitted_device_params();
        const auto a = transition_table(p, {0}, 10, BasisConfig{}, false);
        const auto b = transition_table(p, {0, 1, 2}, 10, BasisConfig{}, false);
        CHECK(b.size() > a.size());
        for (const auto& x : a) {
            const bool in = std::any_of(b.begin(), b.end(), [&](const Transition& y) {
                return y.from == x.from && y.to == x.to && y.frequency == x.frequency;
            });
            CHECK(in);
        }
        CHECK_THROWS_AS(transition_table(p, {10}, 10), ValidationError);
    }

    TEST_CASE("thermal lines are absent from the ground-state table")
    {
        const ZeroPiParams p = fitted_device_params();
        const auto a = transition_table(p, {0}, 10, BasisConfig{}, false);
        const auto b = transition_table(p, {1}, 10, BasisConfig{}, false);
        int distinct = 0;
        for (const auto& y : b) {
            const bool shared = std::any_of(a.begin(), a.end(),
                                            [&](const Transition& x) { return std::abs(x.frequency - y.frequency) < 1e-6; });
            if (!shared) ++distinct;
        }
        CHECK(distinct > 0);
    }

    TEST_CASE("matrix elements are Hermitian")
    {
        const Spectrum s = solve(fitted_device_params(), BasisConfig{}, 8);
        for (auto op : {ChargeOperator::n_theta, ChargeOperator::n_phi}) {
            const CMatrix m = operator_in_eigenbasis(s, op);
            CHECK((m - m.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
            for (int i = 0; i < 8; ++i) CHECK(std::abs(m(i, i).imag()) < 1e-10);
        }
    }

    TEST_CASE("ground-state fluxon element is exponentially small" * doctest::may_fail())
    {
        ZeroPiParams p = fitted_device_params();
        p.n_g = 0.25;
        const Spectrum s = labelled(p);
        const int g = find_label(s, "0_s"), e = find_label(s, "pi_s+"), pl = find_label(s, "0_ptheta");
        REQUIRE(g >= 0);
        REQUIRE(e >= 0);
        REQUIRE(pl >= 0);
        const CMatrix m = operator_in_eigenbasis(s, ChargeOperator::n_theta);
        CHECK(std::abs(m(g, e)) < 1e-3 * std::abs(m(g, pl)));
    }

    TEST_CASE("fluxon element between excited plasmons follows |cos pi n_g|" * doctest::may_fail())
    {
        ZeroPiParams p = fitted_device_params();
        std::vector<double> v;
        for (double ng : {0.0, 0.25, 0.5}) {
            p.n_g = ng;
            const Spectrum s = labelled(p);
            const int i = find_label(s, "0_ptheta"), j = find_label(s, "pi_ptheta-");
            REQUIRE(i >= 0);
            REQUIRE(j >= 0);
            v.push_back(std::abs(operator_in_eigenbasis(s, ChargeOperator::n_theta)(i, j)));
        }
        CHECK(v[2] < 1e-3 * v[0]);
        CHECK(v[1] / v[0] == approx(std::sqrt(0.5)).epsilon(0.1));
    }

    TEST_CASE("charge sweep: eye-like levels disperse far more than the logical line")
    {
        const ZeroPiParams p = fitted_device_params();
        SweepOptions o;
        o.k = 30;
        o.track = false;
        const auto r = sweep(p, SweepAxis::charge, linspace(0.0, 0.5, 11), o);
        double lo = 1e9, hi = -1e9, eye = 0.0;
        std::vector<double> emin(o.k, 1e9), emax(o.k, -1e9);
        for (const auto& pt : r.points) {
            for (int i = 0; i < o.k; ++i) {
                const double e = pt.energies[i] - pt.energies[0];
                emin[i] = std::min(emin[i], e);
                emax[i] = std::max(emax[i], e);
            }
        }
        for (int i = 1; i < o.k; ++i)
            if (emin[i] > 9.0 && emax[i] < 13.0) eye = std::max(eye, emax[i] - emin[i]);
        ZeroPiParams q = p;
        for (double ng : linspace(0.0, 0.5, 11)) {
            q.n_g = ng;
            const double f = transition_frequency(q, "0_s", "pi_s+");
            lo = std::min(lo, f);
            hi = std::max(hi, f);
        }
        MESSAGE("logical dispersion " << (hi - lo) << " GHz, eye-like dispersion " << eye << " GHz");
        CHECK(eye > 0.1);
        CHECK(hi - lo < 1e-3 * eye);
    }

    TEST_CASE("parity branches")
    {
        ZeroPiParams p = fitted_device_params();
        p.n_g = 0.25;
        SweepOptions o;
        o.k = 8;
        o.basis.n_theta_max = 14;
        o.parity_branches = true;
        const auto r = sweep(p, SweepAxis::flux, {0.0, 0.1, 0.2}, o);
        REQUIRE(r.points.size() == 6);
        for (int g = 0; g < 3; ++g) {
            const auto& even = r.points[2 * g];
            const auto& odd = r.points[2 * g + 1];
            CHECK(even.branch == Branch::even);
            CHECK(odd.branch == Branch::odd);
            CHECK(odd.n_g == approx(0.75));
            RVector a = even.energies, b = odd.energies;
            std::sort(a.data(), a.data() + a.size());
            std::sort(b.data(), b.data() + b.size());
            CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9 * a.cwiseAbs().maxCoeff());
        }
    }

    TEST_CASE("one-point sweep equals the transition table")
    {
        const ZeroPiParams p = fitted_device_params();
        SweepOptions o;
        o.k = 8;
        const auto r = sweep(p, SweepAxis::flux, {p.flux}, o);
        const auto t = transition_table(p, {0}, 8, BasisConfig{}, false);
        REQUIRE(r.points.size() == 1);
        REQUIRE(r.points[0].transitions.size() == t.size());
        for (std::size_t i = 0; i < t.size(); ++i) CHECK(r.points[0].transitions[i].frequency == t[i].frequency);
        CHECK_THROWS_AS(sweep(p, SweepAxis::flux, {}, o), ValidationError);
    }

    TEST_CASE("sweet spot at zero flux")
    {
        ZeroPiParams p = fitted_device_params();
        auto slope = [&](double flux) {
            const double h = 1e-4;
            p.flux = flux + h;
            const double a = transition_frequency(p, "0_s", "pi_s");
            p.flux = flux - h;
            const double b = transition_frequency(p, "0_s", "pi_s");
            return (a - b) / (2 * h);
        };
        CHECK(std::abs(slope(0.0)) < 1e-3 * std::abs(slope(0.05)));
    }

    TEST_CASE("decoupled resonator")
    {
        ZeroPiParams p = fitted_device_params();
        p.beta_phi = p.beta_theta = 0.0;
        ResonatorParams r;
        r.n_photon_max = 2;
        CoupledOptions o;
        o.k_qubit = 6;
        const Spectrum q = solve(p, BasisConfig{}, 6);
        const auto cs = coupled_spectrum(q, 0.0, 0.0, r, o);
        REQUIRE(cs.find(0, 0) != nullptr);
        CHECK(std::abs(cs.find(0, 0)->energy) < 1e-12);
        for (int i = 1; i < 6; ++i) {
            const DressedState* d = cs.find(i, 0);
            REQUIRE(d != nullptr);
            CHECK(d->energy == approx(q.eigenvalues[i] - q.eigenvalues[0]).epsilon(1e-12));
        }
        CHECK(cs.find(0, 1)->energy == approx(r.f_r).epsilon(1e-12));
    }

    TEST_CASE("resonator line barely moves with flux")
    {
        ZeroPiParams p = fitted_device_params();
        double lo = 1e9, hi = -1e9;
        for (double flux : {0.0, 0.15, 0.3, 0.45}) {
            p.flux = flux;
            CoupledOptions o;
            o.transitions = false;
            ResonatorParams r;
            r.n_photon_max = 2;
            const auto cs = coupled_spectrum(p, r, o);
            const double f = cs.find(0, 1)->energy - cs.find(0, 0)->energy;
            lo = std::min(lo, f);
            hi = std::max(hi, f);
        }
        MESSAGE("dressed resonator line " << lo << " to " << hi << " GHz");
        CHECK(std::abs(lo - 7.328) < 0.005);
        CHECK(hi - lo < 0.005);
    }

    TEST_CASE("dressed shifts follow second-order perturbation theory")
    {
        const ZeroPiParams p = fitted_device_params();
        ResonatorParams r;
        r.n_photon_max = 3;
        CoupledOptions o;
        o.k_qubit = 10;
        o.from_one_photon = true;
        const Spectrum q = solve(p, BasisConfig{}, o.k_qubit);
        const auto cs = coupled_spectrum(q, p.beta_phi, p.beta_theta, r, o);
        const CMatrix g = r.voltage_coupling() * (p.beta_phi * operator_in_eigenbasis(q, ChargeOperator::n_phi) +
                                                  p.beta_theta * operator_in_eigenbasis(q, ChargeOperator::n_theta));
        auto shift = [&](int i) {
            double s = 0.0;
            for (int j = 0; j < o.k_qubit; ++j) s += std::norm(g(i, j)) / (q.eigenvalues[i] - q.eigenvalues[j] - r.f_r);
            return s;
        };
        for (int i : {1, 2}) {
            const double exact = cs.find(i, 0)->energy - (q.eigenvalues[i] - q.eigenvalues[0]);
            const double pt = shift(i) - shift(0);
            CHECK(exact == approx(pt).epsilon(0.05));
        }
        // red sideband out of |0,1> into a qubit excitation without the photon
        bool sideband = false;
        for (const auto& t : cs.transitions)
            if (t.from.qubit == 0 && t.from.photons == 1 && t.to.photons == 0 && t.to.qubit > 0 && t.weight > 0)
                sideband = true;
        CHECK(sideband);
    }

    TEST_CASE("Autler-Townes dispersion as printed")
    {
        auto [a, b] = autler_townes_dispersion(5.0, 5.0, 0.01);
        CHECK(a == approx(0.01));
        CHECK(b == approx(-0.01));
        std::tie(a, b) = autler_townes_dispersion(5.0, 4.9, 0.0);
        CHECK(a == approx(0.2));
        CHECK(std::abs(b) < 1e-12);
        std::tie(a, b) = autler_townes_dispersion(5.0, 4.0, 0.01);
        CHECK(a == approx(2.0).epsilon(1e-4));
        CHECK(std::abs(b) < 1e-4);
        std::tie(a, b) = autler_townes_dispersion(5.0, 5.0, 0.01, AtConvention::standard);
        CHECK(a == approx(0.005));
    }

    TEST_CASE("Autler-Townes fit")
    {
        const double om = 0.010, wq = 5.2;
        auto make = [&](double noise, std::uint64_t seed) {
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> n(0.0, 1.0);
            std::vector<AtLine> lines;
            for (double wc : linspace(wq - 0.03, wq + 0.03, 25)) {
                const auto [ep, em] = autler_townes_dispersion(wq, wc, om);
                lines.push_back({wc, ep + noise * n(rng)});
                lines.push_back({wc, em + noise * n(rng)});
            }
            return lines;
        };
        const AtFit exact = fit_autler_townes(make(0.0, 1));
        CHECK(exact.Omega_c == approx(om).epsilon(1e-6));
        CHECK(exact.omega_q == approx(wq).epsilon(1e-9));
        const AtFit noisy = fit_autler_townes(make(1e-4, 2));
        CHECK(noisy.Omega_c == approx(om).epsilon(0.02));
        CHECK(noisy.n_plus > 0);
        CHECK(noisy.n_minus > 0);

        std::vector<AtLine> same(4, AtLine{5.0, 0.01});
        CHECK_THROWS_AS(fit_autler_townes(same), ValidationError);
    }

    TEST_CASE("Autler-Townes splittings of the two charge parities coincide at n_g = 1/4")
    {
        ZeroPiParams p = fitted_device_params();
        std::vector<double> omega;
        for (double ng : {0.25, 0.75}) {
            p.n_g = ng;
            const Spectrum s = labelled(p);
            const int i = find_label(s, "0_ptheta"), j = find_label(s, "pi_ptheta-");
            REQUIRE(i >= 0);
            REQUIRE(j >= 0);
            const double me = std::abs(operator_in_eigenbasis(s, ChargeOperator::n_theta)(i, j));
            std::vector<AtLine> lines;
            for (double wc : linspace(4.97, 5.03, 13)) {
                const auto [ep, em] = autler_townes_dispersion(5.0, wc, 0.05 * me);
                lines.push_back({wc, ep});
                lines.push_back({wc, em});
            }
            omega.push_back(fit_autler_townes(lines).Omega_c);
        }
        CHECK(omega[0] / omega[1] == approx(1.0).epsilon(1e-4));
    }
}
