#include "mfeit/forward.hpp"
#include "mfeit/errors.hpp"
#include "mfeit/parallel.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace mfeit;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

StarShape trefoil() { return StarShape((Eigen::VectorXd(4) << 0.5, 0.0, 0.0, 0.08).finished(), Eigen::VectorXd::Zero(3)); }
StarShape limacon() { return StarShape((Eigen::VectorXd(2) << 0.4, 0.1).finished(), Eigen::VectorXd::Zero(1)); }

double sup(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }
double sup(const Eigen::VectorXcd& v) { return v.cwiseAbs().maxCoeff(); }

// u(1, theta) / cos(theta) for concentric disks, f = cos(theta)
Complex concentric_gain(double r0, Complex k, double k0 = 1.0) {
    const Complex mu = (k0 - k) / (k0 + k);
    return (1.0 + mu * r0 * r0) / (1.0 - mu * r0 * r0) / k0;
}

} // namespace

TEST_CASE("harmonic lift uses the disk Neumann-to-Dirichlet multipliers", "[forward]") {
    const BoundaryGrid outer = unit_circle_grid(256);
    const Eigen::ArrayXd t = outer.params.array();
    CurrentSpec c1;
    CHECK(sup(Eigen::VectorXd(harmonic_lift_trace(outer, make_current(c1, outer)) - t.cos().matrix())) < 1e-13);

    CurrentSpec c2;
    c2.cos = (Eigen::VectorXd(3) << 0, 0, 1).finished();
    CHECK(sup(Eigen::VectorXd(harmonic_lift_trace(outer, make_current(c2, outer)) - (0.5 * (2 * t).cos()).matrix())) < 1e-13);

    CurrentSpec c3;
    c3.cos = Eigen::VectorXd::Zero(1);
    c3.sin = (Eigen::VectorXd(3) << 0, 0, 1).finished();
    CHECK(sup(Eigen::VectorXd(harmonic_lift_trace(outer, make_current(c3, outer)) - ((3 * t).sin() / 3).matrix())) < 1e-13);

    CurrentSpec zero;
    zero.cos = Eigen::VectorXd::Zero(1);
    CHECK(sup(harmonic_lift_trace(outer, make_current(zero, outer))) == 0.0);

    // interior: r cos(theta), gradient (1, 0)
    Eigen::Matrix2Xd pts(2, 3);
    pts << 0.3, -0.5, 0.1, 0.2, 0.4, -0.7;
    const NeumannDatum f = make_current(c1, outer);
    CHECK(sup(Eigen::VectorXd(harmonic_lift(outer, f, pts) - pts.row(0).transpose())) < 1e-12);
    const Eigen::Matrix2Xd g = harmonic_lift_gradient(outer, f, pts);
    CHECK((g.row(0).array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(g.row(1).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("currents must have zero mean", "[forward]") {
    const BoundaryGrid outer = unit_circle_grid(64);
    CurrentSpec bad;
    bad.cos = (Eigen::VectorXd(2) << 0.1, 1.0).finished();
    CHECK_THROWS_AS(make_current(bad, outer), ValidationError);
    CurrentSpec aliased;
    aliased.cos = Eigen::VectorXd::Unit(65, 64); // cos(64 t) is 1 on 64 nodes
    CHECK_THROWS_AS(make_current(aliased, outer), ValidationError);
    CHECK(std::abs(make_current(CurrentSpec{}, outer).values.dot(outer.ds())) < 1e-14);
}

TEST_CASE("perfect-conductor solution on concentric disks", "[forward]") {
    const double r0 = 0.5;
    const ForwardProblem p(StarShape::circle(r0), DomainConfig{});
    const NeumannDatum f = make_current(CurrentSpec{}, p.outer());
    const CauchyData u0 = p.solve_u0(f);
    const Eigen::VectorXd expected = (1 - r0 * r0) / (1 + r0 * r0) * p.outer().params.array().cos().matrix();
    CHECK(sup(Eigen::VectorXd(u0.u0 - expected)) < 1e-13);
    CHECK(std::abs(u0.rho) < 1e-14);
    CHECK(std::abs(u0.u0.mean()) < 1e-15);
    CHECK(u0.f == f.values);

    const CauchyData none = p.solve_u0(NeumannDatum{Eigen::VectorXd::Zero(p.outer().size())});
    CHECK(sup(none.u0) == 0.0);
    CHECK(none.rho == 0.0);
}

TEST_CASE("perfect-conductor solution off centre", "[forward]") {
    const DomainConfig cfg;
    const ForwardProblem coarse(limacon(), cfg, {128, 256});
    const ForwardProblem fine(limacon(), cfg, {256, 256});
    const NeumannDatum f = make_current(CurrentSpec{}, coarse.outer());
    const CauchyData a = coarse.solve_u0(f), b = fine.solve_u0(f);
    CHECK(std::abs(b.rho) > 1e-3);
    CHECK_THAT(a.rho, WithinAbs(b.rho, 1e-10));
    CHECK(sup(Eigen::VectorXd(a.u0 - b.u0)) < 1e-10);
}

TEST_CASE("direct solver: closed form and special cases", "[forward]") {
    const double r0 = 0.5;
    for (double k0 : {1.0, 2.5}) {
        DomainConfig cfg;
        cfg.k0 = k0;
        const ForwardProblem p(StarShape::circle(r0), cfg);
        const NeumannDatum f = make_current(CurrentSpec{}, p.outer());
        const Eigen::VectorXd cos_t = p.outer().params.array().cos().matrix();
        for (Complex k : {Complex(2.0, 1.0), Complex(0.3, -0.7), Complex(10.0, 0.0), Complex(-0.2, 0.5), Complex(0.01, 0.0)}) {
            const Eigen::VectorXcd u = p.solve_direct(f, k);
            CHECK(sup(Eigen::VectorXcd(u - concentric_gain(r0, k, k0) * cos_t.cast<Complex>())) < 1e-8);
            CHECK(std::abs(u.mean()) < 1e-10);
        }
        // no contrast: k0^{-1} times the lift
        const Eigen::VectorXcd same = p.solve_direct(f, Complex(k0, 0.0));
        CHECK(sup(Eigen::VectorXcd(same - (harmonic_lift_trace(p.outer(), f) / k0).cast<Complex>())) == 0.0);
    }
}

TEST_CASE("direct solver approaches k0^{-1} u0 for large |k|", "[forward]") {
    const ForwardProblem p(trefoil(), DomainConfig{});
    const NeumannDatum f = make_current(CurrentSpec{}, p.outer());
    const Eigen::VectorXd u0 = p.solve_u0(f).u0;
    double prev = 1e9;
    for (double mag : {1e2, 1e4, 1e6}) {
        const Eigen::VectorXcd u = p.solve_direct(f, Complex(mag, 0.0));
        const double err = sup(Eigen::VectorXcd(u - u0.cast<Complex>())) / sup(u0);
        CHECK(err * mag < 10.0);
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("direct solver refuses to sit on a resonance", "[forward]") {
    const ForwardProblem p(StarShape::circle(0.5), DomainConfig{});
    const NeumannDatum f = make_current(CurrentSpec{}, p.outer());
    CHECK_THROWS_AS(p.solve_direct(f, Complex(-0.6, 0.0)), NearResonance);
    CHECK_NOTHROW(p.solve_direct(f, Complex(-0.6, 1e-3)));
}

TEST_CASE("spectral series against the direct solver", "[forward]") {
    const ForwardProblem c(StarShape::circle(0.5), DomainConfig{});
    const NeumannDatum f = make_current(CurrentSpec{}, c.outer());
    const NPSpectrum sc = c.spectrum();
    for (Complex k : {Complex(2.0, 1.0), Complex(0.5, -0.5), Complex(-0.3, 0.4)}) {
        const Eigen::VectorXcd d = c.solve_direct(f, k);
        CHECK(sup(Eigen::VectorXcd(c.solve_spectral(f, k, sc, 40) - d)) / sup(d) < 1e-8);
    }

    const ForwardProblem t(trefoil(), DomainConfig{});
    const NPSpectrum st = t.spectrum();
    for (Complex k : {Complex(2.0, 1.0), Complex(0.5, -0.5), Complex(-0.5, 0.5)}) {
        const Eigen::VectorXcd d = t.solve_direct(f, k);
        CHECK(sup(Eigen::VectorXcd(t.solve_spectral(f, k, st, 60) - d)) / sup(d) < 1e-4);
    }

    // at k = k0 every denominator is k0 and the series rebuilds the lift
    const Eigen::VectorXd lift = harmonic_lift_trace(t.outer(), f);
    CHECK(sup(Eigen::VectorXcd(t.solve_spectral(f, Complex(1.0, 0.0), st, 60) - lift.cast<Complex>())) < 1e-6);

    const NeumannDatum zero{Eigen::VectorXd::Zero(t.outer().size())};
    CHECK(sup(t.solve_spectral(zero, Complex(2.0, 1.0), st, 60)) == 0.0);
}

TEST_CASE("frequency profiles", "[forward]") {
    const FrequencyProfile debye = DebyeProfile{10.0, 1.0, 1.0};
    CHECK_THAT(std::abs(debye(0.0) - Complex(1.0, 0.0)), WithinAbs(0.0, 1e-15));
    CHECK_THAT(std::abs(debye(1.0) - Complex(5.5, 4.5)), WithinAbs(0.0, 1e-14));
    const FrequencyProfile affine = AffineProfile{1.0, 2.0};
    CHECK(affine(3.0) == Complex(1.0, 6.0));

    const Eigen::VectorXd omegas = Eigen::VectorXd::LinSpaced(5, 0.0, 2.0);
    CHECK_NOTHROW(debye.validate(omegas));
    CHECK_THROWS_AS(FrequencyProfile(AffineProfile{-0.5, 1.0}).validate(omegas), ValidationError); // k(0) = -0.5
    CHECK_THROWS_AS(FrequencyProfile(AffineProfile{0.0, 1.0}).validate(omegas), ValidationError);  // k(0) = 0
    CHECK_NOTHROW(FrequencyProfile(AffineProfile{-0.5, 1.0}).validate(Eigen::VectorXd::LinSpaced(3, 0.5, 1.0)));
}

TEST_CASE("synthesized data: closed form, calibration, determinism", "[forward]") {
    const double r0 = 0.5;
    const ForwardProblem p(StarShape::circle(r0), DomainConfig{});
    const NeumannDatum f = make_current(CurrentSpec{}, p.outer());
    const FrequencyProfile profile = AffineProfile{1.0, 1.0};
    const Eigen::VectorXd omegas = Eigen::VectorXd::LinSpaced(8, 0.0, 3.5);
    const Eigen::VectorXd cos_t = p.outer().params.array().cos().matrix();

    const MultiFreqData clean = synthesize(p, f, profile, omegas, 0.0, 1);
    for (Eigen::Index j = 0; j < omegas.size(); ++j) {
        const Complex k(1.0, omegas[j]);
        CHECK(clean.k[j] == k);
        CHECK(sup(Eigen::VectorXcd(clean.voltages.col(j) - concentric_gain(r0, k) * cos_t.cast<Complex>())) < 1e-8);
        CHECK(std::abs(clean.voltages.col(j).mean()) < 1e-10);
    }

    const MultiFreqData noisy = synthesize(p, f, profile, omegas, 0.01, 42);
    CHECK_THAT((noisy.voltages - clean.voltages).cwiseAbs().maxCoeff(), WithinRel(0.01, 1e-14));
    CHECK(noisy.eta == 0.01);
    CHECK(noisy.seed == 42);

    const MultiFreqData again = synthesize(p, f, profile, omegas, 0.01, 42);
    CHECK(again.voltages == noisy.voltages);
    const MultiFreqData other = synthesize(p, f, profile, omegas, 0.01, 43);
    CHECK(other.voltages != noisy.voltages);

    // the schedule does not leak into the numbers
    set_thread_count(3);
    const MultiFreqData threaded = synthesize(p, f, profile, omegas, 0.01, 42);
    set_thread_count(1);
    CHECK(threaded.voltages == noisy.voltages);
}
