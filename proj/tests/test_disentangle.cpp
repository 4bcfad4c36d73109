#include "mfeit/disentangle.hpp"
#include "mfeit/barycentric.hpp"
#include "mfeit/errors.hpp"
#include "mfeit/reconstruct.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

using namespace mfeit;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

StarShape trefoil() { return StarShape((Eigen::VectorXd(4) << 0.5, 0.0, 0.0, 0.08).finished(), Eigen::VectorXd::Zero(3)); }

Eigen::VectorXd debye_omegas() {
    return Eigen::VectorXd::LinSpaced(40, -2.0, 2.0).unaryExpr([](double e) { return std::pow(10.0, e); });
}

struct Case {
    ForwardProblem problem;
    NeumannDatum f;
    CauchyData u0;
    MultiFreqData clean;
};

Case make_case(const StarShape& shape, const FrequencyProfile& profile = DebyeProfile{}) {
    ForwardProblem p(shape, DomainConfig{});
    NeumannDatum f = make_current(CurrentSpec{}, p.outer());
    CauchyData u0 = p.solve_u0(f);
    MultiFreqData clean = synthesize_clean(p, f, profile, debye_omegas());
    return {std::move(p), std::move(f), std::move(u0), std::move(clean)};
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

} // namespace

TEST_CASE("barycentric AAA reproduces a rational function", "[disentangle]") {
    const Eigen::VectorXcd z = Eigen::VectorXd::LinSpaced(30, 0.1, 3.0).cast<Complex>();
    Eigen::MatrixXcd f(2, z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        f(0, i) = 1.0 + 2.0 / (z[i] + 0.5);
        f(1, i) = -1.0 + 0.5 / (z[i] + 0.5);
    }
    const AaaResult r = aaa(z, f, 1e-13, 10);
    REQUIRE(r.converged);
    CHECK(r.rational.degree() == 1);
    const Eigen::VectorXcd p = r.rational.poles();
    REQUIRE(p.size() == 1);
    CHECK(std::abs(p[0] + 0.5) < 1e-12);
    CHECK(std::abs(r.rational.at_infinity()[0] - 1.0) < 1e-12);
    CHECK(std::abs(r.rational.at_infinity()[1] + 1.0) < 1e-12);
    CHECK(std::abs(r.rational(Complex(7.0, 1.0))[0] - (1.0 + 2.0 / Complex(7.5, 1.0))) < 1e-12);
}

TEST_CASE("exact rational data: poles and residues recovered", "[disentangle]") {
    const Eigen::Vector3cd poles(-0.3, -0.7, -2.5);
    const Eigen::Index npts = 16;
    // 2P + 2 = 8 samples on an arc in the right half plane
    const Eigen::Index nf = 8;
    MultiFreqData d;
    d.omega = Eigen::VectorXd::LinSpaced(nf, 0.0, 1.0);
    d.k.resize(nf);
    for (Eigen::Index j = 0; j < nf; ++j) d.k[j] = 2.0 + 1.5 * std::polar(1.0, -1.2 + 2.4 * j / double(nf - 1));
    Eigen::MatrixXcd res(npts, 3);
    Eigen::VectorXcd alpha(npts);
    for (Eigen::Index i = 0; i < npts; ++i) {
        const double t = two_pi * i / npts;
        alpha[i] = std::cos(t);
        res.row(i) << 0.5 * std::cos(t), 0.2 * std::sin(2 * t) + 0.3, -0.4 * std::cos(t);
    }
    d.voltages.resize(npts, nf);
    for (Eigen::Index j = 0; j < nf; ++j)
        for (Eigen::Index i = 0; i < npts; ++i) {
            Complex v = alpha[i];
            for (int n = 0; n < 3; ++n) v += res(i, n) / (d.k[j] - poles[n]);
            d.voltages(i, j) = v;
        }

    FitOptions o;
    o.max_poles = 3;
    o.reference_points = npts;
    const RationalModel m = fit_rational(d, DomainConfig{}, o);
    REQUIRE(m.n_poles() == 3);
    const Eigen::VectorXcd p = m.sorted_poles();
    for (int n = 0; n < 3; ++n) CHECK(std::abs(p[n] - poles[n]) < 1e-8);
    CHECK((m.alpha_inf - alpha).cwiseAbs().maxCoeff() < 1e-8);
    for (Eigen::Index n = 0; n < 3; ++n) {
        Eigen::Index which = 0;
        (m.poles.array() - poles[n]).abs().minCoeff(&which);
        CHECK((m.residues.col(which) - res.col(n)).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("pole-free data", "[disentangle]") {
    MultiFreqData d;
    d.omega = Eigen::VectorXd::LinSpaced(12, 0.1, 2.0);
    d.k = (d.omega.array() * Complex(0, 1) + 1.0).matrix();
    d.voltages = Eigen::MatrixXcd::Constant(8, 12, Complex(0.25, 0.0));
    for (Eigen::Index i = 0; i < 8; ++i) d.voltages.row(i).array() += double(i) - 3.5;
    FitOptions o;
    o.max_poles = 4;
    const RationalModel m = fit_rational(d, DomainConfig{}, o);
    CHECK(m.n_poles() == 0);
    CHECK((m.alpha_inf - d.voltages.col(0)).cwiseAbs().maxCoeff() < 1e-14);

    // u0 = k0 * u, recentred
    const CauchyData c = extract_u0(m, 2.0);
    Eigen::VectorXd expected = 2.0 * d.voltages.col(0).real();
    expected.array() -= expected.mean();
    CHECK((c.u0 - expected).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("too few frequencies", "[disentangle]") {
    const Case c = make_case(StarShape::circle(0.5));
    MultiFreqData d = c.clean;
    d.omega = d.omega.head(25).eval();
    d.k = d.k.head(25).eval();
    d.voltages = d.voltages.leftCols(25).eval();
    CHECK_THROWS_AS(fit_rational(d, DomainConfig{}), InsufficientFrequencies); // 12 poles need 26
    FitOptions o;
    o.max_poles = 11;
    CHECK_NOTHROW(fit_rational(d, DomainConfig{}, o));

    MultiFreqData dup = c.clean;
    dup.k.tail(20).setConstant(dup.k[0]);
    CHECK_THROWS_AS(fit_rational(dup, DomainConfig{}), InsufficientFrequencies);
}

TEST_CASE("noiseless concentric extraction", "[disentangle]") {
    const Case c = make_case(StarShape::circle(0.5));
    const RationalModel m = fit_rational(c.clean, DomainConfig{});
    REQUIRE(m.n_poles() >= 1);
    CHECK(std::abs(m.sorted_poles()[0] - Complex(-0.6, 0.0)) < 1e-6);
    const CauchyData u0 = extract_u0(m, 1.0);
    CHECK((u0.u0 - c.u0.u0).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(std::abs(u0.u0.mean()) < 1e-15);
    CHECK(std::isnan(u0.rho));
}

TEST_CASE("noiseless trefoil extraction", "[disentangle]") {
    const Case c = make_case(trefoil());
    const RationalModel m = fit_rational(c.clean, DomainConfig{});
    const NPSpectrum s = c.problem.spectrum();
    CHECK(std::abs(m.sorted_poles()[0] - Complex(s.resonances[0], 0.0)) < 1e-4);
    CHECK((extract_u0(m, 1.0).u0 - c.u0.u0).cwiseAbs().maxCoeff() < 1e-4);
    // every fitted pole sits in the admissible disk
    const double d = -class_resonance_bound(DomainConfig{});
    for (Eigen::Index n = 0; n < m.n_poles(); ++n) CHECK(std::abs(m.poles[n] + d / 2) <= 1.5 * d);
}

TEST_CASE("noisy extraction: leading pole to O(1e-2), tail pruned", "[disentangle]") {
    const Case c = make_case(StarShape::circle(0.5));
    std::vector<double> errs;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const RationalModel m = fit_rational(add_noise(c.clean, 1e-3, seed), DomainConfig{});
        REQUIRE(m.n_poles() >= 1);
        CHECK(m.n_poles() <= 3);
        CHECK(m.abs_tol >= 2e-3);
        errs.push_back(std::abs(m.sorted_poles()[0] - Complex(-0.6, 0.0)));
        CHECK(errs.back() < 3e-2);
    }
    CHECK(median(errs) < 1e-2);
}

TEST_CASE("extraction error grows with the noise", "[disentangle]") {
    const Case c = make_case(StarShape::circle(0.5));
    std::vector<double> lx, ly;
    double prev = 0.0;
    for (double eta : {1e-5, 1e-4, 1e-3, 1e-2}) {
        std::vector<double> errs;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const RationalModel m = fit_rational(add_noise(c.clean, eta, seed), DomainConfig{});
            errs.push_back((extract_u0(m, 1.0).u0 - c.u0.u0).cwiseAbs().maxCoeff());
        }
        const double med = median(errs);
        CHECK(med >= prev);
        prev = med;
        lx.push_back(std::log(eta));
        ly.push_back(std::log(med));
    }
    const RateFit fit = fit_line(lx, ly);
    CHECK(fit.exponent > 0.2);
    CHECK(fit.exponent <= 1.2);
}

TEST_CASE("arcs closer to the pole segment lose stability", "[disentangle]") {
    const auto slope_for = [](double scale) {
        const Case c = make_case(trefoil(), DebyeProfile{10.0 * scale, scale, 1.0});
        std::vector<double> lx, ly;
        for (double eta : {1e-6, 1e-5, 1e-4, 1e-3}) {
            std::vector<double> errs;
            for (std::uint64_t seed = 1; seed <= 5; ++seed) {
                try {
                    const RationalModel m = fit_rational(add_noise(c.clean, eta, seed), DomainConfig{});
                    errs.push_back((extract_u0(m, 1.0, 1.0).u0 - c.u0.u0).cwiseAbs().maxCoeff());
                } catch (const NumericError&) {
                    errs.push_back(1.0);
                }
            }
            lx.push_back(std::log(eta));
            ly.push_back(std::log(median(errs)));
        }
        return fit_line(lx, ly).exponent;
    };
    const double far = slope_for(1.0), near = slope_for(0.1);
    CHECK(near < far);
}

TEST_CASE("non-real limit is rejected", "[disentangle]") {
    RationalModel m;
    m.alpha_inf = Eigen::VectorXcd::Constant(4, Complex(0.1, 0.2));
    m.residues.resize(4, 0);
    m.scale = 1.0;
    CHECK_THROWS_AS(extract_u0(m, 1.0), NonRealLimit);
    CHECK_NOTHROW(extract_u0(m, 1.0, 0.5));
    CHECK_THROWS_AS(extract_u0(m, 0.0), ValidationError);
}

TEST_CASE("Cauchy integral over a circle", "[disentangle]") {
    RationalModel one;
    one.poles = Eigen::VectorXcd::Constant(1, Complex(-0.2, 0.0));
    one.alpha_inf = Eigen::VectorXcd::Zero(1);
    one.residues = Eigen::MatrixXcd::Ones(1, 1);
    const Complex v = cauchy_integral_check(one, 0, Complex(-0.5, 0.0), 1.0, Complex(2.0, 0.0));
    CHECK(std::abs(v - 1.0 / 2.2) < 1e-13);

    RationalModel none;
    none.alpha_inf = Eigen::VectorXcd::Constant(1, Complex(3.0, 0.0));
    none.residues.resize(1, 0);
    CHECK(std::abs(cauchy_integral_check(none, 0, Complex(0.0, 0.0), 1.0, Complex(2.0, 0.0))) == 0.0);

    CHECK_THROWS_AS(cauchy_integral_check(one, 0, Complex(0.0, 0.0), 0.2, Complex(2.0, 0.0)), ContourCrossesPole);
    CHECK_THROWS_AS(cauchy_integral_check(one, 0, Complex(0.0, 0.0), 3.0, Complex(2.0, 0.0)), ValidationError);

    // fitted concentric model: frequency-dependent part against the direct solver
    const Case c = make_case(StarShape::circle(0.5));
    const RationalModel m = fit_rational(c.clean, DomainConfig{});
    for (Eigen::Index j : {5, 20, 35}) {
        const Complex k = c.clean.k[j];
        for (Eigen::Index i : {0, 17, 64}) {
            const Complex g = cauchy_integral_check(m, i, Complex(-0.5, 0.0), 0.9, k, 1024);
            CHECK(std::abs(g - (c.clean.voltages(i, j) - c.u0.u0[i])) < 1e-8);
        }
    }
}
