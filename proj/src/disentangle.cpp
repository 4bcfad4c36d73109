#include "mfeit/disentangle.hpp"

#include "mfeit/barycentric.hpp"
#include "mfeit/errors.hpp"
#include "mfeit/spectrum.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace mfeit {

Eigen::VectorXcd RationalModel::operator()(Complex k) const {
    Eigen::VectorXcd out = alpha_inf;
    for (Eigen::Index n = 0; n < poles.size(); ++n) out += residues.col(n) / (k - poles[n]);
    return out;
}

Eigen::VectorXcd RationalModel::sorted_poles() const {
    std::vector<Complex> p(poles.data(), poles.data() + poles.size());
    std::stable_sort(p.begin(), p.end(), [](Complex a, Complex b) { return std::abs(a) < std::abs(b); });
    return Eigen::Map<Eigen::VectorXcd>(p.data(), static_cast<Eigen::Index>(p.size()));
}

namespace {

struct LsqFit {
    Eigen::VectorXcd alpha_inf;
    Eigen::MatrixXcd residues;
    double residual = 0.0;
};

LsqFit fixed_pole_fit(const Eigen::VectorXcd& k, const Eigen::MatrixXcd& u, const Eigen::VectorXcd& poles) {
    const Eigen::Index nf = k.size(), np = poles.size();
    Eigen::MatrixXcd basis(nf, np + 1);
    basis.col(0).setOnes();
    for (Eigen::Index n = 0; n < np; ++n) basis.col(n + 1) = (k.array() - poles[n]).inverse();
    // column scaling keeps the QR honest when poles sit at very different distances
    const Eigen::VectorXd norms = basis.colwise().norm().transpose();
    Eigen::MatrixXcd scaled = basis * norms.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(scaled);
    Eigen::MatrixXcd coef = qr.solve(u.transpose());
    coef = norms.cwiseInverse().asDiagonal() * coef;

    LsqFit fit;
    fit.alpha_inf = coef.row(0).transpose();
    fit.residues = coef.bottomRows(np).transpose();
    fit.residual = (basis * coef - u.transpose()).cwiseAbs().maxCoeff();
    return fit;
}

} // namespace

RationalModel fit_rational(const MultiFreqData& data, const DomainConfig& config, const FitOptions& options) {
    config.validate();
    const Eigen::Index nf = data.n_frequencies(), npts = data.n_points();
    if (options.max_poles < 0 || options.reference_points < 1) throw ValidationError("invalid fit options");
    {
        std::vector<Complex> ks(data.k.data(), data.k.data() + data.k.size());
        std::sort(ks.begin(), ks.end(), [](Complex a, Complex b) {
            return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
        });
        const auto distinct = std::unique(ks.begin(), ks.end()) - ks.begin();
        if (distinct < 2 * options.max_poles + 2 || nf != static_cast<Eigen::Index>(ks.size()))
            throw InsufficientFrequencies("need " + std::to_string(2 * options.max_poles + 2) +
                                          " distinct frequencies, have " + std::to_string(distinct));
    }
    if (npts == 0) throw ValidationError("empty dataset");

    const double d = -class_resonance_bound(config);
    const Complex mid(-d / 2.0, 0.0);
    for (Eigen::Index j = 0; j < nf; ++j)
        if (data.k[j].imag() == 0.0 && data.k[j].real() <= 0.0 && data.k[j].real() >= -d)
            throw ValidationError("frequency sweep touches the pole segment");

    RationalModel model;
    model.scale = data.voltages.cwiseAbs().maxCoeff();
    model.abs_tol = std::max(options.tol * model.scale, options.noise_factor * data.eta);

    const Eigen::Index nref = std::min(options.reference_points, npts);
    Eigen::MatrixXcd ref(nref, nf);
    for (Eigen::Index r = 0; r < nref; ++r) ref.row(r) = data.voltages.row(r * npts / nref);

    const auto admissible = [&](const BarycentricRational& r) {
        std::vector<Complex> kept;
        const Eigen::VectorXcd raw = r.poles();
        for (Eigen::Index n = 0; n < raw.size(); ++n)
            if (std::isfinite(raw[n].real()) && std::abs(raw[n] - mid) <= 1.5 * d) kept.push_back(raw[n]);
        return kept;
    };
    const auto as_vector = [](std::vector<Complex>& v) {
        return Eigen::VectorXcd(Eigen::Map<Eigen::VectorXcd>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    // Interpolation error alone overfits noise; accept an iterate as soon as its
    // admissible poles explain the reference data in the least-squares sense.
    const auto accept = [&](const BarycentricRational& r) {
        auto kept = admissible(r);
        return fixed_pole_fit(data.k, ref, as_vector(kept)).residual <= model.abs_tol;
    };
    const AaaResult stage1 = aaa(data.k, ref, model.abs_tol, options.max_poles, accept);
    if (!stage1.converged)
        throw FitDiverged("rational fit residual " + std::to_string(stage1.error_history.back()) +
                          " above tolerance " + std::to_string(model.abs_tol) + " with " +
                          std::to_string(options.max_poles) + " poles");

    std::vector<Complex> kept = admissible(stage1.rational);
    LsqFit fit;
    while (true) {
        fit = fixed_pole_fit(data.k, data.voltages, as_vector(kept));
        if (kept.empty()) break;
        Eigen::Index weakest = 0;
        const double rmin = fit.residues.cwiseAbs().colwise().maxCoeff().minCoeff(&weakest);
        if (rmin >= model.abs_tol) break;
        kept.erase(kept.begin() + weakest);
    }
    model.poles = as_vector(kept);
    model.alpha_inf = fit.alpha_inf;
    model.residues = fit.residues;
    model.residual = fit.residual;
    return model;
}

CauchyData extract_u0(const RationalModel& model, double k0, double imag_tol) {
    if (!(k0 > 0.0)) throw ValidationError("k0 must be positive");
    if (imag_tol < 0.0) imag_tol = std::max(1e-6 * model.scale, 100.0 * model.abs_tol);
    const double worst = model.alpha_inf.imag().cwiseAbs().maxCoeff();
    if (worst > imag_tol)
        throw NonRealLimit("|Im alpha_inf| = " + std::to_string(worst) + " exceeds " + std::to_string(imag_tol));
    const Eigen::Index n = model.n_points();
    CauchyData out;
    out.theta = Eigen::VectorXd::LinSpaced(n, 0.0, two_pi * static_cast<double>(n - 1) / static_cast<double>(n));
    out.u0 = k0 * model.alpha_inf.real();
    recenter(out.u0);
    return out;
}

Complex cauchy_integral_check(const RationalModel& model, Eigen::Index point, Complex center, double radius,
                              Complex k_eval, int n_quad) {
    if (point < 0 || point >= model.n_points()) throw ValidationError("point index out of range");
    if (!(radius > 0.0) || n_quad < 8) throw ValidationError("invalid contour");
    if (std::abs(k_eval - center) <= radius) throw ValidationError("k_eval must lie outside the contour");
    const double h = two_pi / n_quad;
    for (Eigen::Index n = 0; n < model.n_poles(); ++n) {
        const double gap = std::abs(std::abs(model.poles[n] - center) - radius);
        if (gap < 4.0 * h * radius) throw ContourCrossesPole("contour passes within " + std::to_string(gap) + " of a pole");
    }
    // trapezoid on the circle k = c + r e^{it}, dk = i r e^{it} dt: spectrally accurate
    Complex sum = 0.0;
    for (int q = 0; q < n_quad; ++q) {
        const Complex e = std::polar(1.0, q * h);
        const Complex k = center + radius * e;
        Complex g = 0.0;
        for (Eigen::Index n = 0; n < model.n_poles(); ++n) g += model.residues(point, n) / (k - model.poles[n]);
        sum += g / (k_eval - k) * (radius * e);
    }
    // (1/2 pi i) * i * h * sum
    return sum * h / two_pi;
}

} // namespace mfeit
