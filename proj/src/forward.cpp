#include "mfeit/forward.hpp"

#include "mfeit/errors.hpp"
#include "mfeit/parallel.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>

namespace mfeit {

NeumannDatum make_current(const CurrentSpec& spec, const BoundaryGrid& outer) {
    if (spec.cos.size() > 0 && spec.cos[0] != 0.0)
        throw ValidationError("current must have zero mean: constant Fourier term must vanish");
    NeumannDatum f;
    f.values = Eigen::VectorXd::Zero(outer.size());
    for (Eigen::Index i = 0; i < outer.size(); ++i) {
        const double t = outer.params[i];
        for (Eigen::Index m = 1; m < spec.cos.size(); ++m) f.values[i] += spec.cos[m] * std::cos(double(m) * t);
        for (Eigen::Index m = 1; m <= spec.sin.size(); ++m) f.values[i] += spec.sin[m - 1] * std::sin(double(m) * t);
    }
    if (std::abs(f.values.dot(outer.ds())) > 1e-12 * std::max(1.0, f.values.cwiseAbs().maxCoeff()))
        throw ValidationError("current is not resolved on the outer grid (nonzero discrete mean)");
    return f;
}

Complex FrequencyProfile::operator()(double omega) const {
    return std::visit(
        [omega](const auto& p) -> Complex {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, AffineProfile>) {
                return {p.k_r, p.c * omega};
            } else {
                return p.k_inf + (p.k_s - p.k_inf) / Complex(1.0, omega * p.tau);
            }
        },
        model_);
}

Eigen::VectorXcd FrequencyProfile::sample(const Eigen::VectorXd& omegas) const {
    Eigen::VectorXcd k(omegas.size());
    for (Eigen::Index j = 0; j < omegas.size(); ++j) k[j] = (*this)(omegas[j]);
    return k;
}

void FrequencyProfile::validate(const Eigen::VectorXd& omegas) const {
    for (Eigen::Index j = 0; j < omegas.size(); ++j) {
        if (!(omegas[j] >= 0.0) || !std::isfinite(omegas[j])) throw ValidationError("frequencies must be finite and >= 0");
        const Complex k = (*this)(omegas[j]);
        if (!std::isfinite(k.real()) || !std::isfinite(k.imag())) throw ValidationError("k(omega) not finite");
        const bool on_axis = std::abs(k.imag()) <= 1e-12 * std::max(1.0, std::abs(k));
        if (on_axis && k.real() <= 0.0) {
            std::ostringstream os;
            os << "k(omega) = " << k << " at omega = " << omegas[j] << " touches the closed negative real axis";
            throw ValidationError(os.str());
        }
    }
}

Eigen::VectorXd harmonic_lift_trace(const BoundaryGrid& outer, const NeumannDatum& f) {
    // on |x| = |z| = 1 the Neumann function reduces to (1/2pi) ln(4 sin^2((t - tau)/2))
    const Eigen::Index n = outer.size();
    const Eigen::VectorXd R = log_quadrature_weights(static_cast<int>(n));
    Eigen::VectorXd trace(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) s += R[std::abs(i - j)] * f.values[j];
        trace[i] = -s / two_pi;
    }
    return trace;
}

Eigen::VectorXd harmonic_lift(const BoundaryGrid& outer, const NeumannDatum& f, const Eigen::Matrix2Xd& targets) {
    Eigen::VectorXd v(targets.cols());
    const Eigen::VectorXd w = outer.ds().cwiseProduct(f.values);
    for (Eigen::Index i = 0; i < targets.cols(); ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < outer.size(); ++j)
            s += w[j] * std::log((targets.col(i) - outer.points.col(j)).norm());
        v[i] = -s / std::numbers::pi;
    }
    return v;
}

Eigen::Matrix2Xd harmonic_lift_gradient(const BoundaryGrid& outer, const NeumannDatum& f,
                                        const Eigen::Matrix2Xd& targets) {
    Eigen::Matrix2Xd g = Eigen::Matrix2Xd::Zero(2, targets.cols());
    const Eigen::VectorXd w = outer.ds().cwiseProduct(f.values);
    for (Eigen::Index i = 0; i < targets.cols(); ++i) {
        for (Eigen::Index j = 0; j < outer.size(); ++j) {
            const Point d = targets.col(i) - outer.points.col(j);
            g.col(i) -= w[j] * d / (std::numbers::pi * d.squaredNorm());
        }
    }
    return g;
}

struct ForwardProblem::Lazy {
    std::once_flag once;
    Eigen::VectorXd kstar_eigs;
};

ForwardProblem::ForwardProblem(StarShape shape, DomainConfig config, Resolution resolution, ForwardOptions options)
    : shape_(std::move(shape)), config_(config), options_(options), lazy_(std::make_shared<Lazy>()) {
    config_.validate();
    validate_shape(shape_, config_);
    outer_ = unit_circle_grid(resolution.outer);
    kernels_ = assemble(discretize(shape_, resolution.inner));
    to_outer_ = single_layer_evaluator(kernels_.grid, outer_.points);
}

const Eigen::VectorXd& ForwardProblem::kstar_spectrum() const {
    std::call_once(lazy_->once, [this] { lazy_->kstar_eigs = kstar_eigenvalues(kernels_); });
    return lazy_->kstar_eigs;
}

NPSpectrum ForwardProblem::spectrum(const SpectrumOptions& options) const {
    return compute_spectrum(kernels_, outer_, config_.k0, options);
}

CauchyData ForwardProblem::solve_u0(const NeumannDatum& f) const {
    const Eigen::Index n = kernels_.size();
    const Eigen::VectorXd lift_inner = harmonic_lift(outer_, f, kernels_.grid.points);

    // [S  -1] [psi]   [-f_lift|dD]
    // [ds^T 0] [rho] = [    0     ]
    Eigen::MatrixXd system(n + 1, n + 1);
    system.topLeftCorner(n, n) = kernels_.single_layer;
    system.topRightCorner(n, 1).setConstant(-1.0);
    system.bottomLeftCorner(1, n) = kernels_.grid.ds().transpose();
    system(n, n) = 0.0;
    Eigen::VectorXd rhs(n + 1);
    rhs << -lift_inner, 0.0;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    if (!(lu.rcond() > 1e3 * std::numeric_limits<double>::epsilon()))
        throw SingularSystem("perfect-conductor system is numerically singular");
    const Eigen::VectorXd sol = lu.solve(rhs);

    CauchyData out;
    out.theta = outer_.params;
    out.f = f.values;
    out.u0 = harmonic_lift_trace(outer_, f) + to_outer_ * sol.head(n);
    recenter(out.u0);
    out.rho = sol[n];
    return out;
}

Eigen::VectorXcd ForwardProblem::solve_direct(const NeumannDatum& f, Complex k) const {
    const double k0 = config_.k0;
    const Eigen::VectorXd lift = harmonic_lift_trace(outer_, f);
    if (k == Complex(k0, 0.0)) return lift.cast<Complex>() / k0;

    const Complex c = (k0 + k) / (2.0 * (k0 - k));
    const Eigen::VectorXd& mu = kstar_spectrum();
    const double gap = (mu.cast<Complex>().array() + c).abs().minCoeff();
    if (gap < options_.resonance_tol) {
        std::ostringstream os;
        os << "contrast k = " << k << " is within " << gap << " of a resonance";
        throw NearResonance(os.str());
    }

    const Eigen::Matrix2Xd grad = harmonic_lift_gradient(outer_, f, kernels_.grid.points);
    const Eigen::VectorXd dnu = (grad.cwiseProduct(kernels_.grid.normals)).colwise().sum().transpose();

    Eigen::MatrixXcd a = kernels_.kstar.cast<Complex>();
    a.diagonal().array() += c;
    const Eigen::VectorXcd phi = a.partialPivLu().solve((-dnu / k0).cast<Complex>());

    Eigen::VectorXcd u = lift.cast<Complex>() / k0 + to_outer_.cast<Complex>() * phi;
    recenter(u);
    return u;
}

Eigen::VectorXcd ForwardProblem::solve_spectral(const NeumannDatum& f, Complex k, const NPSpectrum& spectrum,
                                                Eigen::Index n_modes) const {
    // modes beyond the tail threshold were dropped as unresolved; their weight is
    // below the tail and the series simply stops there
    if (n_modes < 0) throw ValidationError("n_modes must be nonnegative");
    n_modes = std::min(n_modes, spectrum.size());
    if (spectrum.outer.size() != outer_.size()) throw ValidationError("spectrum computed on a different outer grid");
    const double k0 = config_.k0;
    const CauchyData u0 = solve_u0(f);
    Eigen::VectorXcd u = u0.u0.cast<Complex>() / k0;
    const Eigen::VectorXd weighted = outer_.ds().cwiseProduct(f.values);
    for (Eigen::Index n = 0; n < n_modes; ++n) {
        const Complex denom = k0 + spectrum.lambda[n] * (k - k0);
        if (std::abs(denom) < options_.resonance_tol) throw NearResonance("contrast sits on a spectral pole");
        const double coupling = weighted.dot(spectrum.traces_dOmega.col(n));
        u += (coupling / denom) * spectrum.traces_dOmega.col(n).cast<Complex>();
    }
    return u;
}

CauchyData solve_u0(const StarShape& shape, const NeumannDatum& f, const DomainConfig& config,
                    const Resolution& resolution) {
    return ForwardProblem(shape, config, resolution).solve_u0(f);
}

Eigen::VectorXcd solve_forward_direct(const StarShape& shape, const NeumannDatum& f, Complex k,
                                      const DomainConfig& config, const Resolution& resolution) {
    return ForwardProblem(shape, config, resolution).solve_direct(f, k);
}

Eigen::VectorXcd solve_forward_spectral(const StarShape& shape, const NeumannDatum& f, Complex k,
                                        const DomainConfig& config, const NPSpectrum& spectrum,
                                        Eigen::Index n_modes, const Resolution& resolution) {
    return ForwardProblem(shape, config, resolution).solve_spectral(f, k, spectrum, n_modes);
}

MultiFreqData synthesize_clean(const ForwardProblem& problem, const NeumannDatum& f,
                               const FrequencyProfile& profile, const Eigen::VectorXd& omegas) {
    profile.validate(omegas);
    MultiFreqData data;
    data.omega = omegas;
    data.k = profile.sample(omegas);
    data.voltages.resize(problem.outer().size(), omegas.size());
    problem.kstar_spectrum(); // compute once before fanning out
    parallel_for(static_cast<std::size_t>(omegas.size()), [&](std::size_t j) {
        const auto col = static_cast<Eigen::Index>(j);
        try {
            data.voltages.col(col) = problem.solve_direct(f, data.k[col]);
        } catch (const NearResonance& e) {
            std::ostringstream os;
            os << e.what() << " (omega = " << omegas[col] << ")";
            throw NearResonance(os.str(), static_cast<int>(j));
        }
    });
    return data;
}

MultiFreqData add_noise(MultiFreqData data, double eta, std::uint64_t seed) {
    if (!(eta >= 0.0)) throw ValidationError("noise level must be >= 0");
    data.eta = eta;
    data.seed = seed;
    if (eta == 0.0 || data.voltages.size() == 0) return data;
    Eigen::MatrixXcd noise(data.voltages.rows(), data.voltages.cols());
    for (Eigen::Index j = 0; j < noise.cols(); ++j) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(j)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> gauss;
        for (Eigen::Index i = 0; i < noise.rows(); ++i) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            noise(i, j) = Complex(re, im);
        }
    }
    data.voltages += (eta / noise.cwiseAbs().maxCoeff()) * noise;
    return data;
}

MultiFreqData synthesize(const ForwardProblem& problem, const NeumannDatum& f, const FrequencyProfile& profile,
                         const Eigen::VectorXd& omegas, double eta, std::uint64_t seed) {
    return add_noise(synthesize_clean(problem, f, profile, omegas), eta, seed);
}

} // namespace mfeit
