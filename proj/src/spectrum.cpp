#include "mfeit/spectrum.hpp"

#include "mfeit/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace mfeit {

namespace {

struct Weighted {
    Eigen::MatrixXd operator_form; ///< -S K*, symmetrized
    Eigen::MatrixXd weight;        ///< -S
};

Weighted weighted_problem(const KernelMatrices& kernels) {
    Weighted p;
    p.weight = -kernels.gram;
    const Eigen::MatrixXd a = p.weight * kernels.kstar;
    p.operator_form = 0.5 * (a + a.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(p.weight);
    if (llt.info() != Eigen::Success) throw NumericError("-S is not positive definite on this grid");
    return p;
}

} // namespace

Eigen::VectorXd NPSpectrum::upper_branch() const {
    std::vector<double> v;
    for (double l : lambda) if (l > 0.5) v.push_back(l);
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::VectorXd NPSpectrum::lower_branch() const {
    std::vector<double> v;
    for (double l : lambda) if (l < 0.5) v.push_back(l);
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::VectorXd kstar_eigenvalues(const KernelMatrices& kernels) {
    const Weighted p = weighted_problem(kernels);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(p.operator_form, p.weight,
                                                                     Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    if (solver.info() != Eigen::Success) throw NotConverged("generalized eigen-solve failed");
    return solver.eigenvalues();
}

NPSpectrum compute_spectrum(const KernelMatrices& kernels, const BoundaryGrid& outer, double k0,
                            const SpectrumOptions& options) {
    const Eigen::Index n = kernels.size();
    if (options.n_modes > n / 4)
        throw NotConverged("requested " + std::to_string(options.n_modes) + " modes but only n/4 = " +
                           std::to_string(n / 4) + " are resolvable");
    if (!(k0 > 0.0)) throw ValidationError("k0 must be positive");

    const Weighted p = weighted_problem(kernels);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(p.operator_form, p.weight,
                                                                     Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (solver.info() != Eigen::Success) throw NotConverged("generalized eigen-solve failed");
    const Eigen::VectorXd& mu = solver.eigenvalues();

    // the constant-density mode (mu = 1/2) is not a single layer with zero flux
    Eigen::Index constant_mode = 0;
    (mu.array() - 0.5).abs().minCoeff(&constant_mode);

    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i)
        if (i != constant_mode && std::abs(mu[i]) > options.tail) keep.push_back(i);
    std::stable_sort(keep.begin(), keep.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return std::abs(mu[a]) > std::abs(mu[b]); });

    NPSpectrum s;
    s.k0 = k0;
    s.outer = outer;
    s.inner = kernels.grid;
    const auto taken = std::min<Eigen::Index>(options.n_modes, static_cast<Eigen::Index>(keep.size()));
    s.discarded = (n - 1) - taken;
    s.lambda.resize(taken);
    s.densities.resize(n, taken);
    for (Eigen::Index k = 0; k < taken; ++k) {
        s.lambda[k] = 0.5 - mu[keep[k]];
        s.densities.col(k) = solver.eigenvectors().col(keep[k]);
        if (!(s.lambda[k] > 0.0 && s.lambda[k] < 1.0))
            throw NotConverged("discrete eigenvalue " + std::to_string(s.lambda[k]) + " outside (0, 1)");
    }
    s.resonances = k0 * (1.0 - s.lambda.array().inverse());
    s.traces_dD = kernels.single_layer * s.densities;
    s.traces_dOmega = single_layer_evaluator(kernels.grid, outer.points) * s.densities;
    return s;
}

double resonance_bound(const StarShape& shape, double k0) {
    const double r = r_inf(shape);
    const double q = (r + 2.0) / r;
    return k0 * (-1.0 - q * q);
}

double class_resonance_bound(const DomainConfig& config) {
    const double q = (config.b0 + 2.0) / config.b0;
    return config.k0 * (-1.0 - q * q);
}

namespace {

Eigen::VectorXd mode_values(const NPSpectrum& s, const Point& x, Eigen::Index terms) {
    Eigen::Matrix2Xd t(2, 1);
    t.col(0) = x;
    return (single_layer_evaluator(s.inner, t) * s.densities.leftCols(terms)).transpose();
}

} // namespace

double neumann_partial_sum(const NPSpectrum& spectrum, const Point& x, const Point& z, Eigen::Index terms) {
    terms = std::min(terms, spectrum.size());
    return -mode_values(spectrum, x, terms).dot(mode_values(spectrum, z, terms));
}

double neumann_series_check(const NPSpectrum& spectrum, const Point& x, const Point& z, Eigen::Index terms) {
    terms = std::min(terms, spectrum.size());
    const BoundaryGrid& g = spectrum.inner;
    Eigen::VectorXd kernel_row(g.size());
    for (Eigen::Index j = 0; j < g.size(); ++j)
        kernel_row[j] = neumann_kernel(g.points.col(j), z) * g.weight * g.jacobians[j];
    const Eigen::VectorXd coeffs = -(spectrum.densities.leftCols(terms).transpose() * kernel_row);
    return neumann_partial_sum(spectrum, x, z, terms) - coeffs.dot(mode_values(spectrum, x, terms));
}

} // namespace mfeit
