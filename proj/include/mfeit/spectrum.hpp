#pragma once

#include "mfeit/geometry.hpp"
#include "mfeit/potential.hpp"

#include <Eigen/Core>

namespace mfeit {

/// Discrete spectrum of the variational Poincare operator restricted to
/// single-layer potentials. Eigenvalues come from K*_D through lambda = 1/2 - mu,
/// eigen-densities are orthonormal in <-S_D ., .>, which is also the Dirichlet
/// energy of w_n = S_D[phi_n] over the unit disk.
struct NPSpectrum {
    Eigen::VectorXd lambda;      ///< ordered by |lambda - 1/2| descending
    Eigen::VectorXd resonances;  ///< k_n = k0 (1 - 1/lambda_n)
    Eigen::MatrixXd densities;   ///< columns phi_n on dD
    Eigen::MatrixXd traces_dD;   ///< w_n at the dD nodes
    Eigen::MatrixXd traces_dOmega; ///< w_n at the dOmega nodes
    BoundaryGrid outer;
    BoundaryGrid inner;
    double k0 = 1.0;
    Eigen::Index discarded = 0;  ///< modes dropped by the tail threshold

    Eigen::Index size() const noexcept { return lambda.size(); }

    /// Eigenvalues above 1/2 (lambda+) and below (lambda-); either may be empty.
    Eigen::VectorXd upper_branch() const;
    Eigen::VectorXd lower_branch() const;
};

struct SpectrumOptions {
    Eigen::Index n_modes = 60;
    double tail = 1e-8; ///< keep modes with |lambda - 1/2| > tail
};

/// Throws NotConverged when more than n/4 modes are requested or when the discrete
/// spectrum leaves (0, 1); NumericError when -S fails to be positive definite.
NPSpectrum compute_spectrum(const KernelMatrices& kernels, const BoundaryGrid& outer, double k0,
                            const SpectrumOptions& options = {});

/// All eigenvalues of K*_D, ascending (the constant-density 1/2 included).
Eigen::VectorXd kstar_eigenvalues(const KernelMatrices& kernels);

/// k0 (-1 - ((r + 2)/r)^2) with r = r_inf(shape): lower bound for every resonance.
double resonance_bound(const StarShape& shape, double k0);

/// The same bound with r replaced by the class constant b0 (shape independent).
double class_resonance_bound(const DomainConfig& config);

/// -sum_{n < terms} w_n(x) w_n(z).
double neumann_partial_sum(const NPSpectrum& spectrum, const Point& x, const Point& z, Eigen::Index terms);

/// Partial sum minus the energy projection of N(., z) onto the first `terms`
/// eigenfunctions. The projection coefficient is -\int_dD N(y, z) phi_n(y) ds(y),
/// evaluated with the kernel arguments swapped, so the result measures quadrature
/// symmetry and normalization consistency (~1e-12 when healthy).
double neumann_series_check(const NPSpectrum& spectrum, const Point& x, const Point& z, Eigen::Index terms);

} // namespace mfeit
