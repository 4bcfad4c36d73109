#pragma once

#include "mfeit/errors.hpp"
#include "mfeit/geometry.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>

namespace mfeit {

/// Neumann function of the unit disk,
///   N(x, z) = (1/2pi) ln|x - z| + (1/4pi) ln(|x|^2 |z|^2 - 2 x.z + 1),
/// i.e. the free-space kernel plus its image charge at z/|z|^2. Laplacian is the
/// Dirac mass at z, the outward flux on |x| = 1 is 1/(2pi), the boundary mean is 0.
double neumann_kernel(const Point& x, const Point& z);

/// Gradient of N(x, z) with respect to x.
Point neumann_kernel_gradient(const Point& x, const Point& z);

/// Smooth image part of N and its x-gradient (no singularity for |x|, |z| < 1).
double neumann_image(const Point& x, const Point& z);
Point neumann_image_gradient(const Point& x, const Point& z);

/// Product-rule weights for \int_0^{2pi} ln(4 sin^2((t - tau)/2)) g(tau) dtau on n
/// equispaced nodes; entry k pairs nodes whose index difference is k.
Eigen::VectorXd log_quadrature_weights(int n);

/// Discrete single layer and Neumann-Poincare operators on dD.
///
/// Densities are nodal values phi_j. `single_layer` maps phi to the trace of S_D[phi]
/// at the nodes. `gram` is the bilinear form <S_D phi, psi>_{L^2(dD)} = psi^T gram phi;
/// it is symmetric, and -gram is the weight of the energy inner product.
struct KernelMatrices {
    BoundaryGrid grid;
    Eigen::MatrixXd single_layer;
    Eigen::MatrixXd gram;
    Eigen::MatrixXd kstar;

    Eigen::Index size() const noexcept { return grid.size(); }
};

inline constexpr int min_assembly_nodes = 32;

KernelMatrices assemble(const BoundaryGrid& grid);

/// Matrix E with E(i, j) = N(target_i, x_j) |x'(t_j)| 2pi/n, i.e. trapezoidal S_D for
/// targets away from the curve. Throws TargetTooClose when a target falls inside the
/// quadrature's inaccuracy zone (distance <= 2pi max|x'| / n).
Eigen::MatrixXd single_layer_evaluator(const BoundaryGrid& grid, const Eigen::Matrix2Xd& targets);

template <typename Derived>
auto eval_S(const BoundaryGrid& grid, const Eigen::MatrixBase<Derived>& density, const Eigen::Matrix2Xd& targets) {
    using Scalar = typename Derived::Scalar;
    const Eigen::MatrixXd E = single_layer_evaluator(grid, targets);
    return Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(E.template cast<Scalar>() * density);
}

/// Gradient of S_D[phi] at off-curve targets (2 x m, real densities only).
Eigen::Matrix2Xd eval_S_gradient(const BoundaryGrid& grid, const Eigen::VectorXd& density,
                                 const Eigen::Matrix2Xd& targets);

/// Energy inner product <-S_D phi, psi>.
double s_inner(const KernelMatrices& kernels, const Eigen::VectorXd& phi, const Eigen::VectorXd& psi);

/// Debug dump: int64 n, uint64 shape hash, then n*n row-major doubles.
void dump_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& matrix, std::uint64_t shape_hash);
Eigen::MatrixXd load_matrix_dump(const std::filesystem::path& path, std::uint64_t* shape_hash = nullptr);

} // namespace mfeit
