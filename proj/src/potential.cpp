#include "mfeit/potential.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace mfeit {

namespace {

constexpr double inv_2pi = 0.5 / std::numbers::pi;
constexpr double inv_4pi = 0.25 / std::numbers::pi;

} // namespace

double neumann_image(const Point& x, const Point& z) {
    const double q = x.squaredNorm() * z.squaredNorm() - 2.0 * x.dot(z) + 1.0;
    return inv_4pi * std::log(q);
}

Point neumann_image_gradient(const Point& x, const Point& z) {
    const double q = x.squaredNorm() * z.squaredNorm() - 2.0 * x.dot(z) + 1.0;
    return inv_4pi * (2.0 * z.squaredNorm() * x - 2.0 * z) / q;
}

double neumann_kernel(const Point& x, const Point& z) {
    if (z.norm() >= 1.0) throw DomainViolation("source point must lie inside the unit disk");
    const double d = (x - z).norm();
    if (d == 0.0) throw SingularEvaluation("Neumann kernel evaluated at x = z");
    return inv_2pi * std::log(d) + neumann_image(x, z);
}

Point neumann_kernel_gradient(const Point& x, const Point& z) {
    if (z.norm() >= 1.0) throw DomainViolation("source point must lie inside the unit disk");
    const Point d = x - z;
    const double d2 = d.squaredNorm();
    if (d2 == 0.0) throw SingularEvaluation("Neumann kernel gradient evaluated at x = z");
    return inv_2pi * d / d2 + neumann_image_gradient(x, z);
}

Eigen::VectorXd log_quadrature_weights(int n) {
    Eigen::VectorXd r(n);
    const int half = n / 2;
    for (int k = 0; k < n; ++k) {
        const double t = two_pi * k / n;
        double s = 0.0;
        for (int m = 1; m < half; ++m) s += std::cos(m * t) / m;
        r[k] = -4.0 * std::numbers::pi / n * s - 4.0 * std::numbers::pi / (double(n) * n) * std::cos(half * t);
    }
    return r;
}

KernelMatrices assemble(const BoundaryGrid& grid) {
    const Eigen::Index n = grid.size();
    if (n < min_assembly_nodes) throw ResolutionTooLow("assembly needs at least 32 nodes");
    const Eigen::VectorXd R = log_quadrature_weights(static_cast<int>(n));
    const double w = grid.weight;

    // Kernel-level symmetric part; the log singularity is split off as
    // (1/4pi) ln(4 sin^2((t - tau)/2)) and integrated with the product rule.
    Eigen::MatrixXd kernel(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Point xi = grid.points.col(i);
        kernel(i, i) = inv_4pi * R[0] + w * (inv_4pi * std::log(grid.jacobians[i] * grid.jacobians[i]) +
                                             neumann_image(xi, xi));
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const Point xj = grid.points.col(j);
            const double s = std::sin(0.5 * (grid.params[i] - grid.params[j]));
            const double smooth = inv_4pi * std::log((xi - xj).squaredNorm() / (4.0 * s * s)) + neumann_image(xi, xj);
            kernel(i, j) = kernel(j, i) = inv_4pi * R[j - i] + w * smooth;
        }
    }

    KernelMatrices out;
    out.grid = grid;
    out.single_layer = kernel * grid.jacobians.asDiagonal();
    out.gram = w * grid.jacobians.asDiagonal() * out.single_layer;
    out.gram = 0.5 * (out.gram + out.gram.transpose()).eval();

    out.kstar.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Point xi = grid.points.col(i);
        const Point nu = grid.normals.col(i);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) {
                const double jac = grid.jacobians[i];
                const double free = -inv_4pi * nu.dot(grid.second_derivs.col(i)) / (jac * jac);
                out.kstar(i, i) = w * jac * (free + neumann_image_gradient(xi, xi).dot(nu));
            } else {
                out.kstar(i, j) = w * grid.jacobians[j] * neumann_kernel_gradient(xi, grid.points.col(j)).dot(nu);
            }
        }
    }
    return out;
}

Eigen::MatrixXd single_layer_evaluator(const BoundaryGrid& grid, const Eigen::Matrix2Xd& targets) {
    const double zone = two_pi * grid.max_jacobian() / static_cast<double>(grid.size());
    Eigen::MatrixXd E(targets.cols(), grid.size());
    for (Eigen::Index i = 0; i < targets.cols(); ++i) {
        const Point x = targets.col(i);
        const double dmin = (grid.points.colwise() - x).colwise().norm().minCoeff();
        if (dmin <= zone) throw TargetTooClose("evaluation target within quadrature zone of the curve");
        for (Eigen::Index j = 0; j < grid.size(); ++j)
            E(i, j) = grid.weight * grid.jacobians[j] * neumann_kernel(x, grid.points.col(j));
    }
    return E;
}

Eigen::Matrix2Xd eval_S_gradient(const BoundaryGrid& grid, const Eigen::VectorXd& density,
                                 const Eigen::Matrix2Xd& targets) {
    const double zone = two_pi * grid.max_jacobian() / static_cast<double>(grid.size());
    Eigen::Matrix2Xd g = Eigen::Matrix2Xd::Zero(2, targets.cols());
    for (Eigen::Index i = 0; i < targets.cols(); ++i) {
        const Point x = targets.col(i);
        const double dmin = (grid.points.colwise() - x).colwise().norm().minCoeff();
        if (dmin <= zone) throw TargetTooClose("evaluation target within quadrature zone of the curve");
        for (Eigen::Index j = 0; j < grid.size(); ++j)
            g.col(i) += grid.weight * grid.jacobians[j] * density[j] * neumann_kernel_gradient(x, grid.points.col(j));
    }
    return g;
}

double s_inner(const KernelMatrices& kernels, const Eigen::VectorXd& phi, const Eigen::VectorXd& psi) {
    return -psi.dot(kernels.gram * phi);
}

void dump_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& matrix, std::uint64_t shape_hash) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    const std::int64_t n = matrix.rows();
    os.write(reinterpret_cast<const char*>(&n), sizeof n);
    os.write(reinterpret_cast<const char*>(&shape_hash), sizeof shape_hash);
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major = matrix;
    os.write(reinterpret_cast<const char*>(row_major.data()), static_cast<std::streamsize>(sizeof(double) * row_major.size()));
}

Eigen::MatrixXd load_matrix_dump(const std::filesystem::path& path, std::uint64_t* shape_hash) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    std::int64_t n = 0;
    std::uint64_t hash = 0;
    is.read(reinterpret_cast<char*>(&n), sizeof n);
    is.read(reinterpret_cast<char*>(&hash), sizeof hash);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(n, n);
    is.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
    if (!is) throw Error("truncated matrix dump " + path.string());
    if (shape_hash) *shape_hash = hash;
    return m;
}

} // namespace mfeit
