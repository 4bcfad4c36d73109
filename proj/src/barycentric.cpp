#include "mfeit/barycentric.hpp"

#include "mfeit/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace mfeit {

BarycentricRational::BarycentricRational(Eigen::VectorXcd support, Eigen::MatrixXcd values, Eigen::VectorXcd weights)
    : support_(std::move(support)), values_(std::move(values)), weights_(std::move(weights)) {
    if (values_.cols() != support_.size() || weights_.size() != support_.size())
        throw ValidationError("barycentric data size mismatch");
}

Eigen::VectorXcd BarycentricRational::operator()(Complex z) const {
    Eigen::VectorXcd num = Eigen::VectorXcd::Zero(values_.rows());
    Complex den = 0.0;
    for (Eigen::Index j = 0; j < support_.size(); ++j) {
        const Complex d = z - support_[j];
        if (d == Complex(0.0)) return values_.col(j);
        const Complex t = weights_[j] / d;
        num += t * values_.col(j);
        den += t;
    }
    return num / den;
}

Eigen::VectorXcd BarycentricRational::at_infinity() const { return values_ * weights_ / weights_.sum(); }

Eigen::VectorXcd BarycentricRational::poles() const {
    const Eigen::Index m = support_.size();
    if (m < 2) return {};
    // Roots of sum_j w_j / (z - z_j): eigenvalues of (I - 1 w^T / w^T 1) diag(z - s),
    // which carries one spurious zero eigenvalue (z = s) that is removed below.
    const Complex shift = support_.mean();
    const Complex wsum = weights_.sum();
    Eigen::MatrixXcd a = -Eigen::VectorXcd::Ones(m) * weights_.transpose() / wsum;
    a.diagonal().array() += 1.0;
    a = a * (support_.array() - shift).matrix().asDiagonal();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(a, false);
    if (solver.info() != Eigen::Success) throw NumericError("pole eigen-solve failed");
    Eigen::VectorXcd ev = solver.eigenvalues();
    Eigen::Index spurious = 0;
    ev.cwiseAbs().minCoeff(&spurious);
    Eigen::VectorXcd out(m - 1);
    for (Eigen::Index i = 0, k = 0; i < m; ++i)
        if (i != spurious) out[k++] = ev[i] + shift;
    return out;
}

AaaResult aaa(const Eigen::VectorXcd& points, const Eigen::MatrixXcd& samples, double abs_tol,
              Eigen::Index max_degree, const std::function<bool(const BarycentricRational&)>& accept) {
    const Eigen::Index n = points.size();
    const Eigen::Index comps = samples.rows();
    if (samples.cols() != n) throw ValidationError("aaa: samples must be components x points");
    AaaResult result;

    std::vector<Eigen::Index> support;
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    Eigen::MatrixXcd approx = samples.rowwise().mean().replicate(1, n);

    const auto max_error = [&](Eigen::Index* where) {
        double worst = 0.0;
        Eigen::Index at = -1;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (used[static_cast<std::size_t>(i)]) continue;
            const double e = (samples.col(i) - approx.col(i)).cwiseAbs().maxCoeff();
            if (e > worst || at < 0) worst = e, at = i;
        }
        if (where) *where = at;
        return worst;
    };

    Eigen::Index next = 0;
    double err = max_error(&next);
    result.error_history.push_back(err);
    if (err <= abs_tol) {
        // constant data: one support point reproduces the mean
        result.rational = BarycentricRational(points.segment(next, 1), samples.rowwise().mean(),
                                              Eigen::VectorXcd::Ones(1));
        result.converged = true;
        return result;
    }

    Eigen::VectorXcd weights;
    while (true) {
        support.push_back(next);
        used[static_cast<std::size_t>(next)] = true;
        const auto m = static_cast<Eigen::Index>(support.size());

        std::vector<Eigen::Index> rest;
        for (Eigen::Index i = 0; i < n; ++i)
            if (!used[static_cast<std::size_t>(i)]) rest.push_back(i);
        const auto r = static_cast<Eigen::Index>(rest.size());

        if (r == 0) {
            weights = Eigen::VectorXcd::Ones(m);
        } else {
            Eigen::MatrixXcd loewner(r * comps, m);
            for (Eigen::Index l = 0; l < comps; ++l)
                for (Eigen::Index a = 0; a < r; ++a)
                    for (Eigen::Index b = 0; b < m; ++b) {
                        const Eigen::Index i = rest[a], j = support[b];
                        loewner(l * r + a, b) = (samples(l, i) - samples(l, j)) / (points[i] - points[j]);
                    }
            Eigen::BDCSVD<Eigen::MatrixXcd> svd(loewner, Eigen::ComputeFullV);
            weights = svd.matrixV().col(m - 1);
        }

        Eigen::VectorXcd zs(m);
        Eigen::MatrixXcd fs(comps, m);
        for (Eigen::Index b = 0; b < m; ++b) zs[b] = points[support[b]], fs.col(b) = samples.col(support[b]);
        result.rational = BarycentricRational(zs, fs, weights);

        for (Eigen::Index i = 0; i < n; ++i) approx.col(i) = used[static_cast<std::size_t>(i)] ? samples.col(i) : result.rational(points[i]);
        err = r == 0 ? 0.0 : max_error(&next);
        result.error_history.push_back(err);
        if (err <= abs_tol || (accept && accept(result.rational))) {
            result.converged = true;
            break;
        }
        if (m - 1 >= max_degree || r == 0 || !std::isfinite(err)) break;
    }
    return result;
}

} // namespace mfeit
