#pragma once

#include <Eigen/Core>

#include <complex>
#include <functional>
#include <vector>

namespace mfeit {

/// Vector-valued rational function in barycentric form
///   r_l(z) = sum_j w_j f_{l,j} / (z - z_j)  /  sum_j w_j / (z - z_j)
/// with support points z_j and weights w_j shared by every component l.
class BarycentricRational {
  public:
    using Complex = std::complex<double>;

    BarycentricRational() = default;
    BarycentricRational(Eigen::VectorXcd support, Eigen::MatrixXcd values, Eigen::VectorXcd weights);

    Eigen::Index degree() const noexcept { return support_.size() - 1; }
    Eigen::Index components() const noexcept { return values_.rows(); }

    const Eigen::VectorXcd& support() const noexcept { return support_; }
    const Eigen::MatrixXcd& values() const noexcept { return values_; }
    const Eigen::VectorXcd& weights() const noexcept { return weights_; }

    /// All components at z (exact values at support points).
    Eigen::VectorXcd operator()(Complex z) const;

    /// Value at infinity: sum w_j f_j / sum w_j.
    Eigen::VectorXcd at_infinity() const;

    /// Zeros of the barycentric denominator. A vanishing weight sum (pole at
    /// infinity) shows up as a huge finite root.
    Eigen::VectorXcd poles() const;

  private:
    Eigen::VectorXcd support_;
    Eigen::MatrixXcd values_; ///< components x support points
    Eigen::VectorXcd weights_;
};

struct AaaResult {
    BarycentricRational rational;
    std::vector<double> error_history; ///< max abs error on non-support samples per step
    bool converged = false;
};

/// Set-valued AAA: greedy support selection on the worst sample over all
/// components, weights from the smallest right singular vector of the stacked
/// Loewner matrices. `samples` is components x points. Stops once the max abs error
/// is <= abs_tol, `accept` returns true for the current iterate, or the degree
/// reaches max_degree.
AaaResult aaa(const Eigen::VectorXcd& points, const Eigen::MatrixXcd& samples, double abs_tol,
              Eigen::Index max_degree,
              const std::function<bool(const BarycentricRational&)>& accept = {});

} // namespace mfeit
