#pragma once

#include <Eigen/Core>

#include <numbers>

namespace mfeit {

using Point = Eigen::Vector2d;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Class constants for admissible inclusions plus the background conductivity.
/// The outer domain is always the unit disk, so b1 = dist(0, dOmega) = 1.
struct DomainConfig {
    double b0 = 0.2;
    double b1 = 1.0;
    double delta = 0.1;
    double m = 10.0; ///< bound on max(|r| + |r'| + |r''|)
    double k0 = 1.0;

    /// Throws ValidationError unless k0 > 0, 0 < b0 < b1 - delta and b1 == 1.
    void validate() const;
};

/// Radial function r(theta) = a0 + sum_m (a_m cos m theta + b_m sin m theta).
class StarShape {
  public:
    StarShape() = default;
    StarShape(Eigen::VectorXd cos_coeffs, Eigen::VectorXd sin_coeffs);

    static StarShape circle(double radius);

    /// Packed layout [a0, a1..aM, b1..bM] used by the inverter.
    static StarShape from_packed(const Eigen::VectorXd& packed, int modes);
    Eigen::VectorXd packed() const;

    int modes() const noexcept { return static_cast<int>(cos_.size()) - 1; }
    const Eigen::VectorXd& cos_coeffs() const noexcept { return cos_; }
    const Eigen::VectorXd& sin_coeffs() const noexcept { return sin_; }

    double radius(double theta) const;
    double radius_d1(double theta) const;
    double radius_d2(double theta) const;

    /// Copy with coefficients padded/truncated to `modes`.
    StarShape resized(int modes) const;

    bool operator==(const StarShape&) const = default;

  private:
    Eigen::VectorXd cos_ = Eigen::VectorXd::Constant(1, 0.5);
    Eigen::VectorXd sin_;
};

/// Number of angles used for the class membership test.
inline constexpr int constraint_samples = 1024;

/// Throws ConstraintViolation when the shape leaves the admissible class.
void validate_shape(const StarShape& shape, const DomainConfig& config);

StarShape build_star_shape(const Eigen::VectorXd& cos_coeffs, const Eigen::VectorXd& sin_coeffs,
                           const DomainConfig& config);

/// Equispaced trapezoidal discretization of a closed, counterclockwise curve.
struct BoundaryGrid {
    Eigen::VectorXd params;       ///< t_i = 2 pi i / n
    Eigen::Matrix2Xd points;      ///< x(t_i)
    Eigen::Matrix2Xd normals;     ///< outward unit normals
    Eigen::Matrix2Xd second_derivs; ///< x''(t_i), used for the curvature limit
    Eigen::VectorXd jacobians;    ///< |x'(t_i)|
    double weight = 0.0;          ///< 2 pi / n

    Eigen::Index size() const noexcept { return params.size(); }

    /// Arc-length quadrature weights w_i |x'(t_i)|.
    Eigen::VectorXd ds() const { return weight * jacobians; }

    double perimeter() const { return weight * jacobians.sum(); }
    double signed_area() const;
    double max_jacobian() const { return jacobians.maxCoeff(); }
};

/// Requires an even n >= 16; derivatives come from the Fourier series directly.
BoundaryGrid discretize(const StarShape& shape, int n);

/// The outer boundary |x| = 1.
BoundaryGrid unit_circle_grid(int n);

/// inf over the boundary of x . nu(x); strictly positive for star-shaped curves.
double r_inf(const StarShape& shape);

} // namespace mfeit
