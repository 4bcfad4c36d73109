#include "mfeit/geometry.hpp"

#include "mfeit/errors.hpp"

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <sstream>

namespace mfeit {

ConstraintViolation::ConstraintViolation(std::string bound, double worst_theta, double value)
    : ValidationError([&] {
          std::ostringstream os;
          os << "shape violates " << bound << " bound at theta=" << worst_theta << " (value " << value << ")";
          return os.str();
      }()),
      bound_(std::move(bound)), worst_theta_(worst_theta), value_(value) {}

void DomainConfig::validate() const {
    if (!(k0 > 0.0)) throw ValidationError("k0 must be positive");
    if (b1 != 1.0) throw ValidationError("b1 must equal 1 (unit disk)");
    if (!(b0 > 0.0 && b0 < b1 - delta)) throw ValidationError("need 0 < b0 < b1 - delta");
    if (!(delta > 0.0)) throw ValidationError("delta must be positive");
    if (!(m > 0.0)) throw ValidationError("m must be positive");
}

StarShape::StarShape(Eigen::VectorXd cos_coeffs, Eigen::VectorXd sin_coeffs)
    : cos_(std::move(cos_coeffs)), sin_(std::move(sin_coeffs)) {
    if (cos_.size() == 0) cos_ = Eigen::VectorXd::Zero(1);
    const Eigen::Index modes = std::max(cos_.size() - 1, sin_.size());
    if (cos_.size() < modes + 1) cos_.conservativeResizeLike(Eigen::VectorXd::Zero(modes + 1));
    if (sin_.size() < modes) sin_.conservativeResizeLike(Eigen::VectorXd::Zero(modes));
    if (!cos_.allFinite() || !sin_.allFinite()) throw ValidationError("shape coefficients must be finite");
}

StarShape StarShape::circle(double radius) {
    return StarShape(Eigen::VectorXd::Constant(1, radius), Eigen::VectorXd());
}

StarShape StarShape::from_packed(const Eigen::VectorXd& packed, int modes) {
    if (packed.size() != 2 * modes + 1) throw ValidationError("packed coefficient vector has wrong length");
    return StarShape(packed.head(modes + 1), packed.tail(modes));
}

Eigen::VectorXd StarShape::packed() const {
    Eigen::VectorXd p(cos_.size() + sin_.size());
    p << cos_, sin_;
    return p;
}

double StarShape::radius(double theta) const {
    double r = cos_[0];
    for (int m = 1; m <= modes(); ++m) r += cos_[m] * std::cos(m * theta) + sin_[m - 1] * std::sin(m * theta);
    return r;
}

double StarShape::radius_d1(double theta) const {
    double r = 0.0;
    for (int m = 1; m <= modes(); ++m) r += m * (-cos_[m] * std::sin(m * theta) + sin_[m - 1] * std::cos(m * theta));
    return r;
}

double StarShape::radius_d2(double theta) const {
    double r = 0.0;
    for (int m = 1; m <= modes(); ++m)
        r -= m * m * (cos_[m] * std::cos(m * theta) + sin_[m - 1] * std::sin(m * theta));
    return r;
}

StarShape StarShape::resized(int modes) const {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(modes + 1);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(modes);
    const int keep = std::min(modes, this->modes());
    c.head(keep + 1) = cos_.head(keep + 1);
    s.head(keep) = sin_.head(keep);
    return StarShape(c, s);
}

void validate_shape(const StarShape& shape, const DomainConfig& config) {
    double lo = INFINITY, hi = -INFINITY, smooth = 0.0;
    double theta_lo = 0.0, theta_hi = 0.0, theta_smooth = 0.0;
    for (int i = 0; i < constraint_samples; ++i) {
        const double t = two_pi * i / constraint_samples;
        const double r = shape.radius(t);
        const double proxy = std::abs(r) + std::abs(shape.radius_d1(t)) + std::abs(shape.radius_d2(t));
        if (r < lo) lo = r, theta_lo = t;
        if (r > hi) hi = r, theta_hi = t;
        if (proxy > smooth) smooth = proxy, theta_smooth = t;
    }
    if (!(lo > config.b0)) throw ConstraintViolation("lower", theta_lo, lo);
    if (!(hi < config.b1 - config.delta)) throw ConstraintViolation("upper", theta_hi, hi);
    if (!(smooth <= config.m)) throw ConstraintViolation("smoothness", theta_smooth, smooth);
}

StarShape build_star_shape(const Eigen::VectorXd& cos_coeffs, const Eigen::VectorXd& sin_coeffs,
                           const DomainConfig& config) {
    StarShape shape(cos_coeffs, sin_coeffs);
    validate_shape(shape, config);
    return shape;
}

double BoundaryGrid::signed_area() const {
    // 1/2 \oint (x dy - y dx); tangents are recovered from the normals: x' = J (-nu_y, nu_x)
    double area = 0.0;
    for (Eigen::Index i = 0; i < size(); ++i) {
        const double dx = -normals(1, i) * jacobians[i];
        const double dy = normals(0, i) * jacobians[i];
        area += points(0, i) * dy - points(1, i) * dx;
    }
    return 0.5 * weight * area;
}

BoundaryGrid discretize(const StarShape& shape, int n) {
    if (n < 16 || n % 2 != 0) throw InvalidResolution("grid size must be even and >= 16, got " + std::to_string(n));
    BoundaryGrid grid;
    grid.params.resize(n);
    grid.points.resize(2, n);
    grid.normals.resize(2, n);
    grid.second_derivs.resize(2, n);
    grid.jacobians.resize(n);
    grid.weight = two_pi / n;
    for (int i = 0; i < n; ++i) {
        const double t = two_pi * i / n;
        const double c = std::cos(t), s = std::sin(t);
        const double r = shape.radius(t), r1 = shape.radius_d1(t), r2 = shape.radius_d2(t);
        const Point x(r * c, r * s);
        const Point dx(r1 * c - r * s, r1 * s + r * c);
        const Point ddx((r2 - r) * c - 2.0 * r1 * s, (r2 - r) * s + 2.0 * r1 * c);
        const double jac = dx.norm();
        grid.params[i] = t;
        grid.points.col(i) = x;
        grid.normals.col(i) = Point(dx.y(), -dx.x()) / jac;
        grid.second_derivs.col(i) = ddx;
        grid.jacobians[i] = jac;
    }
    return grid;
}

BoundaryGrid unit_circle_grid(int n) { return discretize(StarShape::circle(1.0), n); }

double r_inf(const StarShape& shape) {
    // x . nu = r^2 / sqrt(r^2 + r'^2)
    const auto support = [&](double t) {
        const double r = shape.radius(t), r1 = shape.radius_d1(t);
        return r * r / std::sqrt(r * r + r1 * r1);
    };
    constexpr int samples = 4096;
    double best = INFINITY;
    int best_i = 0;
    for (int i = 0; i < samples; ++i) {
        const double v = support(two_pi * i / samples);
        if (v < best) best = v, best_i = i;
    }
    const double h = two_pi / samples;
    const double t0 = two_pi * best_i / samples;
    const auto [t, v] = boost::math::tools::brent_find_minima(support, t0 - h, t0 + h, 52);
    (void)t;
    return std::min(best, v);
}

} // namespace mfeit
