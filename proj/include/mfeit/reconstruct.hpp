#pragma once

#include "mfeit/disentangle.hpp"
#include "mfeit/errors.hpp"
#include "mfeit/forward.hpp"
#include "mfeit/geometry.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mfeit {

struct InversionSettings {
    int n_modes = 8;           ///< M, at most 16
    double alpha = 1e-8;       ///< weight of the ||r''||^2 penalty
    int max_iter = 60;
    double damping = 1e-3;     ///< initial Levenberg-Marquardt parameter
    double damping_up = 10.0;
    double damping_down = 0.3;
    int max_backtracks = 12;
    double gtol = 1e-14;       ///< stop when ||grad J||_inf falls below this
    double ftol = 1e-12;       ///< stop when an accepted step gains less than ftol * J
    double fd_step = 1e-6;     ///< relative to a0
    double margin = 1e-3;      ///< projection keeps the radius this far inside the band
    int inner_nodes = 128;
    std::optional<StarShape> initial; ///< default: circle of radius (b0 + b1 - delta) / 2

    void validate() const;
};

enum class Termination { Gradient, Stagnation, MaxIterations };

struct InversionResult {
    StarShape shape;
    double misfit = 0.0;
    std::vector<double> history; ///< J of every accepted iterate, starting point first
    double rho = 0.0;
    bool hit_constraint = false;
    Termination termination = Termination::MaxIterations;
};

/// Thrown when no backtracking step reduces J at the starting point; carries the
/// best iterate anyway.
class InversionDiverged : public Diverged {
  public:
    InversionDiverged(const std::string& what, InversionResult best) : Diverged(what), best_(std::move(best)) {}
    const InversionResult& best() const noexcept { return best_; }

  private:
    InversionResult best_;
};

struct MisfitValue {
    double value = 0.0;
    Eigen::VectorXd residual; ///< J = |residual|^2 / 2 (data part, then penalty)
    Eigen::VectorXd gradient; ///< empty unless requested
    Eigen::MatrixXd jacobian; ///< residual Jacobian w.r.t. packed coefficients
    double rho = 0.0;
};

/// J = 1/2 \int_dOmega (u0_sim - u0_meas)^2 ds + alpha/2 \int (r'')^2 dtheta, the
/// simulation taken on the grid of `data`. The gradient (J^T r, central differences
/// with h = fd_step * a0) is computed when `with_gradient` is set.
MisfitValue misfit(const StarShape& candidate, const CauchyData& data, const InversionSettings& settings,
                   const DomainConfig& config, bool with_gradient = true);

/// Pulls a shape back into the class: a0 clamped into the band, oscillation scaled
/// down until every class constraint holds with the given margin. Returns true if
/// anything changed.
bool project_to_class(StarShape& shape, const DomainConfig& config, double margin);

/// Damped Gauss-Newton on the packed Fourier coefficients.
InversionResult invert(const CauchyData& data, const InversionSettings& settings, const DomainConfig& config);

/// Area of the symmetric difference of two origin-star-shaped domains, exact up to
/// root finding: 1/2 \int |ra^2 - rb^2| dtheta from the trigonometric antiderivative.
double symmetric_difference(const StarShape& a, const StarShape& b);

double rho_gap(const CauchyData& a, const CauchyData& b);

struct SweepSpec {
    StarShape truth;
    CurrentSpec current;
    FrequencyProfile profile;
    Eigen::VectorXd omegas;
    std::vector<double> levels; ///< ascending
    std::vector<std::uint64_t> seeds;
    Resolution resolution{256, 256};
    FitOptions fit;
    InversionSettings inversion;
    bool require_design = true; ///< enforce >= 4 levels and >= 3 seeds
};

struct SweepRow {
    double level = 0.0;
    double eps_measured = 0.0; ///< sup |noisy - clean| over all voltages
    std::uint64_t seed = 0;
    double u0_error = 0.0;     ///< sup error of the extracted trace
    double sym_diff = 0.0;
    std::string status = "ok";
};

/// A (1/ln(1/eps))^tau and A eps^tau' fitted to the per-level medians in log space.
struct RateFit {
    double log_c = 0.0;
    double exponent = 0.0;
    double residual = 0.0; ///< rms misfit in log space
    bool valid = false;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<double> levels;
    std::vector<double> median_eps;
    std::vector<double> median_sym_diff;
    std::vector<double> median_u0_error;
    RateFit logarithmic;
    RateFit holder;
};

SweepResult stability_sweep(const SweepSpec& spec, const DomainConfig& config);

/// Least-squares slope and intercept of y against x; residual is the rms error.
RateFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

} // namespace mfeit
