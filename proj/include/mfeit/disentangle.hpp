#pragma once

#include "mfeit/forward.hpp"
#include "mfeit/geometry.hpp"

#include <Eigen/Core>

namespace mfeit {

/// alpha_i(k) = alpha_inf(i) + sum_n residues(i, n) / (k - poles(n)), poles shared by
/// every boundary point.
struct RationalModel {
    Eigen::VectorXcd poles;
    Eigen::VectorXcd alpha_inf;
    Eigen::MatrixXcd residues;
    double scale = 1.0;    ///< max |U| of the fitted data
    double abs_tol = 0.0;  ///< absolute tolerance the fit was run with
    double residual = 0.0; ///< max abs misfit on the data after stage 2

    Eigen::Index n_poles() const noexcept { return poles.size(); }
    Eigen::Index n_points() const noexcept { return alpha_inf.size(); }
    Eigen::VectorXcd operator()(Complex k) const;
    /// Poles sorted by distance from the origin (leading pole first).
    Eigen::VectorXcd sorted_poles() const;
};

struct FitOptions {
    Eigen::Index max_poles = 12;
    double tol = 1e-11;          ///< relative to the data scale
    double noise_factor = 2.0;   ///< absolute tolerance never drops below noise_factor * eta
    Eigen::Index reference_points = 32; ///< boundary points driving the greedy stage
};

/// Two-stage fit: set-valued AAA on a subsample of boundary points gives the poles,
/// then one least-squares problem with those poles fixed gives alpha_inf and residues
/// at every point. Poles outside the admissible disk (centre -d/2, radius 1.5 d with
/// d = -class_resonance_bound) and negligible residues are pruned.
RationalModel fit_rational(const MultiFreqData& data, const DomainConfig& config, const FitOptions& options = {});

/// u0 = k0 Re alpha_inf, recentred. Throws NonRealLimit when |Im alpha_inf| > imag_tol
/// (default: max(1e-6 scale, 100 abs_tol)).
CauchyData extract_u0(const RationalModel& model, double k0, double imag_tol = -1.0);

/// (1/2 pi i) \oint (alpha(k) - alpha_inf) / (k_eval - k) dk over a circle, which is
/// alpha(k_eval) - alpha_inf when the contour holds every pole and k_eval is outside.
Complex cauchy_integral_check(const RationalModel& model, Eigen::Index point, Complex center, double radius,
                              Complex k_eval, int n_quad = 512);

} // namespace mfeit
