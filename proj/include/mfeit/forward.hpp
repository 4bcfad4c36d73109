#pragma once

#include "mfeit/geometry.hpp"
#include "mfeit/potential.hpp"
#include "mfeit/spectrum.hpp"

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <limits>
#include <memory>
#include <variant>

namespace mfeit {

using Complex = std::complex<double>;

/// Node counts on dD (inner) and on the unit circle (outer).
struct Resolution {
    int inner = 256;
    int outer = 256;
};

/// f(theta) = sum_{m>=1} c_m cos m theta + s_m sin m theta; cos[0] must be zero.
struct CurrentSpec {
    Eigen::VectorXd cos = Eigen::VectorXd::Unit(2, 1);
    Eigen::VectorXd sin;
};

/// Boundary current sampled on the outer grid; zero mean.
struct NeumannDatum {
    Eigen::VectorXd values;
};

NeumannDatum make_current(const CurrentSpec& spec, const BoundaryGrid& outer);

/// k(omega) = k_r + i c omega
struct AffineProfile {
    double k_r = 1.0;
    double c = 1.0;
};

/// k(omega) = k_inf + (k_s - k_inf) / (1 + i omega tau)
struct DebyeProfile {
    double k_inf = 10.0;
    double k_s = 1.0;
    double tau = 1.0;
};

class FrequencyProfile {
  public:
    FrequencyProfile() = default;
    FrequencyProfile(AffineProfile p) : model_(p) {}
    FrequencyProfile(DebyeProfile p) : model_(p) {}

    Complex operator()(double omega) const;
    Eigen::VectorXcd sample(const Eigen::VectorXd& omegas) const;

    /// Throws ValidationError if some k(omega_j) touches the closed negative real axis.
    void validate(const Eigen::VectorXd& omegas) const;

    const std::variant<AffineProfile, DebyeProfile>& model() const noexcept { return model_; }

  private:
    std::variant<AffineProfile, DebyeProfile> model_ = DebyeProfile{};
};

/// Boundary voltages U(i, j) = u(x_i, omega_j) on the outer grid.
struct MultiFreqData {
    Eigen::VectorXd omega;
    Eigen::VectorXcd k;
    Eigen::MatrixXcd voltages;
    double eta = 0.0;
    std::uint64_t seed = 0;

    Eigen::Index n_points() const noexcept { return voltages.rows(); }
    Eigen::Index n_frequencies() const noexcept { return voltages.cols(); }
};

/// Current and perfect-conductor trace on dOmega. rho is the constant value of u0
/// on D, NaN when unknown (e.g. after extraction from measurements).
struct CauchyData {
    Eigen::VectorXd theta;
    Eigen::VectorXd f;
    Eigen::VectorXd u0;
    double rho = std::numeric_limits<double>::quiet_NaN();
};

/// Trace on the unit circle of the harmonic function with Neumann data f and zero
/// boundary mean, from -\int N(x, z) f(z) ds(z) with the log product rule.
Eigen::VectorXd harmonic_lift_trace(const BoundaryGrid& outer, const NeumannDatum& f);

/// Interior values and gradients of the same function (trapezoidal rule).
Eigen::VectorXd harmonic_lift(const BoundaryGrid& outer, const NeumannDatum& f, const Eigen::Matrix2Xd& targets);
Eigen::Matrix2Xd harmonic_lift_gradient(const BoundaryGrid& outer, const NeumannDatum& f,
                                        const Eigen::Matrix2Xd& targets);

/// Subtracts the dOmega mean (the outer grid is uniform).
template <typename Derived>
void recenter(Eigen::MatrixBase<Derived>& trace) {
    trace.array() -= trace.mean();
}

struct ForwardOptions {
    double resonance_tol = 1e-10; ///< NearResonance threshold on |c(k) + mu_n|
};

/// Everything needed to solve the conductivity problem for one inclusion: grids,
/// kernel matrices and the map from dD densities to dOmega traces.
class ForwardProblem {
  public:
    ForwardProblem(StarShape shape, DomainConfig config, Resolution resolution = {},
                   ForwardOptions options = {});

    const StarShape& shape() const noexcept { return shape_; }
    const DomainConfig& config() const noexcept { return config_; }
    const KernelMatrices& kernels() const noexcept { return kernels_; }
    const BoundaryGrid& outer() const noexcept { return outer_; }
    const BoundaryGrid& inner() const noexcept { return kernels_.grid; }

    /// Perfect-conductor solution: grad u0 = 0 in D, harmonic outside, d_nu u0 = f.
    CauchyData solve_u0(const NeumannDatum& f) const;

    /// Second-kind integral equation ((k0 + k)/(2(k0 - k)) + K*) phi = -d_nu f_lift / k0.
    Eigen::VectorXcd solve_direct(const NeumannDatum& f, Complex k) const;

    /// Truncated eigenfunction expansion around k0^{-1} u0; n_modes is capped at the
    /// number of modes the spectrum kept.
    Eigen::VectorXcd solve_spectral(const NeumannDatum& f, Complex k, const NPSpectrum& spectrum,
                                    Eigen::Index n_modes) const;

    NPSpectrum spectrum(const SpectrumOptions& options = {}) const;

    /// Eigenvalues of K*, computed once on first use.
    const Eigen::VectorXd& kstar_spectrum() const;

  private:
    StarShape shape_;
    DomainConfig config_;
    ForwardOptions options_;
    BoundaryGrid outer_;
    KernelMatrices kernels_;
    Eigen::MatrixXd to_outer_; ///< S_D densities -> dOmega trace

    struct Lazy;
    std::shared_ptr<Lazy> lazy_;
};

CauchyData solve_u0(const StarShape& shape, const NeumannDatum& f, const DomainConfig& config,
                    const Resolution& resolution = {});

Eigen::VectorXcd solve_forward_direct(const StarShape& shape, const NeumannDatum& f, Complex k,
                                      const DomainConfig& config, const Resolution& resolution = {});

Eigen::VectorXcd solve_forward_spectral(const StarShape& shape, const NeumannDatum& f, Complex k,
                                        const DomainConfig& config, const NPSpectrum& spectrum,
                                        Eigen::Index n_modes, const Resolution& resolution = {});

/// Noise-free voltages at every k(omega_j) (columns solved independently).
MultiFreqData synthesize_clean(const ForwardProblem& problem, const NeumannDatum& f,
                               const FrequencyProfile& profile, const Eigen::VectorXd& omegas);

/// Adds complex Gaussian noise scaled so that sup_{i,j} |noise| == eta exactly.
/// Column j draws from its own generator seeded by (seed, j).
MultiFreqData add_noise(MultiFreqData data, double eta, std::uint64_t seed);

MultiFreqData synthesize(const ForwardProblem& problem, const NeumannDatum& f, const FrequencyProfile& profile,
                         const Eigen::VectorXd& omegas, double eta, std::uint64_t seed);

} // namespace mfeit
