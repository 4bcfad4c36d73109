#include "mfeit/reconstruct.hpp"

#include "mfeit/parallel.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace mfeit {

void InversionSettings::validate() const {
    if (n_modes < 0 || n_modes > 16) throw ValidationError("n_modes must lie in [0, 16]");
    if (!(alpha >= 0.0)) throw ValidationError("alpha must be nonnegative");
    if (max_iter < 0 || max_backtracks < 1) throw ValidationError("iteration limits must be positive");
    if (!(damping > 0.0) || !(damping_up > 1.0) || !(damping_down > 0.0 && damping_down < 1.0))
        throw ValidationError("invalid damping constants");
    if (!(fd_step > 0.0) || !(margin >= 0.0) || !(gtol >= 0.0) || !(ftol >= 0.0))
        throw ValidationError("invalid tolerances");
    if (inner_nodes < min_assembly_nodes || inner_nodes % 2 != 0) throw InvalidResolution("inner_nodes must be even and >= 32");
}

namespace {

Eigen::VectorXd penalty_weights(int modes, double alpha) {
    // ||r''||^2 = pi sum m^4 (a_m^2 + b_m^2); packed layout [a0, a1..aM, b1..bM]
    Eigen::VectorXd w = Eigen::VectorXd::Zero(2 * modes + 1);
    for (int m = 1; m <= modes; ++m) w[m] = w[modes + m] = std::sqrt(alpha * std::numbers::pi) * m * m;
    return w;
}

Eigen::VectorXd residual_vector(const StarShape& shape, const CauchyData& data, const NeumannDatum& f,
                                const InversionSettings& settings, const DomainConfig& config, double* rho) {
    const auto n_out = static_cast<int>(data.u0.size());
    const ForwardProblem problem(shape, config, Resolution{settings.inner_nodes, n_out});
    const CauchyData sim = problem.solve_u0(f);
    if (rho) *rho = sim.rho;
    const Eigen::VectorXd w = penalty_weights(shape.modes(), settings.alpha);
    Eigen::VectorXd r(n_out + w.size());
    r.head(n_out) = std::sqrt(two_pi / n_out) * (sim.u0 - data.u0);
    r.tail(w.size()) = w.cwiseProduct(shape.packed());
    return r;
}

bool feasible(const StarShape& s, const DomainConfig& config, double margin) {
    const double lo = config.b0 + margin, hi = config.b1 - config.delta - margin;
    for (int i = 0; i < constraint_samples; ++i) {
        const double t = two_pi * i / constraint_samples;
        const double r = s.radius(t);
        if (!(r > lo && r < hi)) return false;
        if (std::abs(r) + std::abs(s.radius_d1(t)) + std::abs(s.radius_d2(t)) > config.m - margin) return false;
    }
    return true;
}

} // namespace

MisfitValue misfit(const StarShape& candidate, const CauchyData& data, const InversionSettings& settings,
                   const DomainConfig& config, bool with_gradient) {
    settings.validate();
    if (data.f.size() != data.u0.size()) throw ValidationError("Cauchy data needs f and u0 on the same grid");
    validate_shape(candidate, config);
    const NeumannDatum f{data.f};

    MisfitValue out;
    out.residual = residual_vector(candidate, data, f, settings, config, &out.rho);
    out.value = 0.5 * out.residual.squaredNorm();
    if (!with_gradient) return out;

    const int modes = candidate.modes();
    const Eigen::VectorXd x = candidate.packed();
    const double h = settings.fd_step * x[0];
    const auto np = static_cast<std::size_t>(x.size());
    std::vector<Eigen::VectorXd> plus(np), minus(np);
    parallel_for(2 * np, [&](std::size_t task) {
        const std::size_t j = task / 2;
        Eigen::VectorXd xp = x;
        xp[static_cast<Eigen::Index>(j)] += task % 2 == 0 ? h : -h;
        (task % 2 == 0 ? plus : minus)[j] =
            residual_vector(StarShape::from_packed(xp, modes), data, f, settings, config, nullptr);
    });
    out.jacobian.resize(out.residual.size(), x.size());
    for (std::size_t j = 0; j < np; ++j)
        out.jacobian.col(static_cast<Eigen::Index>(j)) = (plus[j] - minus[j]) / (2.0 * h);
    out.gradient = out.jacobian.transpose() * out.residual;
    return out;
}

bool project_to_class(StarShape& shape, const DomainConfig& config, double margin) {
    const double lo = config.b0 + margin, hi = config.b1 - config.delta - margin;
    if (!(lo < hi)) throw ValidationError("projection margin leaves an empty band");
    Eigen::VectorXd a = shape.cos_coeffs();
    const double a0 = std::clamp(a[0], lo + margin, hi - margin);
    bool changed = a0 != a[0];
    a[0] = a0;
    StarShape base(a, shape.sin_coeffs());
    if (feasible(base, config, margin)) {
        shape = base;
        return changed;
    }
    // shrink the oscillatory part toward the (feasible) mean circle
    const auto scaled = [&](double s) {
        Eigen::VectorXd c = s * a, d = s * shape.sin_coeffs();
        c[0] = a0;
        return StarShape(c, d);
    };
    double good = 0.0, bad = 1.0;
    for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (good + bad);
        (feasible(scaled(mid), config, margin) ? good : bad) = mid;
    }
    shape = scaled(good);
    return true;
}

InversionResult invert(const CauchyData& data, const InversionSettings& settings, const DomainConfig& config) {
    settings.validate();
    config.validate();
    const int modes = settings.n_modes;
    StarShape x = settings.initial ? settings.initial->resized(modes)
                                   : StarShape::circle(0.5 * (config.b0 + config.b1 - config.delta)).resized(modes);

    InversionResult result;
    result.hit_constraint = project_to_class(x, config, settings.margin);
    MisfitValue cur = misfit(x, data, settings, config, true);
    result.history.push_back(cur.value);
    const double j_ref = std::max(0.5 * two_pi / data.u0.size() * data.u0.squaredNorm(),
                                  std::numeric_limits<double>::min());

    const auto snapshot = [&](Termination why) {
        result.shape = x;
        result.misfit = cur.value;
        result.rho = cur.rho;
        result.termination = why;
        return result;
    };

    double mu = settings.damping;
    for (int iter = 0; iter < settings.max_iter; ++iter) {
        if (cur.gradient.lpNorm<Eigen::Infinity>() <= settings.gtol) return snapshot(Termination::Gradient);

        const Eigen::MatrixXd jtj = cur.jacobian.transpose() * cur.jacobian;
        const Eigen::VectorXd scaling = jtj.diagonal().cwiseMax(1e-12 * jtj.diagonal().maxCoeff() + 1e-300);
        bool accepted = false;
        StarShape trial;
        MisfitValue next;
        bool projected = false;
        for (int bt = 0; bt < settings.max_backtracks; ++bt) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += mu * scaling;
            const Eigen::VectorXd step = a.ldlt().solve(-cur.gradient);
            trial = StarShape::from_packed(x.packed() + step, modes);
            projected = project_to_class(trial, config, settings.margin);
            next = misfit(trial, data, settings, config, false);
            if (next.value < cur.value) {
                accepted = true;
                mu = std::max(mu * settings.damping_down, 1e-12);
                break;
            }
            mu *= settings.damping_up;
        }
        if (!accepted) {
            if (result.history.size() == 1 && cur.value > settings.ftol * j_ref)
                throw InversionDiverged("no backtracking step reduced the misfit", snapshot(Termination::Stagnation));
            return snapshot(Termination::Stagnation);
        }
        const double gain = cur.value - next.value;
        const double before = cur.value;
        x = trial;
        result.hit_constraint = result.hit_constraint || projected;
        cur = misfit(x, data, settings, config, true);
        result.history.push_back(cur.value);
        if (gain <= settings.ftol * before) return snapshot(Termination::Stagnation);
    }
    return snapshot(Termination::MaxIterations);
}

double symmetric_difference(const StarShape& a, const StarShape& b) {
    using C = std::complex<double>;
    const int ma = a.modes(), mb = b.modes();
    const auto coeffs = [](const StarShape& s) {
        const int m = s.modes();
        Eigen::VectorXcd c = Eigen::VectorXcd::Zero(2 * m + 1); // index k + m
        c[m] = s.cos_coeffs()[0];
        for (int k = 1; k <= m; ++k) {
            c[m + k] = C(s.cos_coeffs()[k], -s.sin_coeffs()[k - 1]) / 2.0;
            c[m - k] = std::conj(c[m + k]);
        }
        return c;
    };
    const auto square = [](const Eigen::VectorXcd& c) {
        const Eigen::Index n = c.size();
        Eigen::VectorXcd out = Eigen::VectorXcd::Zero(2 * n - 1);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) out[i + j] += c[i] * c[j];
        return out;
    };
    const int deg = 2 * std::max(ma, mb);
    Eigen::VectorXcd d = Eigen::VectorXcd::Zero(2 * deg + 1);
    const Eigen::VectorXcd sa = square(coeffs(a)), sb = square(coeffs(b));
    d.segment(deg - 2 * ma, sa.size()) += sa;
    d.segment(deg - 2 * mb, sb.size()) -= sb;

    const auto value = [&](double t) {
        double v = d[deg].real();
        for (int k = 1; k <= deg; ++k) v += 2.0 * (d[deg + k] * std::polar(1.0, k * t)).real();
        return v;
    };
    const auto antiderivative = [&](double t) {
        double v = d[deg].real() * t;
        for (int k = 1; k <= deg; ++k) v += 2.0 * (d[deg + k] * std::polar(1.0, k * t) / C(0.0, k)).real();
        return v;
    };

    const int samples = std::max(4096, 256 * (deg + 1));
    std::vector<double> breaks{0.0};
    double t0 = 0.0, v0 = value(0.0);
    for (int i = 1; i <= samples; ++i) {
        const double t1 = two_pi * i / samples;
        const double v1 = value(t1);
        if (v0 * v1 < 0.0) {
            std::uintmax_t iters = 100;
            const auto root = boost::math::tools::toms748_solve(
                value, t0, t1, v0, v1, boost::math::tools::eps_tolerance<double>(52), iters);
            breaks.push_back(0.5 * (root.first + root.second));
        }
        t0 = t1;
        v0 = v1;
    }
    breaks.push_back(two_pi);
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        area += std::abs(antiderivative(breaks[i + 1]) - antiderivative(breaks[i]));
    return 0.5 * area;
}

double rho_gap(const CauchyData& a, const CauchyData& b) {
    if (std::isnan(a.rho) || std::isnan(b.rho)) throw ValidationError("rho_gap needs Cauchy data with rho");
    return std::abs(a.rho - b.rho);
}

RateFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    RateFit fit;
    const auto n = static_cast<Eigen::Index>(x.size());
    if (n < 2 || y.size() != x.size()) return fit;
    Eigen::MatrixXd a(n, 2);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) a(i, 0) = 1.0, a(i, 1) = x[i], b[i] = y[i];
    const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
    fit.log_c = c[0];
    fit.exponent = c[1];
    fit.residual = std::sqrt((a * c - b).squaredNorm() / n);
    fit.valid = std::isfinite(fit.exponent);
    return fit;
}

namespace {

std::string status_of(const std::exception& e) {
    if (dynamic_cast<const FitDiverged*>(&e)) return "fit_diverged";
    if (dynamic_cast<const NonRealLimit*>(&e)) return "non_real_limit";
    if (dynamic_cast<const InsufficientFrequencies*>(&e)) return "insufficient_frequencies";
    if (dynamic_cast<const ConstraintViolation*>(&e)) return "constraint_violation";
    if (dynamic_cast<const NumericError*>(&e)) return "numeric_error";
    if (dynamic_cast<const ValidationError*>(&e)) return "validation_error";
    return "error";
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

SweepResult stability_sweep(const SweepSpec& spec, const DomainConfig& config) {
    config.validate();
    spec.inversion.validate();
    if (spec.levels.empty() || spec.seeds.empty()) throw ValidationError("sweep needs noise levels and seeds");
    if (!std::is_sorted(spec.levels.begin(), spec.levels.end()) || spec.levels.front() < 0.0)
        throw ValidationError("noise levels must be nonnegative and ascending");
    if (spec.require_design && (spec.levels.size() < 4 || spec.seeds.size() < 3))
        throw ValidationError("a stability sweep needs at least 4 levels and 3 seeds");
    spec.profile.validate(spec.omegas);

    const ForwardProblem problem(spec.truth, config, spec.resolution);
    const NeumannDatum f = make_current(spec.current, problem.outer());
    const CauchyData truth_u0 = problem.solve_u0(f);
    const MultiFreqData clean = synthesize_clean(problem, f, spec.profile, spec.omegas);

    SweepResult out;
    const std::size_t ns = spec.seeds.size();
    out.rows.resize(spec.levels.size() * ns);
    parallel_for(out.rows.size(), [&](std::size_t idx) {
        SweepRow& row = out.rows[idx];
        row.level = spec.levels[idx / ns];
        row.seed = spec.seeds[idx % ns];
        const MultiFreqData noisy = add_noise(clean, row.level, row.seed);
        row.eps_measured = (noisy.voltages - clean.voltages).cwiseAbs().maxCoeff();
        row.u0_error = row.sym_diff = std::numeric_limits<double>::quiet_NaN();
        try {
            const RationalModel model = fit_rational(noisy, config, spec.fit);
            CauchyData extracted = extract_u0(model, config.k0);
            extracted.theta = problem.outer().params;
            extracted.f = f.values;
            row.u0_error = (extracted.u0 - truth_u0.u0).cwiseAbs().maxCoeff();
            try {
                row.sym_diff = symmetric_difference(invert(extracted, spec.inversion, config).shape, spec.truth);
            } catch (const InversionDiverged& e) {
                row.sym_diff = symmetric_difference(e.best().shape, spec.truth);
                row.status = "diverged";
            }
        } catch (const Error& e) {
            row.status = status_of(e);
        }
    });

    std::vector<double> hx_log, hx_holder, hy;
    for (std::size_t l = 0; l < spec.levels.size(); ++l) {
        std::vector<double> eps, sd, ue;
        for (std::size_t s = 0; s < ns; ++s) {
            const SweepRow& row = out.rows[l * ns + s];
            eps.push_back(row.eps_measured);
            if (std::isfinite(row.sym_diff)) sd.push_back(row.sym_diff);
            if (std::isfinite(row.u0_error)) ue.push_back(row.u0_error);
        }
        out.levels.push_back(spec.levels[l]);
        out.median_eps.push_back(median(eps));
        out.median_sym_diff.push_back(median(sd));
        out.median_u0_error.push_back(median(ue));
        const double e = out.median_eps.back(), y = out.median_sym_diff.back();
        if (e > 0.0 && e < 1.0 && y > 0.0 && std::isfinite(y)) {
            hx_holder.push_back(std::log(e));
            hx_log.push_back(std::log(1.0 / std::log(1.0 / e)));
            hy.push_back(std::log(y));
        }
    }
    out.holder = fit_line(hx_holder, hy);
    out.logarithmic = fit_line(hx_log, hy);
    return out;
}

} // namespace mfeit
