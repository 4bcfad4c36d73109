#include "mfeit/cli.hpp"

#include "mfeit/io.hpp"
#include "mfeit/parallel.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace mfeit {

namespace {

using io::json;

constexpr const char* version = "0.1.0";

struct Experiment {
    fs::path base; ///< directory of the config file, for relative input paths
    std::uint64_t hash = 0;
    json raw;
    DomainConfig domain;
    std::optional<StarShape> shape;
    CurrentSpec current;
    Resolution resolution;
    SpectrumOptions spectrum;
    std::optional<FrequencyProfile> profile;
    std::optional<Eigen::VectorXd> omegas;
    std::vector<Complex> contrasts;
    double synth_eta = 0.0;
    std::uint64_t synth_seed = 1;
    FitOptions fit;
    InversionSettings inversion;
    std::vector<double> levels;
    std::vector<std::uint64_t> seeds;
    bool require_design = false; // the CLI runs degenerate sweeps unless asked
    std::optional<fs::path> dataset, cauchy;
};

Experiment load_experiment(const fs::path& path) {
    const std::string text = io::read_file(path);
    Experiment e;
    e.base = path.parent_path();
    e.hash = io::fnv1a64(text);
    e.raw = io::parse_json(text, path.string());
    const json& j = e.raw;
    io::check_keys(j,
                   {"domain", "shape", "current", "resolution", "spectrum", "profile", "omega", "contrasts", "synth",
                    "fit", "inversion", "sweep", "inputs"},
                   "config");
    if (j.contains("domain")) e.domain = io::domain_from_json(j["domain"]);
    e.domain.validate();
    if (j.contains("shape")) {
        e.shape = io::shape_from_json(j["shape"]);
        validate_shape(*e.shape, e.domain);
    }
    if (j.contains("current")) e.current = io::current_from_json(j["current"]);
    if (j.contains("resolution")) e.resolution = io::resolution_from_json(j["resolution"]);
    if (j.contains("spectrum")) e.spectrum = io::spectrum_options_from_json(j["spectrum"]);
    if (j.contains("profile")) e.profile = io::profile_from_json(j["profile"]);
    if (j.contains("omega")) e.omegas = io::omegas_from_json(j["omega"]);
    if (e.profile && e.omegas) e.profile->validate(*e.omegas);
    if (j.contains("contrasts")) {
        for (const auto& c : j["contrasts"]) {
            if (!c.is_array() || c.size() != 2) throw ValidationError("contrasts are [re, im] pairs");
            const Complex k(c[0].get<double>(), c[1].get<double>());
            if (k.imag() == 0.0 && k.real() <= 0.0) throw ValidationError("contrast on the closed negative real axis");
            e.contrasts.push_back(k);
        }
    }
    if (j.contains("synth")) {
        io::check_keys(j["synth"], {"eta", "seed"}, "synth");
        e.synth_eta = j["synth"].value("eta", 0.0);
        e.synth_seed = j["synth"].value("seed", std::uint64_t{1});
        if (!(e.synth_eta >= 0.0)) throw ValidationError("synth.eta must be nonnegative");
    }
    if (j.contains("fit")) e.fit = io::fit_options_from_json(j["fit"]);
    if (j.contains("inversion")) e.inversion = io::inversion_from_json(j["inversion"]);
    if (j.contains("sweep")) {
        io::check_keys(j["sweep"], {"levels", "seeds", "require_design"}, "sweep");
        e.levels = j["sweep"].value("levels", std::vector<double>{});
        e.seeds = j["sweep"].value("seeds", std::vector<std::uint64_t>{});
        e.require_design = j["sweep"].value("require_design", false);
    }
    if (j.contains("inputs")) {
        io::check_keys(j["inputs"], {"dataset", "cauchy"}, "inputs");
        if (j["inputs"].contains("dataset")) e.dataset = e.base / j["inputs"]["dataset"].get<std::string>();
        if (j["inputs"].contains("cauchy")) e.cauchy = e.base / j["inputs"]["cauchy"].get<std::string>();
    }
    return e;
}

template <typename T>
const T& need(const std::optional<T>& v, const char* what) {
    if (!v) throw ValidationError(std::string("config is missing '") + what + "'");
    return *v;
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json nullable(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

/// Collects outputs, writes them, then the manifest.
class Writer {
  public:
    Writer(fs::path dir, std::string command, const Experiment& e) : dir_(std::move(dir)) {
        manifest_["command"] = std::move(command);
        manifest_["version"] = version;
        manifest_["config_hash"] = io::hex64(e.hash);
        manifest_["inputs"] = json::object();
        manifest_["outputs"] = json::object();
    }
    void input(const std::string& name, const std::string& bytes) {
        manifest_["inputs"][name] = io::hex64(io::fnv1a64(bytes));
    }
    void seeds(const std::vector<std::uint64_t>& s) { manifest_["seeds"] = s; }
    void put(const std::string& name, const std::string& bytes) {
        io::write_file(dir_ / name, bytes);
        manifest_["outputs"][name] = io::hex64(io::fnv1a64(bytes));
    }
    void finish() { io::write_file(dir_ / "manifest.json", dump(manifest_)); }

  private:
    fs::path dir_;
    json manifest_;
};

void cmd_spectrum(const Experiment& e, Writer& w) {
    const StarShape& shape = need(e.shape, "shape");
    const ForwardProblem problem(shape, e.domain, e.resolution);
    const NPSpectrum s = problem.spectrum(e.spectrum);
    json report;
    report["lambda"] = vec_json(s.lambda);
    report["resonances"] = vec_json(s.resonances);
    report["upper"] = vec_json(s.upper_branch());
    report["lower"] = vec_json(s.lower_branch());
    report["bound"] = resonance_bound(shape, e.domain.k0);
    report["class_bound"] = class_resonance_bound(e.domain);
    report["discarded"] = s.discarded;
    report["nodes"] = {{"inner", e.resolution.inner}, {"outer", e.resolution.outer}};
    w.put("spectrum.json", dump(report));

    std::string csv = "theta";
    for (Eigen::Index n = 0; n < s.size(); ++n) csv += ",w" + std::to_string(n + 1);
    csv += '\n';
    for (Eigen::Index i = 0; i < s.outer.size(); ++i) {
        csv += io::format_double(s.outer.params[i]);
        for (Eigen::Index n = 0; n < s.size(); ++n) csv += ',' + io::format_double(s.traces_dOmega(i, n));
        csv += '\n';
    }
    w.put("traces.csv", csv);
}

void cmd_forward(const Experiment& e, Writer& w) {
    const ForwardProblem problem(need(e.shape, "shape"), e.domain, e.resolution);
    const NeumannDatum f = make_current(e.current, problem.outer());
    const CauchyData u0 = problem.solve_u0(f);
    w.put("cauchy.csv", io::cauchy_csv(u0));
    w.put("cauchy.json", dump(json{{"rho", u0.rho}}));

    MultiFreqData d;
    if (e.profile && e.omegas) {
        d = synthesize_clean(problem, f, *e.profile, *e.omegas);
    } else if (!e.contrasts.empty()) {
        const auto nk = static_cast<Eigen::Index>(e.contrasts.size());
        d.omega = Eigen::VectorXd::Constant(nk, std::numeric_limits<double>::quiet_NaN());
        d.k = Eigen::Map<const Eigen::VectorXcd>(e.contrasts.data(), nk);
        d.voltages.resize(problem.outer().size(), nk);
        parallel_for(static_cast<std::size_t>(nk), [&](std::size_t j) {
            const auto jj = static_cast<Eigen::Index>(j);
            d.voltages.col(jj) = problem.solve_direct(f, d.k[jj]);
        });
    } else {
        return;
    }
    w.put("forward.csv", io::dataset_csv(d));
}

void cmd_synth(const Experiment& e, Writer& w) {
    const ForwardProblem problem(need(e.shape, "shape"), e.domain, e.resolution);
    const NeumannDatum f = make_current(e.current, problem.outer());
    const MultiFreqData d =
        synthesize(problem, f, need(e.profile, "profile"), need(e.omegas, "omega"), e.synth_eta, e.synth_seed);
    w.seeds({e.synth_seed});
    w.put("dataset.csv", io::dataset_csv(d));
    w.put("dataset.json", dump(json{{"shape", io::to_json(problem.shape())},
                                    {"current", io::to_json(e.current)},
                                    {"profile", io::to_json(*e.profile)},
                                    {"eta", d.eta},
                                    {"seed", d.seed},
                                    {"n_points", d.n_points()},
                                    {"n_frequencies", d.n_frequencies()}}));
}

void cmd_extract(const Experiment& e, Writer& w) {
    const fs::path& path = need(e.dataset, "inputs.dataset");
    const std::string text = io::read_file(path);
    w.input("dataset", text);
    MultiFreqData d = io::parse_dataset_csv(text);
    CurrentSpec current = e.current;
    fs::path sidecar = path;
    sidecar.replace_extension(".json");
    if (fs::exists(sidecar)) {
        const std::string meta = io::read_file(sidecar);
        w.input("dataset_meta", meta);
        const json m = io::parse_json(meta, sidecar.string());
        d.eta = m.value("eta", 0.0);
        d.seed = m.value("seed", std::uint64_t{0});
        if (m.contains("current")) current = io::current_from_json(m["current"]);
    }
    const RationalModel model = fit_rational(d, e.domain, e.fit);
    w.put("model.json", dump(io::to_json(model)));

    CauchyData c = extract_u0(model, e.domain.k0);
    const BoundaryGrid outer = unit_circle_grid(static_cast<int>(d.n_points()));
    c.theta = outer.params;
    c.f = make_current(current, outer).values;
    w.put("cauchy.csv", io::cauchy_csv(c));
    json meta{{"rho", nullptr}, {"poles", json::array()}};
    const Eigen::VectorXcd p = model.sorted_poles();
    for (Eigen::Index n = 0; n < p.size(); ++n) meta["poles"].push_back({p[n].real(), p[n].imag()});
    w.put("cauchy.json", dump(meta));
}

json inversion_json(const InversionResult& r, const std::optional<StarShape>& reference) {
    static const char* names[] = {"gradient", "stagnation", "max_iterations"};
    json j{{"misfit", r.misfit},
           {"history", r.history},
           {"rho", r.rho},
           {"hit_constraint", r.hit_constraint},
           {"termination", names[static_cast<int>(r.termination)]}};
    if (reference) j["sym_diff"] = symmetric_difference(r.shape, *reference);
    return j;
}

void cmd_invert(const Experiment& e, Writer& w) {
    const fs::path& path = need(e.cauchy, "inputs.cauchy");
    const std::string text = io::read_file(path);
    w.input("cauchy", text);
    const CauchyData data = io::parse_cauchy_csv(text);
    try {
        const InversionResult r = invert(data, e.inversion, e.domain);
        w.put("shape.json", dump(io::to_json(r.shape)));
        w.put("inversion.json", dump(inversion_json(r, e.shape)));
    } catch (const InversionDiverged& d) {
        w.put("shape.json", dump(io::to_json(d.best().shape)));
        json j = inversion_json(d.best(), e.shape);
        j["termination"] = "diverged";
        w.put("inversion.json", dump(j));
        w.finish();
        throw;
    }
}

void cmd_sweep(const Experiment& e, Writer& w) {
    SweepSpec spec;
    spec.truth = need(e.shape, "shape");
    spec.current = e.current;
    spec.profile = need(e.profile, "profile");
    spec.omegas = need(e.omegas, "omega");
    spec.levels = e.levels;
    spec.seeds = e.seeds;
    spec.resolution = e.resolution;
    spec.fit = e.fit;
    spec.inversion = e.inversion;
    spec.require_design = e.require_design;
    const SweepResult r = stability_sweep(spec, e.domain);
    w.seeds(e.seeds);

    std::string csv = "level,eps_measured,seed,u0_error,sym_diff,status\n";
    for (const SweepRow& row : r.rows)
        csv += io::format_double(row.level) + ',' + io::format_double(row.eps_measured) + ',' +
               std::to_string(row.seed) + ',' + io::format_double(row.u0_error) + ',' +
               io::format_double(row.sym_diff) + ',' + row.status + '\n';
    w.put("sweep.csv", csv);

    const auto rate = [](const RateFit& f) {
        return json{{"C", f.valid ? json(std::exp(f.log_c)) : json(nullptr)},
                    {"exponent", f.valid ? json(f.exponent) : json(nullptr)},
                    {"residual", f.valid ? json(f.residual) : json(nullptr)}};
    };
    json levels = json::array();
    for (std::size_t l = 0; l < r.levels.size(); ++l)
        levels.push_back({{"level", r.levels[l]},
                          {"eps", nullable(r.median_eps[l])},
                          {"sym_diff", nullable(r.median_sym_diff[l])},
                          {"u0_error", nullable(r.median_u0_error[l])}});
    w.put("sweep_summary.json", dump(json{{"medians", levels},
                                          {"logarithmic", rate(r.logarithmic)},
                                          {"holder", rate(r.holder)}}));
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multifrequency EIT: spectra, forward solves, extraction and shape inversion"};
    app.name("mfeit");
    std::string command, config, outdir;
    int threads = 0;
    app.add_option("command", command, "spectrum | forward | synth | extract | invert | sweep")
        ->required()
        ->check(CLI::IsMember({"spectrum", "forward", "synth", "extract", "invert", "sweep"}));
    app.add_option("--config", config, "experiment config (JSON)")->required();
    app.add_option("--out", outdir, "output directory")->required();
    app.add_option("--threads", threads, "worker threads (default: MFEIT_THREADS or 1)")->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "mfeit: " << e.what() << "\n";
        return exit_config;
    }

    try {
        if (threads > 0) set_thread_count(threads);
        const Experiment e = load_experiment(config);
        fs::create_directories(outdir);
        Writer w(outdir, command, e);
        if (command == "spectrum") cmd_spectrum(e, w);
        else if (command == "forward") cmd_forward(e, w);
        else if (command == "synth") cmd_synth(e, w);
        else if (command == "extract") cmd_extract(e, w);
        else if (command == "invert") cmd_invert(e, w);
        else cmd_sweep(e, w);
        w.finish();
        return exit_ok;
    } catch (const io::MissingInput& e) {
        err << "mfeit: missing input: " << e.what() << "\n";
        return exit_missing_input;
    } catch (const ValidationError& e) {
        err << "mfeit: invalid configuration: " << e.what() << "\n";
        return exit_config;
    } catch (const nlohmann::json::exception& e) {
        err << "mfeit: invalid configuration: " << e.what() << "\n";
        return exit_config;
    } catch (const NumericError& e) {
        err << "mfeit: numerical failure: " << e.what() << "\n";
        return exit_numeric;
    } catch (const std::exception& e) {
        err << "mfeit: " << e.what() << "\n";
        return exit_failure;
    }
}

} // namespace mfeit
