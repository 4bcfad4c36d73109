#include "mfeit/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <variant>
#include <vector>

namespace mfeit::io {

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInput("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << bytes;
    if (!out) throw Error("write failed: " + path.string());
}

json parse_json(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // the message already names line and column
        throw ValidationError(origin + ": " + e.what());
    }
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ValidationError(where + ": unknown key '" + key + "'");
    }
}

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(where + "." + key + ": " + e.what());
    }
}

Eigen::VectorXd vector_or(const json& j, const char* key, Eigen::VectorXd fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    const auto v = get_or<std::vector<double>>(j, key, {}, where);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

json complex_pair(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from(const json& j) {
    if (!j.is_array() || j.size() != 2) throw ValidationError("complex numbers are [re, im] pairs");
    return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_number(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ValidationError("malformed number '" + s + "'");
    }
    if (used != s.size()) throw ValidationError("malformed number '" + s + "'");
    return v;
}

std::vector<std::vector<double>> parse_table(const std::string& text, std::vector<std::string>* header) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty CSV");
    *header = split(line, ',');
    std::vector<std::vector<double>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != header->size())
            throw ValidationError("CSV line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(header->size()) + " columns");
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(parse_number(c));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

json to_json(const StarShape& s) { return {{"cos", to_std(s.cos_coeffs())}, {"sin", to_std(s.sin_coeffs())}}; }

StarShape shape_from_json(const json& j) {
    check_keys(j, {"cos", "sin"}, "shape");
    const Eigen::VectorXd c = vector_or(j, "cos", {}, "shape");
    if (c.size() == 0) throw ValidationError("shape.cos needs at least a0");
    return StarShape(c, vector_or(j, "sin", {}, "shape"));
}

json to_json(const DomainConfig& c) {
    return {{"b0", c.b0}, {"b1", c.b1}, {"delta", c.delta}, {"m", c.m}, {"k0", c.k0}};
}

DomainConfig domain_from_json(const json& j) {
    check_keys(j, {"b0", "b1", "delta", "m", "k0"}, "domain");
    DomainConfig c;
    c.b0 = get_or(j, "b0", c.b0, "domain");
    c.b1 = get_or(j, "b1", c.b1, "domain");
    c.delta = get_or(j, "delta", c.delta, "domain");
    c.m = get_or(j, "m", c.m, "domain");
    c.k0 = get_or(j, "k0", c.k0, "domain");
    c.validate();
    return c;
}

json to_json(const CurrentSpec& c) {
    const auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    return json{{"cos", vec(c.cos)}, {"sin", vec(c.sin)}};
}

CurrentSpec current_from_json(const json& j) {
    check_keys(j, {"cos", "sin"}, "current");
    CurrentSpec c;
    c.cos = vector_or(j, "cos", c.cos, "current");
    c.sin = vector_or(j, "sin", c.sin, "current");
    return c;
}

Resolution resolution_from_json(const json& j) {
    check_keys(j, {"inner", "outer"}, "resolution");
    Resolution r;
    r.inner = get_or(j, "inner", r.inner, "resolution");
    r.outer = get_or(j, "outer", r.outer, "resolution");
    return r;
}

SpectrumOptions spectrum_options_from_json(const json& j) {
    check_keys(j, {"n_modes", "tail"}, "spectrum");
    SpectrumOptions o;
    o.n_modes = get_or<Eigen::Index>(j, "n_modes", o.n_modes, "spectrum");
    o.tail = get_or(j, "tail", o.tail, "spectrum");
    if (o.n_modes < 1 || !(o.tail >= 0.0)) throw ValidationError("spectrum: n_modes >= 1 and tail >= 0 required");
    return o;
}

json to_json(const FrequencyProfile& p) {
    if (const auto* d = std::get_if<DebyeProfile>(&p.model()))
        return json{{"type", "debye"}, {"k_inf", d->k_inf}, {"k_s", d->k_s}, {"tau", d->tau}};
    const auto& a = std::get<AffineProfile>(p.model());
    return json{{"type", "affine"}, {"k_r", a.k_r}, {"c", a.c}};
}

FrequencyProfile profile_from_json(const json& j) {
    const auto type = get_or<std::string>(j, "type", "debye", "profile");
    if (type == "debye") {
        check_keys(j, {"type", "k_inf", "k_s", "tau"}, "profile");
        DebyeProfile p;
        p.k_inf = get_or(j, "k_inf", p.k_inf, "profile");
        p.k_s = get_or(j, "k_s", p.k_s, "profile");
        p.tau = get_or(j, "tau", p.tau, "profile");
        return p;
    }
    if (type == "affine") {
        check_keys(j, {"type", "k_r", "c"}, "profile");
        AffineProfile p;
        p.k_r = get_or(j, "k_r", p.k_r, "profile");
        p.c = get_or(j, "c", p.c, "profile");
        return p;
    }
    throw ValidationError("profile.type must be 'debye' or 'affine'");
}

Eigen::VectorXd omegas_from_json(const json& j) {
    if (j.is_array()) return vector_or(json{{"omega", j}}, "omega", {}, "omega");
    check_keys(j, {"logspace"}, "omega");
    const auto spec = get_or<std::vector<double>>(j, "logspace", {}, "omega");
    if (spec.size() != 3 || spec[2] < 1 || spec[2] != std::floor(spec[2]))
        throw ValidationError("omega.logspace is [lo, hi, count]");
    const auto n = static_cast<Eigen::Index>(spec[2]);
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double e = n == 1 ? spec[0] : spec[0] + (spec[1] - spec[0]) * static_cast<double>(i) / static_cast<double>(n - 1);
        out[i] = std::pow(10.0, e);
    }
    return out;
}

FitOptions fit_options_from_json(const json& j) {
    check_keys(j, {"max_poles", "tol", "noise_factor", "reference_points"}, "fit");
    FitOptions o;
    o.max_poles = get_or<Eigen::Index>(j, "max_poles", o.max_poles, "fit");
    o.tol = get_or(j, "tol", o.tol, "fit");
    o.noise_factor = get_or(j, "noise_factor", o.noise_factor, "fit");
    o.reference_points = get_or<Eigen::Index>(j, "reference_points", o.reference_points, "fit");
    return o;
}

InversionSettings inversion_from_json(const json& j) {
    check_keys(j,
               {"n_modes", "alpha", "max_iter", "damping", "damping_up", "damping_down", "max_backtracks", "gtol",
                "ftol", "fd_step", "margin", "inner_nodes", "initial"},
               "inversion");
    InversionSettings s;
    const std::string w = "inversion";
    s.n_modes = get_or(j, "n_modes", s.n_modes, w);
    s.alpha = get_or(j, "alpha", s.alpha, w);
    s.max_iter = get_or(j, "max_iter", s.max_iter, w);
    s.damping = get_or(j, "damping", s.damping, w);
    s.damping_up = get_or(j, "damping_up", s.damping_up, w);
    s.damping_down = get_or(j, "damping_down", s.damping_down, w);
    s.max_backtracks = get_or(j, "max_backtracks", s.max_backtracks, w);
    s.gtol = get_or(j, "gtol", s.gtol, w);
    s.ftol = get_or(j, "ftol", s.ftol, w);
    s.fd_step = get_or(j, "fd_step", s.fd_step, w);
    s.margin = get_or(j, "margin", s.margin, w);
    s.inner_nodes = get_or(j, "inner_nodes", s.inner_nodes, w);
    if (j.contains("initial")) s.initial = shape_from_json(j.at("initial"));
    s.validate();
    return s;
}

json to_json(const RationalModel& m) {
    json poles = json::array(), alpha = json::array(), residues = json::array();
    for (Eigen::Index n = 0; n < m.n_poles(); ++n) poles.push_back(complex_pair(m.poles[n]));
    for (Eigen::Index i = 0; i < m.n_points(); ++i) {
        alpha.push_back(complex_pair(m.alpha_inf[i]));
        json row = json::array();
        for (Eigen::Index n = 0; n < m.n_poles(); ++n) row.push_back(complex_pair(m.residues(i, n)));
        residues.push_back(std::move(row));
    }
    return {{"poles", poles},       {"alpha_inf", alpha},     {"residues", residues},
            {"scale", m.scale},     {"abs_tol", m.abs_tol},   {"residual", m.residual}};
}

RationalModel model_from_json(const json& j) {
    check_keys(j, {"poles", "alpha_inf", "residues", "scale", "abs_tol", "residual"}, "model");
    RationalModel m;
    const json& poles = j.at("poles");
    const json& alpha = j.at("alpha_inf");
    const json& res = j.at("residues");
    m.poles.resize(static_cast<Eigen::Index>(poles.size()));
    m.alpha_inf.resize(static_cast<Eigen::Index>(alpha.size()));
    m.residues.resize(m.alpha_inf.size(), m.poles.size());
    for (Eigen::Index n = 0; n < m.poles.size(); ++n) m.poles[n] = complex_from(poles[static_cast<std::size_t>(n)]);
    if (res.size() != alpha.size()) throw ValidationError("model: residues need one row per point");
    for (Eigen::Index i = 0; i < m.alpha_inf.size(); ++i) {
        const auto ui = static_cast<std::size_t>(i);
        m.alpha_inf[i] = complex_from(alpha[ui]);
        if (res[ui].size() != poles.size()) throw ValidationError("model: residue row has the wrong length");
        for (Eigen::Index n = 0; n < m.poles.size(); ++n)
            m.residues(i, n) = complex_from(res[ui][static_cast<std::size_t>(n)]);
    }
    m.scale = get_or(j, "scale", 1.0, "model");
    m.abs_tol = get_or(j, "abs_tol", 0.0, "model");
    m.residual = get_or(j, "residual", 0.0, "model");
    return m;
}

std::string dataset_csv(const MultiFreqData& data) {
    std::string out = "omega,re_k,im_k";
    for (Eigen::Index i = 0; i < data.n_points(); ++i)
        out += ",re_u" + std::to_string(i) + ",im_u" + std::to_string(i);
    out += '\n';
    for (Eigen::Index j = 0; j < data.n_frequencies(); ++j) {
        out += format_double(data.omega[j]) + ',' + format_double(data.k[j].real()) + ',' +
               format_double(data.k[j].imag());
        for (Eigen::Index i = 0; i < data.n_points(); ++i)
            out += ',' + format_double(data.voltages(i, j).real()) + ',' + format_double(data.voltages(i, j).imag());
        out += '\n';
    }
    return out;
}

MultiFreqData parse_dataset_csv(const std::string& text) {
    std::vector<std::string> header;
    const auto rows = parse_table(text, &header);
    if (header.size() < 5 || (header.size() - 3) % 2 != 0 || header[0] != "omega")
        throw ValidationError("dataset CSV: expected omega,re_k,im_k,re_u0,im_u0,...");
    const auto npts = static_cast<Eigen::Index>((header.size() - 3) / 2);
    const auto nf = static_cast<Eigen::Index>(rows.size());
    MultiFreqData d;
    d.omega.resize(nf);
    d.k.resize(nf);
    d.voltages.resize(npts, nf);
    for (Eigen::Index j = 0; j < nf; ++j) {
        const auto& r = rows[static_cast<std::size_t>(j)];
        d.omega[j] = r[0];
        d.k[j] = {r[1], r[2]};
        for (Eigen::Index i = 0; i < npts; ++i)
            d.voltages(i, j) = {r[static_cast<std::size_t>(3 + 2 * i)], r[static_cast<std::size_t>(4 + 2 * i)]};
    }
    return d;
}

std::string cauchy_csv(const CauchyData& data) {
    std::string out = "theta,f,u0\n";
    for (Eigen::Index i = 0; i < data.u0.size(); ++i) {
        const double f = i < data.f.size() ? data.f[i] : std::numeric_limits<double>::quiet_NaN();
        out += format_double(data.theta[i]) + ',' + format_double(f) + ',' + format_double(data.u0[i]) + '\n';
    }
    return out;
}

CauchyData parse_cauchy_csv(const std::string& text) {
    std::vector<std::string> header;
    const auto rows = parse_table(text, &header);
    if (header != std::vector<std::string>{"theta", "f", "u0"}) throw ValidationError("Cauchy CSV: expected theta,f,u0");
    CauchyData c;
    const auto n = static_cast<Eigen::Index>(rows.size());
    c.theta.resize(n);
    c.f.resize(n);
    c.u0.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        c.theta[i] = r[0], c.f[i] = r[1], c.u0[i] = r[2];
    }
    return c;
}

} // namespace mfeit::io
