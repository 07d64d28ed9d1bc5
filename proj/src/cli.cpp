#include "szego/cli.hpp"

#include "szego/domain.hpp"
#include "szego/errors.hpp"
#include "szego/geometry.hpp"
#include "szego/normalize.hpp"
#include "szego/parallel.hpp"
#include "szego/szego.hpp"
#include "szego/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>

namespace szego::cli {
namespace {

using json = nlohmann::ordered_json;

const std::vector<std::string> domain_names{"heisenberg",          "parabolic-tube",    "sharpness-tube",
                                            "smoothed-polynomial", "h3-counterexample", "custom"};

// Every option of every subcommand; each subcommand owns one instance.
struct Settings {
    std::string domain;
    std::string weight_file;
    int m = 0;  // 0: domain default
    std::string config;
    std::string out;
    std::string format = "csv";
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_intervals = 4000;

    int grid_n = 3;
    double half_width = 2.0;
    int directions = 64;
    int ck_order = 2;
    int h3_max_exponent = 10;
    int angular_panels = 64;
    UftThresholds thresholds;

    int kappa = 0;
    std::string sigma = "0,0";
    double fd_step = 1e-3;

    int pairs = 8;
    std::uint64_t seed = 1;
    double tau = 1.0;
    double box = 1.0;
    double nu = 0.0;
    std::string twist = "exact";

    std::string a = "0,0,0";
    std::string b = "0,0,0";
    double eps = 1.0;
    std::string quantity = "szego";
    int k = 0;
    double lift_a = 0.0;
    double lift_b = 0.0;
    std::string n_range = "1..6";
    double h = 1e-3;
    double tol = 5e-3;
    double constant = 10.0;

    QuadratureConfig quad() const {
        QuadratureConfig q{abs_tol, rel_tol, 40, 40.0, max_intervals};
        q.validate();
        return q;
    }
};

struct Report {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    json summary = json::object();
    std::string line;
};

struct Domain {
    std::string name;
    std::optional<Weight> weight;
    std::optional<Potential> potential;
    std::optional<TubeProfile> profile;
    int default_m = 2;
};

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

template <class T>
bool parse_exact(std::string_view text, T& value) {
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, value);
    return res.ec == std::errc{} && res.ptr == end;
}

std::vector<double> parse_numbers(const std::string& key, const std::string& text, std::size_t count) {
    std::vector<double> v;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = text.find(',', start);
        const std::string_view item(text.data() + start,
                                    (comma == std::string::npos ? text.size() : comma) - start);
        double x = 0.0;
        if (!parse_exact(item, x) || !std::isfinite(x))
            throw InvalidArgument("--" + key + ": '" + text + "' is not a comma-separated list of numbers");
        v.push_back(x);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (v.size() != count)
        throw InvalidArgument("--" + key + ": expected " + std::to_string(count) + " numbers, got '" + text + "'");
    return v;
}

BoundaryPoint parse_point(const std::string& key, const std::string& text) {
    const auto v = parse_numbers(key, text, 3);
    return {{v[0], v[1]}, v[2]};
}

std::pair<int, int> parse_range(const std::string& text) {
    const std::size_t dots = text.find("..");
    int lo = 0, hi = 0;
    const bool ok = dots == std::string::npos
                        ? parse_exact(std::string_view(text), lo) && (hi = lo, true)
                        : parse_exact(std::string_view(text).substr(0, dots), lo) &&
                              parse_exact(std::string_view(text).substr(dots + 2), hi);
    if (!ok || lo > hi) throw InvalidArgument("--n: expected lo..hi with lo <= hi, got '" + text + "'");
    return {lo, hi};
}

json typed_value(const std::string& text) {
    long long i = 0;
    if (parse_exact(std::string_view(text), i)) return i;
    double d = 0.0;
    if (parse_exact(std::string_view(text), d) && std::isfinite(d)) return d;
    return text;
}

// Values from a JSON config file fill every option not given on the command line.
void apply_config_file(CLI::App& sub, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("--config: cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidArgument("--config: " + std::string(e.what()));
    }
    if (!j.is_object()) throw InvalidArgument("--config: top level must be an object");
    for (const auto& [key, val] : j.items()) {
        CLI::Option* opt = key == "config" || key == "help" ? nullptr : sub.get_option_no_throw("--" + key);
        if (!opt) throw InvalidArgument("config: unknown key '" + key + "'");
        if (opt->count() > 0) continue;
        std::string text;
        auto scalar = [&](const json& v) {
            if (v.is_string()) return v.get<std::string>();
            if (v.is_number() || v.is_boolean()) return v.dump();
            throw InvalidArgument("config key '" + key + "': unsupported value " + v.dump());
        };
        if (val.is_array()) {
            for (std::size_t i = 0; i < val.size(); ++i) text += (i ? "," : "") + scalar(val[i]);
        } else {
            text = scalar(val);
        }
        try {
            opt->add_result(text);
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw InvalidArgument("config key '" + key + "': " + e.what());
        }
    }
}

json resolved_config(const CLI::App& sub) {
    json cfg = json::object();
    for (const CLI::Option* opt : sub.get_options()) {
        const std::string name = opt->get_single_name();
        if (name == "help" || name == "config") continue;
        cfg[name] = typed_value(opt->count() > 0 ? opt->results().back() : opt->get_default_str());
    }
    return cfg;
}

Weight load_weight_file(const std::string& path) {
    if (path.empty()) throw InvalidArgument("--weight-file: required for --domain custom");
    std::ifstream in(path);
    if (!in) throw InvalidArgument("--weight-file: cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidArgument("--weight-file: " + std::string(e.what()));
    }
    if (!j.is_object() || !j.contains("terms")) throw InvalidArgument("--weight-file: expected an object with 'terms'");
    bool smoothed = false;
    std::vector<PolyTerm> terms;
    for (const auto& [key, val] : j.items()) {
        if (key == "name") continue;
        if (key == "smoothed") {
            if (!val.is_boolean()) throw InvalidArgument("--weight-file: 'smoothed' must be a boolean");
            smoothed = val.get<bool>();
        } else if (key == "terms") {
            if (!val.is_array()) throw InvalidArgument("--weight-file: 'terms' must be an array");
            for (const auto& t : val) {
                if (!t.is_array() || t.size() != 3 || !t[0].is_number_integer() || !t[1].is_number_integer() ||
                    !t[2].is_number())
                    throw InvalidArgument("--weight-file: each term must be [p, q, c], got " + t.dump());
                terms.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<double>()});
            }
        } else {
            throw InvalidArgument("--weight-file: unknown key '" + key + "'");
        }
    }
    Weight w = make_polynomial_weight(std::move(terms));
    return smoothed ? make_smoothed_polynomial(w) : w;
}

Domain load_domain(const Settings& s) {
    Domain d;
    d.name = s.domain;
    if (s.domain == "heisenberg") {
        auto [w, p] = make_heisenberg();
        d.weight = w;
        d.potential = p;
    } else if (s.domain == "parabolic-tube" || s.domain == "sharpness-tube") {
        d.profile = s.domain == "parabolic-tube" ? make_parabolic_tube() : make_sharpness_tube();
        d.weight = d.profile->weight();
        d.potential = d.profile->potential();
    } else if (s.domain == "smoothed-polynomial") {
        d.weight = make_smoothed_polynomial(make_quartic_laplacian());
        d.default_m = 4;
    } else if (s.domain == "h3-counterexample") {
        d.weight = make_h3_counterexample();
    } else {
        d.weight = load_weight_file(s.weight_file);
    }
    return d;
}

const TubeProfile& require_tube(const Domain& d) {
    if (!d.profile) throw InvalidArgument("--domain: '" + d.name + "' is not a tube domain");
    return *d.profile;
}

Potential domain_potential(const Domain& d, const QuadratureConfig& q) {
    if (d.potential) return *d.potential;
    PotentialOptions opt;
    opt.quad = q;
    return build_potential(*d.weight, opt);
}

std::vector<Complex> grid_points(double half_width, int n) {
    std::vector<Complex> pts;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            auto coord = [&](int k) { return n == 1 ? 0.0 : -half_width + 2.0 * half_width * k / (n - 1); };
            pts.emplace_back(coord(j), coord(i));
        }
    return pts;
}

const char* verdict(bool ok) { return ok ? "pass" : "fail"; }

Report cmd_verify_uft(const Settings& s, const Domain& d, int m) {
    UftGrid g = UftGrid::box(s.half_width, s.grid_n);
    g.directions = s.directions;
    g.ck_order = s.ck_order;
    g.h3_max_exponent = s.h3_max_exponent;
    g.angular_panels = s.angular_panels;
    const UftReport rep = verify_uft(*d.weight, m, g, s.thresholds, s.quad());

    Report r;
    r.summary["m"] = rep.m;
    r.summary["h1_infimum"] = rep.h1_infimum;
    r.summary["h1_argmin"] = {rep.h1_argmin.real(), rep.h1_argmin.imag()};
    r.summary["ck_norms"] = rep.ck_norms;
    r.summary["h3_supremum"] = rep.h3_supremum;
    r.summary["h3_log_slope"] = rep.h3_log_slope;
    r.summary["h3_radii"] = rep.h3_radii;
    r.summary["h3_curve"] = rep.h3_curve;
    r.summary["grid"] = {{"n", s.grid_n},
                         {"half_width", s.half_width},
                         {"centers", rep.grid.centers.size()},
                         {"directions", rep.grid.directions},
                         {"ck_order", rep.grid.ck_order},
                         {"h3_max_exponent", rep.grid.h3_max_exponent},
                         {"angular_panels", rep.grid.angular_panels}};
    r.summary["thresholds"] = {{"c1_min", rep.thresholds.c1_min},
                               {"ck_max", rep.thresholds.ck_max},
                               {"c2_max", rep.thresholds.c2_max},
                               {"h3_log_slope_max", rep.thresholds.h3_log_slope_max}};
    r.summary["verdicts"] = {{"h1", rep.verdicts.h1}, {"h2", rep.verdicts.h2}, {"h3", rep.verdicts.h3}};
    r.columns = {"radius", "h3_sup"};
    for (std::size_t i = 0; i < rep.h3_radii.size(); ++i) r.rows.push_back({rep.h3_radii[i], rep.h3_curve[i]});
    r.line = "verify-uft " + d.name + ": H1 " + verdict(rep.verdicts.h1) + ", H2 " + verdict(rep.verdicts.h2) +
             ", H3 " + verdict(rep.verdicts.h3);
    return r;
}

Report cmd_potential(const Settings& s, const Domain& d) {
    if (!(s.fd_step > 0.0)) throw InvalidArgument("--fd-step: must be positive");
    Potential p = domain_potential(d, s.quad());
    if (s.kappa != 0) {
        const auto sv = parse_numbers("sigma", s.sigma, 2);
        p = normalize_potential(p, {sv[0], sv[1]}, s.kappa).as_potential();
    }
    const auto pts = grid_points(s.half_width, s.grid_n);
    auto rows = parallel_map(pts.size(), [&](std::size_t i) {
        const Complex z = pts[i];
        const Complex g = p.grad_z(z);
        const double lap = fd_laplacian([&](Complex u) { return p.eval(u); }, z, s.fd_step);
        return std::vector<double>{z.real(), z.imag(), p.eval(z), g.real(), g.imag(), lap, p.weight().eval(z)};
    });
    Report r;
    r.columns = {"z_re", "z_im", "p", "grad_re", "grad_im", "laplacian", "weight"};
    double worst = 0.0;
    for (const auto& row : rows) worst = std::max(worst, std::abs(row[5] - row[6]));
    r.rows = std::move(rows);
    r.summary["max_laplacian_residual"] = worst;
    r.line = "potential " + d.name + ": " + std::to_string(r.rows.size()) +
             " points, max |laplacian - h| = " + format_number(worst);
    return r;
}

MetricContext metric_context(const Settings& s, const Domain& d, int m) {
    auto ctx = d.profile ? make_tube_context(*d.profile, m)
                         : MetricContext(*d.weight, domain_potential(d, PotentialOptions{}.quad), m);
    if (s.nu != 0.0) {
        if (!(s.nu > 0.0 && s.nu <= 1.0)) throw InvalidArgument("--nu: must lie in (0, 1]");
        ctx.nu = s.nu;
    }
    ctx.quad = s.quad();
    return ctx;
}

Report cmd_metric(const Settings& s, const Domain& d, int m) {
    if (s.pairs < 1) throw InvalidArgument("--pairs: must be at least 1");
    const MetricContext ctx = metric_context(s, d, m);
    const TwistChoice twist = s.twist == "exact" ? TwistChoice::exact_line() : TwistChoice::taylor(s.kappa);
    std::mt19937_64 gen(s.seed);
    std::uniform_real_distribution<double> coord(-s.box, s.box);
    std::vector<std::pair<BoundaryPoint, BoundaryPoint>> pairs;
    for (int i = 0; i < s.pairs; ++i) {
        BoundaryPoint a, b;
        a.z = {coord(gen), coord(gen)};
        a.t = coord(gen);
        b.z = {coord(gen), coord(gen)};
        b.t = coord(gen);
        pairs.emplace_back(a, b);
    }
    Report r;
    r.columns = {"z_re", "z_im", "t", "w_re", "w_im", "s", "dist", "ball_volume", "sigma_tau", "rho_tilde"};
    r.rows = parallel_map(pairs.size(), [&](std::size_t i) {
        const auto& [a, b] = pairs[i];
        const double dist = cc_distance(ctx, a, b, twist);
        return std::vector<double>{a.z.real(), a.z.imag(), a.t, b.z.real(), b.z.imag(), b.t, dist,
                                   dist > 0.0 ? ball_volume(ctx, a, dist) : 0.0, sigma_tau(ctx, b, s.tau),
                                   rho_tilde(ctx, a, b, s.tau)};
    });
    r.summary["nu"] = ctx.nu;
    r.line = "metric " + d.name + ": " + std::to_string(r.rows.size()) + " pairs";
    return r;
}

std::vector<double> point_columns(const BoundaryPoint& a, const BoundaryPoint& b) {
    return {a.z.real(), a.z.imag(), a.t, b.z.real(), b.z.imag(), b.t};
}

const std::vector<std::string> pair_columns{"x_a", "y_a", "t_a", "x_b", "y_b", "t_b"};

Report cmd_kernel(const Settings& s, const Domain& d) {
    const KernelQuery query{require_tube(d), parse_point("a", s.a), parse_point("b", s.b), s.eps, s.k,
                            s.lift_a,        s.lift_b,              s.quad()};
    const KernelValue v = s.quantity == "szego"        ? tube_szego_kernel(query)
                          : s.quantity == "derivative" ? tube_szego_derivative(query)
                                                       : bergman_kernel(query);
    Report r;
    r.columns = pair_columns;
    for (const char* c : {"epsilon", "re", "im", "error_estimate"}) r.columns.push_back(c);
    auto row = point_columns(query.a, query.b);
    for (double x : {s.eps, v.value.real(), v.value.imag(), v.error_estimate}) row.push_back(x);
    r.rows.push_back(row);
    r.summary["inner_integrals"] = v.stats.inner_integrals;
    r.summary["profile_evaluations"] = v.stats.profile_evaluations;
    r.summary["tau_nodes"] = v.stats.tau_nodes;
    r.line = "kernel " + d.name + " " + s.quantity + ": " + format_number(v.value.real()) + " + " +
             format_number(v.value.imag()) + "i";
    return r;
}

Report cmd_sharpness(const Settings& s, const Domain& d) {
    const auto [lo, hi] = parse_range(s.n_range);
    const SharpnessReport rep = sharpness_scan(require_tube(d), s.k, lo, hi, s.eps, s.quad());
    Report r;
    r.columns = {"n", "value", "gap", "distance", "ball", "product"};
    for (const auto& row : rep.rows)
        r.rows.push_back({static_cast<double>(row.n), row.value, row.gap, row.distance, row.ball, row.product});
    r.summary["slope_gap"] = rep.slope_gap;
    r.summary["slope_n"] = rep.slope_n;
    r.summary["min_product"] = rep.min_product;
    r.line = "sharpness " + d.name + ": slope vs gap " + format_number(rep.slope_gap) + ", slope vs n " +
             format_number(rep.slope_n);
    return r;
}

Report cmd_bergman_check(const Settings& s, const Domain& d) {
    if (!(s.h > 0.0)) throw InvalidArgument("--fd-step: must be positive");
    const TubeProfile& tp = require_tube(d);
    const BoundaryPoint a = parse_point("a", s.a), b = parse_point("b", s.b);
    const QuadratureConfig q = s.quad();
    const Complex bk = bergman_kernel({tp, a, b, s.eps, 0, 0.0, 0.0, q}).value;
    const Complex up = tube_szego_kernel({tp, a, b, s.eps, 0, 0.0, s.h, q}).value;
    const Complex down = tube_szego_kernel({tp, a, b, s.eps, 0, 0.0, -s.h, q}).value;
    // 2i d/d conj(w2) acts as -2 d/d Im(w2) on functions of conj(w2).
    const Complex fd = -(up - down) / s.h;
    const double rel = std::abs(bk - fd) / std::abs(bk);
    Report r;
    r.columns = pair_columns;
    for (const char* c : {"epsilon", "bergman_re", "bergman_im", "fd_re", "fd_im", "rel_diff"}) r.columns.push_back(c);
    auto row = point_columns(a, b);
    for (double x : {s.eps, bk.real(), bk.imag(), fd.real(), fd.imag(), rel}) row.push_back(x);
    r.rows.push_back(row);
    r.summary["rel_diff"] = rel;
    r.summary["pass"] = rel <= s.tol;
    r.line = "bergman-check " + d.name + ": relative difference " + format_number(rel) + " (" +
             verdict(rel <= s.tol) + ")";
    return r;
}

Report cmd_envelope(const Settings& s, const Domain& d) {
    if (s.pairs < 1) throw InvalidArgument("--pairs: must be at least 1");
    const auto pairs = sample_envelope_pairs(static_cast<std::size_t>(s.pairs), s.seed);
    const EnvelopeReport rep = growth_envelope(require_tube(d), pairs, s.eps, s.constant, s.quad());
    Report r;
    r.columns = {"i"};
    r.columns.insert(r.columns.end(), pair_columns.begin(), pair_columns.end());
    r.columns.push_back("ratio");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        auto row = point_columns(pairs[i].a, pairs[i].b);
        row.insert(row.begin(), static_cast<double>(i));
        row.push_back(rep.ratios[i]);
        r.rows.push_back(row);
    }
    r.summary["max_ratio"] = rep.max_ratio;
    r.summary["argmax"] = rep.argmax;
    r.summary["pass"] = rep.pass;
    r.line = "envelope " + d.name + ": max ratio " + format_number(rep.max_ratio) + " (" + verdict(rep.pass) + ")";
    return r;
}

void write_csv(std::ostream& os, const std::string& command, const json& config, const Report& r) {
    os << "# szego_lab " << version << '\n';
    os << "# command: " << command << '\n';
    os << "# config: " << config.dump() << '\n';
    for (const auto& [key, val] : r.summary.items()) os << "# " << key << ": " << val.dump() << '\n';
    for (std::size_t i = 0; i < r.columns.size(); ++i) os << (i ? "," : "") << r.columns[i];
    os << '\n';
    for (const auto& row : r.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
        os << '\n';
    }
}

void write_json(std::ostream& os, const std::string& command, const json& config, const Report& r) {
    json j;
    j["version"] = version;
    j["command"] = command;
    j["config"] = config;
    j["summary"] = r.summary;
    j["columns"] = r.columns;
    j["rows"] = r.rows;
    os << j.dump(2) << '\n';
}

void add_common(CLI::App* sub, Settings& s, const std::string& domain, bool with_m) {
    s.domain = domain;
    sub->add_option("--domain", s.domain, "Model domain")->check(CLI::IsMember(domain_names));
    sub->add_option("--weight-file", s.weight_file, "JSON polynomial weight for --domain custom");
    if (with_m) sub->add_option("--m", s.m, "Type m (0 selects the domain default)")->check(CLI::Range(0, 16));
    sub->add_option("--config", s.config, "JSON file of option values; command-line flags take precedence");
    sub->add_option("--out", s.out, "Output file (default: stdout)");
    sub->add_option("--format", s.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--abs-tol", s.abs_tol, "Absolute quadrature tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--rel-tol", s.rel_tol, "Relative quadrature tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--max-intervals", s.max_intervals, "Quadrature interval budget")->check(CLI::PositiveNumber);
}

void set_quad(Settings& s, const QuadratureConfig& q) {
    s.abs_tol = q.abs_tol;
    s.rel_tol = q.rel_tol;
    s.max_intervals = q.max_intervals;
}

void add_pair_options(CLI::App* sub, Settings& s) {
    sub->add_option("--a", s.a, "First boundary point x,y,t");
    sub->add_option("--b", s.b, "Second boundary point x,y,t");
    sub->add_option("--eps", s.eps, "Regularization epsilon")->check(CLI::PositiveNumber);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Numerical laboratory for Szego kernels of model domains in C^2", "szego_lab"};
    app.option_defaults()->always_capture_default();
    app.set_version_flag("--version", version);
    app.require_subcommand(1);

    std::map<std::string, Settings> settings;

    {
        Settings& s = settings["verify-uft"];
        auto* sub = app.add_subcommand("verify-uft", "Sampled check of the uniform-finite-type hypotheses");
        s.format = "json";
        set_quad(s, {1e-10, 1e-8, 40, 40.0, 4000});
        add_common(sub, s, "heisenberg", true);
        sub->add_option("--grid-n", s.grid_n, "Centers per axis")->check(CLI::Range(1, 1000));
        sub->add_option("--half-width", s.half_width, "Center box half-width")->check(CLI::NonNegativeNumber);
        sub->add_option("--directions", s.directions, "Directions for the derivative sums")->check(CLI::Range(1, 100000));
        sub->add_option("--ck-order", s.ck_order, "Highest derivative order of the C^k norms")->check(CLI::Range(0, 8));
        sub->add_option("--h3-max-exponent", s.h3_max_exponent, "Annulus radii 2^0..2^J")->check(CLI::Range(1, 30));
        sub->add_option("--angular-panels", s.angular_panels, "Angular panels per annulus")->check(CLI::Range(1, 100000));
        sub->add_option("--c1-min", s.thresholds.c1_min, "H1 lower threshold")->check(CLI::NonNegativeNumber);
        sub->add_option("--ck-max", s.thresholds.ck_max, "H2 upper threshold")->check(CLI::PositiveNumber);
        sub->add_option("--c2-max", s.thresholds.c2_max, "H3 supremum threshold")->check(CLI::PositiveNumber);
        sub->add_option("--h3-slope-max", s.thresholds.h3_log_slope_max, "H3 growth-slope threshold")
            ->check(CLI::NonNegativeNumber);
    }
    {
        Settings& s = settings["potential"];
        auto* sub = app.add_subcommand("potential", "Potential, gradient and Laplacian on a grid");
        set_quad(s, PotentialOptions{}.quad);
        s.grid_n = 5;
        add_common(sub, s, "heisenberg", false);
        sub->add_option("--grid-n", s.grid_n, "Points per axis")->check(CLI::Range(1, 1000));
        sub->add_option("--half-width", s.half_width, "Grid half-width")->check(CLI::NonNegativeNumber);
        sub->add_option("--kappa", s.kappa, "Normalization order (0: none)")->check(CLI::Range(0, 12));
        sub->add_option("--sigma", s.sigma, "Normalization center re,im");
        sub->add_option("--fd-step", s.fd_step, "Finite-difference Laplacian step")->check(CLI::PositiveNumber);
    }
    {
        Settings& s = settings["metric"];
        auto* sub = app.add_subcommand("metric", "Distances, ball volumes and scales on sampled pairs");
        set_quad(s, {1e-14, 1e-11, 40, 40.0, 4000});
        s.kappa = 2;
        add_common(sub, s, "heisenberg", true);
        sub->add_option("--pairs", s.pairs, "Number of sampled pairs")->check(CLI::Range(1, 1000000));
        sub->add_option("--seed", s.seed, "Sampling seed");
        sub->add_option("--tau", s.tau, "Scale parameter tau")->check(CLI::PositiveNumber);
        sub->add_option("--box", s.box, "Coordinates are sampled from [-box, box]")->check(CLI::PositiveNumber);
        sub->add_option("--nu", s.nu, "Quasimetric exponent (0: 1/m)")->check(CLI::NonNegativeNumber);
        sub->add_option("--twist", s.twist, "Twist function")->check(CLI::IsMember({"exact", "taylor"}));
        sub->add_option("--kappa", s.kappa, "Taylor order of the twist")->check(CLI::Range(1, 12));
    }
    {
        Settings& s = settings["kernel"];
        auto* sub = app.add_subcommand("kernel", "Tube-domain Szego kernel, derivative or Bergman kernel");
        set_quad(s, kernel_quadrature);
        add_common(sub, s, "parabolic-tube", false);
        add_pair_options(sub, s);
        sub->add_option("--quantity", s.quantity, "Kernel quantity")
            ->check(CLI::IsMember({"szego", "derivative", "bergman"}));
        sub->add_option("--k", s.k, "Tangential derivative order")->check(CLI::Range(0, 32));
        sub->add_option("--lift-a", s.lift_a, "Height of z2 above the boundary");
        sub->add_option("--lift-b", s.lift_b, "Height of w2 above the boundary");
    }
    {
        Settings& s = settings["sharpness"];
        auto* sub = app.add_subcommand("sharpness", "Antipodal kernel decay scan");
        set_quad(s, kernel_quadrature);
        s.k = 1;
        s.eps = 0.01;
        add_common(sub, s, "sharpness-tube", false);
        sub->add_option("--k", s.k, "Tangential derivative order")->check(CLI::Range(1, 32));
        sub->add_option("--n", s.n_range, "Range lo..hi of n");
        sub->add_option("--eps", s.eps, "Regularization epsilon")->check(CLI::PositiveNumber);
    }
    {
        Settings& s = settings["bergman-check"];
        auto* sub = app.add_subcommand("bergman-check", "Bergman kernel against a finite difference of the Szego kernel");
        set_quad(s, kernel_quadrature);
        s.a = "0.3,0.2,0.4";
        s.b = "-0.6,0.5,-0.3";
        add_common(sub, s, "parabolic-tube", false);
        add_pair_options(sub, s);
        sub->add_option("--fd-step", s.h, "Finite-difference step in Im w2")->check(CLI::PositiveNumber);
        sub->add_option("--tol", s.tol, "Relative tolerance of the check")->check(CLI::PositiveNumber);
    }
    {
        Settings& s = settings["envelope"];
        auto* sub = app.add_subcommand("envelope", "Growth envelope |S| |B| over sampled pairs");
        set_quad(s, kernel_quadrature);
        s.pairs = 50;
        add_common(sub, s, "parabolic-tube", false);
        sub->add_option("--pairs", s.pairs, "Number of sampled pairs")->check(CLI::Range(1, 1000000));
        sub->add_option("--seed", s.seed, "Sampling seed");
        sub->add_option("--eps", s.eps, "Regularization epsilon")->check(CLI::PositiveNumber);
        sub->add_option("--constant", s.constant, "Pass threshold of the envelope ratio")->check(CLI::PositiveNumber);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (app.exit(e, out, err) == 0) return 0;
        err << app.help();
        return 1;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    Settings& s = settings.at(command);
    try {
        if (!s.config.empty()) apply_config_file(*sub, s.config);
        const Domain d = load_domain(s);
        const int m = s.m != 0 ? s.m : d.default_m;
        json config = resolved_config(*sub);
        if (config.contains("m")) config["m"] = m;

        Report r;
        if (command == "verify-uft") r = cmd_verify_uft(s, d, m);
        else if (command == "potential") r = cmd_potential(s, d);
        else if (command == "metric") r = cmd_metric(s, d, m);
        else if (command == "kernel") r = cmd_kernel(s, d);
        else if (command == "sharpness") r = cmd_sharpness(s, d);
        else if (command == "bergman-check") r = cmd_bergman_check(s, d);
        else r = cmd_envelope(s, d);

        std::ofstream file;
        if (!s.out.empty()) {
            file.open(s.out);
            if (!file) throw InvalidArgument("--out: cannot open '" + s.out + "'");
        }
        std::ostream& os = s.out.empty() ? out : file;
        if (s.format == "json") write_json(os, command, config, r);
        else write_csv(os, command, config, r);
        os.flush();
        if (!os) throw InvalidArgument("--out: write failed");
        (s.out.empty() ? err : out) << r.line << '\n';
        return 0;
    } catch (const NumericalError& e) {
        err << "szego_lab: numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "szego_lab: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace szego::cli
