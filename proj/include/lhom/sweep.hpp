#pragma once

/**
 * @file sweep.hpp
 * @brief Epsilon sweeps of the Poisson and eigenvalue experiments, CSV
 *        output, plot-script generation and the key = value config format.
 */

#include "lhom/cell.hpp"
#include "lhom/discretization.hpp"
#include "lhom/eigen.hpp"
#include "lhom/errors.hpp"
#include "lhom/model.hpp"
#include "lhom/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace lhom {

struct SweepConfig {
    std::string model = "ou_cosine";
    std::vector<double> epsilons{0.4, 0.2, 0.1, 0.05, 0.025};
    double R = 5.0;
    double sigma = 1.0;
    double eta = 1.0;
    int n_pairs = 5;
    std::optional<double> h;  ///< fixed mesh width; h = eps^2 when unset
    std::string rhs = "linear";
    std::string out_dir = ".";
    double tail_tolerance = kExperimentTailTolerance;
};

inline void validate(const SweepConfig& c)
{
    if (c.epsilons.empty()) {
        throw ParameterError("sweep: epsilon list is empty");
    }
    for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
        if (!(c.epsilons[i] > 0.0)) {
            throw ParameterError("sweep: epsilons must be positive");
        }
        if (i > 0 && !(c.epsilons[i] < c.epsilons[i - 1])) {
            throw ParameterError("sweep: epsilons must be strictly decreasing");
        }
    }
    if (!(c.R > 0.0) || !(c.sigma > 0.0) || !(c.eta > 0.0)) {
        throw ParameterError("sweep: radius, sigma and eta must be positive");
    }
    if (c.n_pairs < 1) {
        throw ParameterError("sweep: n_pairs must be >= 1");
    }
    if (c.h && !(*c.h > 0.0)) {
        throw ParameterError("sweep: h must be positive");
    }
}

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::string unquote(const std::string& s)
{
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

inline double parse_double(const std::string& s, const std::string& key)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ParameterError("config: '" + key + "' expects a number, got '" + s + "'");
    }
    if (used != s.size()) {
        throw ParameterError("config: trailing characters in value of '" + key + "'");
    }
    return v;
}

} // namespace detail

/// Applies `key = value` lines on top of `base`. '#' starts a comment.
inline SweepConfig parse_config(std::istream& in, SweepConfig base = {})
{
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = detail::trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParameterError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::unquote(detail::trim(line.substr(eq + 1)));
        if (key == "model") {
            base.model = value;
        } else if (key == "epsilons") {
            base.epsilons.clear();
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                base.epsilons.push_back(detail::parse_double(detail::trim(item), key));
            }
        } else if (key == "radius") {
            base.R = detail::parse_double(value, key);
        } else if (key == "sigma") {
            base.sigma = detail::parse_double(value, key);
        } else if (key == "eta") {
            base.eta = detail::parse_double(value, key);
        } else if (key == "n_pairs") {
            base.n_pairs = static_cast<int>(detail::parse_double(value, key));
        } else if (key == "h") {
            base.h = detail::parse_double(value, key);
        } else if (key == "rhs") {
            base.rhs = value;
        } else if (key == "out_dir") {
            base.out_dir = value;
        } else if (key == "tail_tolerance") {
            base.tail_tolerance = detail::parse_double(value, key);
        } else {
            throw ParameterError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    return base;
}

inline SweepConfig load_config(const std::string& path, SweepConfig base = {})
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file '" + path + "'");
    }
    return parse_config(in, std::move(base));
}

/// One row of an epsilon sweep.
struct ConvergenceRecord {
    double epsilon = 0.0;
    double h = 0.0;
    double poisson_err_l2 = 0.0;
    double poisson_err_h1 = 0.0;
    double corrector_err_h1 = 0.0;
    std::vector<double> eig_gap;
    std::vector<double> eig_err_l2;
    std::vector<double> eig_err_h1;
};

/// Full result for one epsilon, including the diagnostics that do not go into the CSV.
struct SweepPoint {
    ConvergenceRecord record;
    bool ok = true;
    std::string error;
    SpectrumComparison comparison;
    SandwichReport sandwich;
    SpectralInvariants invariants_ms;
    SpectralInvariants invariants_hom;
    PoissonSolution poisson_ms;
    PoissonSolution poisson_hom;
    GridFunction corrector;
};

/// Runs the Poisson and eigenvalue experiments at one epsilon.
inline SweepPoint run_epsilon(const SweepConfig& cfg, double epsilon, const ModelSpec& model,
                              const EffectiveCoefficients& coeffs)
{
    SweepPoint pt;
    pt.record.epsilon = epsilon;
    const double h = cfg.h.value_or(epsilon * epsilon);
    pt.record.h = h;

    DensityOptions dopt;
    dopt.tail_tolerance = cfg.tail_tolerance;
    const DensityPair rho = eval_rho(model, epsilon, cfg.R, dopt);
    const GridPtr grid = build_grid(cfg.R, h);
    pt.record.h = grid->h;
    const OperatorSet ops = build_operators(grid, rho);

    PoissonProblem problem{cfg.eta, make_rhs(cfg.rhs), epsilon, grid};
    pt.poisson_ms = solve_multiscale(problem, rho, &ops);
    problem.epsilon.reset();
    pt.poisson_hom = solve_homogenized(problem, coeffs, rho, &ops);
    pt.corrector = corrector_expansion(pt.poisson_hom.u, coeffs, epsilon);

    const WeightedNorms pe = weighted_norms(pt.poisson_ms.u - pt.poisson_hom.u, ops.mass_hom, ops.stiffness_hom);
    pt.record.poisson_err_l2 = pe.l2;
    pt.record.poisson_err_h1 = pe.h1;
    pt.record.corrector_err_h1 = weighted_norms(pt.poisson_ms.u - pt.corrector, ops.mass_hom, ops.stiffness_hom).h1;

    SubspaceOptions sopt;
    sopt.shift = 1.0;
    const auto ms = solve_spectrum(ops.stiffness_ms, ops.mass_ms, model.sigma, cfg.n_pairs, sopt);
    const auto hom = solve_spectrum(ops.stiffness_hom, ops.mass_hom, coeffs.Sigma, cfg.n_pairs, sopt);
    pt.comparison = compare_spectra(ms, hom, ops.mass_hom, ops.stiffness_hom);
    pt.sandwich = minimax_sandwich_check(ms, hom, coeffs, norm_equivalence(model));
    pt.invariants_ms = spectral_invariants(ms, ops.stiffness_ms, ops.mass_ms, model.sigma);
    pt.invariants_hom = spectral_invariants(hom, ops.stiffness_hom, ops.mass_hom, coeffs.Sigma);
    for (const SpectrumRow& row : pt.comparison.rows) {
        pt.record.eig_gap.push_back(row.gap);
        pt.record.eig_err_l2.push_back(row.err_l2);
        pt.record.eig_err_h1.push_back(row.err_h1);
    }
    return pt;
}

enum class Schedule { serial, parallel };

/**
 * One SweepPoint per epsilon, in the configured order. A failing epsilon
 * yields a point with ok = false and NaN fields; the others still run.
 * `on_point` is invoked as points complete (in order for the serial schedule).
 */
inline std::vector<SweepPoint> run_sweep(const SweepConfig& cfg, Schedule schedule = Schedule::serial,
                                         const std::function<void(const SweepPoint&)>& on_point = {})
{
    validate(cfg);
    const ModelSpec model = make_model(cfg.model, cfg.sigma);
    const EffectiveCoefficients coeffs = solve_cell(model);

    const auto guarded = [&](double eps) {
        try {
            return run_epsilon(cfg, eps, model, coeffs);
        } catch (const std::exception& e) {
            SweepPoint pt;
            pt.ok = false;
            pt.error = e.what();
            const double nan = std::numeric_limits<double>::quiet_NaN();
            pt.record.epsilon = eps;
            pt.record.h = cfg.h.value_or(eps * eps);
            pt.record.poisson_err_l2 = pt.record.poisson_err_h1 = pt.record.corrector_err_h1 = nan;
            const auto n = static_cast<std::size_t>(cfg.n_pairs);
            pt.record.eig_gap.assign(n, nan);
            pt.record.eig_err_l2.assign(n, nan);
            pt.record.eig_err_h1.assign(n, nan);
            return pt;
        }
    };

    std::vector<SweepPoint> out;
    out.reserve(cfg.epsilons.size());
    if (schedule == Schedule::serial) {
        for (double eps : cfg.epsilons) {
            out.push_back(guarded(eps));
            if (on_point) {
                on_point(out.back());
            }
        }
        return out;
    }
    std::vector<std::future<SweepPoint>> jobs;
    jobs.reserve(cfg.epsilons.size());
    for (double eps : cfg.epsilons) {
        jobs.push_back(std::async(std::launch::async, guarded, eps));
    }
    for (auto& j : jobs) {
        out.push_back(j.get());
        if (on_point) {
            on_point(out.back());
        }
    }
    return out;
}

inline std::vector<ConvergenceRecord> records_of(const std::vector<SweepPoint>& points)
{
    std::vector<ConvergenceRecord> r;
    r.reserve(points.size());
    for (const auto& p : points) {
        r.push_back(p.record);
    }
    return r;
}

/// Pass/fail flags of the convergence properties over a sweep.
struct SweepSummary {
    bool poisson_l2_decreasing = true;   ///< each ratio >= 1.5
    bool poisson_h1_bounded = true;      ///< within [0.5, 2] of the first value
    bool corrector_h1_decreasing = true; ///< each ratio >= 1.3
    bool eigen_gap_decreasing = true;    ///< n >= 1, strictly
    bool eigen_l2_decreasing = true;     ///< n >= 1, strictly
    bool eigen_h1_bounded = true;        ///< n >= 1, within [0.5, 2] of the first value
    bool mismatch_grows_with_n = true;   ///< at the epsilon closest to 0.1, last gap > gap at n = 1
    bool minimax_sandwich = true;
    bool all_points_ok = true;

    [[nodiscard]] bool all_pass() const noexcept
    {
        return poisson_l2_decreasing && poisson_h1_bounded && corrector_h1_decreasing && eigen_gap_decreasing &&
               eigen_l2_decreasing && eigen_h1_bounded && mismatch_grows_with_n && minimax_sandwich &&
               all_points_ok;
    }
};

namespace detail {

inline bool decreasing_by(const std::vector<double>& v, double min_ratio)
{
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] < v[i - 1]) || !(v[i - 1] >= min_ratio * v[i])) {
            return false;
        }
    }
    return true;
}

inline bool within_factor_of_first(const std::vector<double>& v, double lo, double hi)
{
    for (double x : v) {
        if (!(x >= lo * v.front() && x <= hi * v.front())) {
            return false;
        }
    }
    return true;
}

} // namespace detail

inline SweepSummary summarize(const std::vector<SweepPoint>& points)
{
    SweepSummary s;
    std::vector<const SweepPoint*> ok;
    for (const auto& p : points) {
        if (p.ok) {
            ok.push_back(&p);
        } else {
            s.all_points_ok = false;
        }
    }
    if (ok.empty()) {
        s.all_points_ok = false;
        return s;
    }
    const auto column = [&](auto get) {
        std::vector<double> v;
        for (const auto* p : ok) {
            v.push_back(get(p->record));
        }
        return v;
    };
    s.poisson_l2_decreasing = detail::decreasing_by(column([](const auto& r) { return r.poisson_err_l2; }), 1.5);
    s.poisson_h1_bounded =
        detail::within_factor_of_first(column([](const auto& r) { return r.poisson_err_h1; }), 0.5, 2.0);
    s.corrector_h1_decreasing =
        detail::decreasing_by(column([](const auto& r) { return r.corrector_err_h1; }), 1.3);
    const std::size_t n_pairs = ok.front()->record.eig_gap.size();
    for (std::size_t n = 1; n < n_pairs; ++n) {
        s.eigen_gap_decreasing &= detail::decreasing_by(column([n](const auto& r) { return r.eig_gap[n]; }), 1.0);
        s.eigen_l2_decreasing &= detail::decreasing_by(column([n](const auto& r) { return r.eig_err_l2[n]; }), 1.0);
        s.eigen_h1_bounded &=
            detail::within_factor_of_first(column([n](const auto& r) { return r.eig_err_h1[n]; }), 0.5, 2.0);
    }
    const auto* near = *std::min_element(ok.begin(), ok.end(), [](const auto* a, const auto* b) {
        return std::abs(a->record.epsilon - 0.1) < std::abs(b->record.epsilon - 0.1);
    });
    if (n_pairs >= 3) {
        s.mismatch_grows_with_n = near->record.eig_gap.back() > near->record.eig_gap[1];
    }
    for (const auto* p : ok) {
        s.minimax_sandwich &= p->sandwich.all_hold();
    }
    return s;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string format_number(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string csv_header(std::size_t n_pairs)
{
    std::string h = "epsilon,h,poisson_err_l2,poisson_err_h1,corrector_err_h1";
    for (std::size_t n = 0; n < n_pairs; ++n) {
        const std::string k = std::to_string(n);
        h += ",gap_" + k + ",eig_err_l2_" + k + ",eig_err_h1_" + k;
    }
    return h;
}

inline std::string csv_row(const ConvergenceRecord& r)
{
    std::string line = format_number(r.epsilon) + "," + format_number(r.h) + "," + format_number(r.poisson_err_l2) +
                       "," + format_number(r.poisson_err_h1) + "," + format_number(r.corrector_err_h1);
    for (std::size_t n = 0; n < r.eig_gap.size(); ++n) {
        line += "," + format_number(r.eig_gap[n]) + "," + format_number(r.eig_err_l2[n]) + "," +
                format_number(r.eig_err_h1[n]);
    }
    return line;
}

inline void emit_csv(const std::vector<ConvergenceRecord>& records, const std::string& path)
{
    if (records.empty()) {
        throw ParameterError("emit_csv: no records");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("emit_csv: cannot open '" + path + "'");
    }
    out << csv_header(records.front().eig_gap.size()) << '\n';
    for (const auto& r : records) {
        out << csv_row(r) << '\n';
    }
    if (!out) {
        throw IoError("emit_csv: write failed for '" + path + "'");
    }
}

inline std::vector<ConvergenceRecord> parse_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("parse_csv: missing header");
    }
    std::size_t cols = 1;
    for (char c : line) {
        cols += c == ',' ? 1 : 0;
    }
    if (cols < 5 || (cols - 5) % 3 != 0) {
        throw IoError("parse_csv: unexpected column count");
    }
    const std::size_t n_pairs = (cols - 5) / 3;
    std::vector<ConvergenceRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<double> v;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            v.push_back(cell == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(cell));
        }
        if (v.size() != cols) {
            throw IoError("parse_csv: ragged row");
        }
        ConvergenceRecord r;
        r.epsilon = v[0];
        r.h = v[1];
        r.poisson_err_l2 = v[2];
        r.poisson_err_h1 = v[3];
        r.corrector_err_h1 = v[4];
        for (std::size_t n = 0; n < n_pairs; ++n) {
            r.eig_gap.push_back(v[5 + 3 * n]);
            r.eig_err_l2.push_back(v[6 + 3 * n]);
            r.eig_err_h1.push_back(v[7 + 3 * n]);
        }
        out.push_back(std::move(r));
    }
    return out;
}

/// x, u_eps, u_hom, u_corrector
inline void emit_profile_csv(const SweepPoint& pt, const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("emit_profile_csv: cannot open '" + path + "'");
    }
    out << "x,u_eps,u_hom,u_corrector\n";
    const auto& x = pt.poisson_ms.u.grid->nodes;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out << format_number(x[i]) << ',' << format_number(pt.poisson_ms.u.values[i]) << ','
            << format_number(pt.poisson_hom.u.values[i]) << ',' << format_number(pt.corrector.values[i]) << '\n';
    }
    if (!out) {
        throw IoError("emit_profile_csv: write failed for '" + path + "'");
    }
}

inline void emit_summary_csv(const SweepSummary& s, const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("emit_summary_csv: cannot open '" + path + "'");
    }
    const auto b = [](bool v) { return v ? "pass" : "fail"; };
    out << "poisson_l2_decreasing,poisson_h1_bounded,corrector_h1_decreasing,eigen_gap_decreasing,"
           "eigen_l2_decreasing,eigen_h1_bounded,mismatch_grows_with_n,minimax_sandwich,all_points_ok,all_pass\n";
    out << b(s.poisson_l2_decreasing) << ',' << b(s.poisson_h1_bounded) << ',' << b(s.corrector_h1_decreasing) << ','
        << b(s.eigen_gap_decreasing) << ',' << b(s.eigen_l2_decreasing) << ',' << b(s.eigen_h1_bounded) << ','
        << b(s.mismatch_grows_with_n) << ',' << b(s.minimax_sandwich) << ',' << b(s.all_points_ok) << ','
        << b(s.all_pass()) << '\n';
    if (!out) {
        throw IoError("emit_summary_csv: write failed for '" + path + "'");
    }
}

/**
 * Standalone matplotlib script next to the CSVs: solution overlay from
 * `profile_csv`, and (for two or more records) log-log decay of the Poisson,
 * corrector and eigen errors from `sweep_csv`. Paths stay relative.
 */
inline void emit_plot_script(const std::vector<ConvergenceRecord>& records, const std::string& path,
                             const std::string& sweep_csv = "sweep.csv", const std::string& profile_csv = "profile.csv")
{
    if (records.empty()) {
        throw ParameterError("emit_plot_script: no records");
    }
    if ((!sweep_csv.empty() && sweep_csv.front() == '/') || (!profile_csv.empty() && profile_csv.front() == '/')) {
        throw ParameterError("emit_plot_script: CSV paths must be relative");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("emit_plot_script: cannot open '" + path + "'");
    }
    const std::size_t n_pairs = records.front().eig_gap.size();
    out << "#!/usr/bin/env python3\n"
           "import csv\n"
           "import os\n"
           "import matplotlib\n"
           "matplotlib.use(\"Agg\")\n"
           "import matplotlib.pyplot as plt\n"
           "\n"
           "HERE = os.path.dirname(os.path.abspath(__file__))\n"
           "\n"
           "\n"
           "def load(name):\n"
           "    with open(os.path.join(HERE, name)) as fh:\n"
           "        rows = list(csv.DictReader(fh))\n"
           "    return {k: [float(r[k]) for r in rows] for k in rows[0]}\n"
           "\n"
           "\n"
           "# (a) multiscale vs homogenized Poisson solution\n"
           "prof = load(\""
        << profile_csv
        << "\")\n"
           "plt.figure()\n"
           "plt.plot(prof[\"x\"], prof[\"u_eps\"], label=\"u_eps\")\n"
           "plt.plot(prof[\"x\"], prof[\"u_hom\"], \"--\", label=\"u_0\")\n"
           "plt.plot(prof[\"x\"], prof[\"u_corrector\"], \":\", label=\"u_0 + eps u_1\")\n"
           "plt.xlabel(\"x\")\n"
           "plt.legend()\n"
           "plt.savefig(os.path.join(HERE, \"poisson_overlay.png\"), dpi=150)\n";
    if (records.size() < 2) {
        out << "\n# decay plots skipped: a single epsilon gives no rate information\n";
        return;
    }
    out << "\n"
           "sweep = load(\""
        << sweep_csv
        << "\")\n"
           "eps = sweep[\"epsilon\"]\n"
           "\n"
           "# (b) Poisson and corrector errors\n"
           "plt.figure()\n"
           "plt.loglog(eps, sweep[\"poisson_err_l2\"], \"o-\", label=\"|u_eps - u_0| L2\")\n"
           "plt.loglog(eps, sweep[\"poisson_err_h1\"], \"s-\", label=\"|u_eps - u_0| H1\")\n"
           "plt.loglog(eps, sweep[\"corrector_err_h1\"], \"^-\", label=\"|u_eps - u_0 - eps u_1| H1\")\n"
           "plt.xlabel(\"epsilon\")\n"
           "plt.legend()\n"
           "plt.savefig(os.path.join(HERE, \"poisson_rates.png\"), dpi=150)\n"
           "\n"
           "# (c) eigenvalue gaps per index\n"
           "plt.figure()\n"
           "for n in range(1, "
        << n_pairs
        << "):\n"
           "    plt.loglog(eps, sweep[\"gap_%d\" % n], \"o-\", label=\"n = %d\" % n)\n"
           "plt.xlabel(\"epsilon\")\n"
           "plt.ylabel(\"|lambda_eps - lambda_0|\")\n"
           "plt.legend()\n"
           "plt.savefig(os.path.join(HERE, \"eigen_gaps.png\"), dpi=150)\n";
    if (!out) {
        throw IoError("emit_plot_script: write failed for '" + path + "'");
    }
}

} // namespace lhom
