// Command-line front end: cell, poisson, eigen and sweep subcommands.
//
// Exit codes: 0 success, 1 a theory check failed, 2 parameter or I/O error.

#include "lhom/lhom.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

constexpr int kExitTheoryViolation = 1;
constexpr int kExitUsage = 2;
constexpr const char* kOutDirEnv = "LHOM_OUT_DIR";

struct Flags {
    std::string config;
    std::string model;
    double sigma = 0.0;
    double eta = 0.0;
    double radius = 0.0;
    double h = 0.0;
    double epsilon = 0.0;
    int n_pairs = 0;
    std::string rhs;
    std::string out;
    std::string out_dir;
    std::vector<double> epsilons;
    bool parallel = false;
    bool header = false;
};

std::filesystem::path resolve_out(const lhom::SweepConfig& cfg, const std::string& explicit_path,
                                  const std::string& fallback)
{
    if (!explicit_path.empty()) {
        return explicit_path;
    }
    std::filesystem::create_directories(cfg.out_dir);
    return std::filesystem::path(cfg.out_dir) / fallback;
}

void print_cell(const lhom::EffectiveCoefficients& c, bool header)
{
    if (header) {
        std::cout << "K,Sigma,C_mu,C_mu_hat,C_Phi,K_residual\n";
    }
    std::cout << lhom::format_number(c.K) << ',' << lhom::format_number(c.Sigma) << ','
              << lhom::format_number(c.C_mu) << ',' << lhom::format_number(c.C_mu_hat) << ','
              << lhom::format_number(c.C_Phi) << ',' << lhom::format_number(c.K_residual) << '\n';
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Homogenization of the multiscale overdamped Langevin generator"};
    app.require_subcommand(1);
    Flags f;
    app.add_option("--config", f.config, "key = value configuration file")->check(CLI::ExistingFile);

    auto* cell = app.add_subcommand("cell", "effective coefficients as one CSV row");
    auto* poisson = app.add_subcommand("poisson", "multiscale, homogenized and corrected Poisson solutions");
    auto* eigen = app.add_subcommand("eigen", "low spectra of both generators");
    auto* sweep = app.add_subcommand("sweep", "epsilon sweep of both experiments");

    std::vector<CLI::Option*> given;
    const auto common = [&](CLI::App* sub) {
        given.push_back(sub->add_option("--sigma", f.sigma, "diffusion coefficient"));
        given.push_back(sub->add_option("--model", f.model, "model name (ou_cosine, ou_flat)"));
    };
    common(cell);
    cell->add_flag("--header", f.header, "print a header line before the row");

    for (auto* sub : {poisson, eigen}) {
        common(sub);
        sub->add_option("--epsilon", f.epsilon, "scale parameter")->required()->check(CLI::PositiveNumber);
        given.push_back(sub->add_option("--radius", f.radius, "domain half-width (default 5)"));
        given.push_back(sub->add_option("--mesh-width", f.h, "mesh width (default epsilon^2)"));
        sub->add_option("--out", f.out, "output CSV path");
    }
    given.push_back(poisson->add_option("--eta", f.eta, "reaction coefficient"));
    given.push_back(poisson->add_option("--rhs", f.rhs, "right-hand side: linear, constant, quadratic, sine"));
    given.push_back(eigen->add_option("--n-pairs", f.n_pairs, "number of eigenpairs (default 5)"));

    common(sweep);
    given.push_back(sweep->add_option("--epsilons", f.epsilons, "strictly decreasing list")->delimiter(','));
    given.push_back(sweep->add_option("--radius", f.radius, "domain half-width"));
    given.push_back(sweep->add_option("--eta", f.eta, "reaction coefficient"));
    given.push_back(sweep->add_option("--n-pairs", f.n_pairs, "number of eigenpairs"));
    given.push_back(sweep->add_option("--mesh-width", f.h, "fixed mesh width instead of epsilon^2"));
    given.push_back(sweep->add_option("--out-dir", f.out_dir, "output directory"));
    sweep->add_flag("--parallel", f.parallel, "process epsilon values concurrently");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        lhom::SweepConfig cfg;
        if (!f.config.empty()) {
            cfg = lhom::load_config(f.config, cfg);
        }
        if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') {
            cfg.out_dir = env;
        }
        const auto set = [&](const std::string& name) {
            for (const auto* o : given) {
                if (o->get_name() == name && o->count() > 0) {
                    return true;
                }
            }
            return false;
        };
        if (set("--sigma")) cfg.sigma = f.sigma;
        if (set("--model")) cfg.model = f.model;
        if (set("--radius")) cfg.R = f.radius;
        if (set("--eta")) cfg.eta = f.eta;
        if (set("--mesh-width")) cfg.h = f.h;
        if (set("--rhs")) cfg.rhs = f.rhs;
        if (set("--n-pairs")) cfg.n_pairs = f.n_pairs;
        if (set("--epsilons")) cfg.epsilons = f.epsilons;
        if (set("--out-dir")) cfg.out_dir = f.out_dir;

        const lhom::ModelSpec model = lhom::make_model(cfg.model, cfg.sigma);
        const lhom::EffectiveCoefficients coeffs = lhom::solve_cell(model);

        if (cell->parsed()) {
            print_cell(coeffs, f.header);
            return 0;
        }

        if (poisson->parsed() || eigen->parsed()) {
            cfg.epsilons = {f.epsilon};
            lhom::validate(cfg);
            const lhom::SweepPoint pt = lhom::run_epsilon(cfg, f.epsilon, model, coeffs);
            if (poisson->parsed()) {
                const auto path = resolve_out(cfg, f.out, "poisson.csv");
                lhom::emit_profile_csv(pt, path.string());
                for (const auto& w : pt.poisson_ms.warnings) {
                    std::cerr << "warning: " << w << '\n';
                }
                const bool stable = pt.poisson_ms.stability_ratio <= pt.poisson_ms.stability_bound + 1e-6 &&
                                    pt.poisson_hom.stability_ratio <= pt.poisson_hom.stability_bound + 1e-6;
                std::cout << "wrote " << path.string() << "\n"
                          << "err_l2 " << lhom::format_number(pt.record.poisson_err_l2) << "  err_h1 "
                          << lhom::format_number(pt.record.poisson_err_h1) << "  corrector_err_h1 "
                          << lhom::format_number(pt.record.corrector_err_h1) << '\n';
                if (!stable) {
                    std::cerr << "stability estimate violated\n";
                    return kExitTheoryViolation;
                }
                return 0;
            }
            const auto path = resolve_out(cfg, f.out, "eigen.csv");
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (!out) {
                throw lhom::IoError("cannot open '" + path.string() + "'");
            }
            out << "n,lambda_eps,lambda_hom,gap,err_l2,err_h1,aligned_sign\n";
            for (const auto& r : pt.comparison.rows) {
                out << r.n << ',' << lhom::format_number(r.lambda_eps) << ',' << lhom::format_number(r.lambda_hom)
                    << ',' << lhom::format_number(r.gap) << ',' << lhom::format_number(r.err_l2) << ','
                    << lhom::format_number(r.err_h1) << ',' << r.aligned_sign << '\n';
                if (r.ambiguous) {
                    std::cerr << "warning: sign alignment ambiguous for n = " << r.n << '\n';
                }
            }
            std::cout << "wrote " << path.string() << '\n';
            return pt.sandwich.all_hold() ? 0 : kExitTheoryViolation;
        }

        // sweep
        std::filesystem::create_directories(cfg.out_dir);
        const std::filesystem::path dir(cfg.out_dir);
        const auto points = lhom::run_sweep(
            cfg, f.parallel ? lhom::Schedule::parallel : lhom::Schedule::serial, [](const lhom::SweepPoint& p) {
                std::cerr << "epsilon " << lhom::format_number(p.record.epsilon)
                          << (p.ok ? " done" : " FAILED: " + p.error) << '\n';
            });
        const auto records = lhom::records_of(points);
        lhom::emit_csv(records, (dir / "sweep.csv").string());
        const lhom::SweepPoint* profile = nullptr;
        for (const auto& p : points) {
            if (p.ok && (profile == nullptr ||
                         std::abs(p.record.epsilon - 0.1) < std::abs(profile->record.epsilon - 0.1))) {
                profile = &p;
            }
        }
        if (profile != nullptr) {
            lhom::emit_profile_csv(*profile, (dir / "profile.csv").string());
        }
        const lhom::SweepSummary summary = lhom::summarize(points);
        lhom::emit_summary_csv(summary, (dir / "summary.csv").string());
        lhom::emit_plot_script(records, (dir / "plot.py").string());
        std::cout << "wrote sweep.csv, profile.csv, summary.csv, plot.py to " << dir.string() << '\n'
                  << "summary: " << (summary.all_pass() ? "pass" : "fail") << '\n';
        return summary.all_pass() ? 0 : kExitTheoryViolation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}
