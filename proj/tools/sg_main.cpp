// sg: command line driver for the stochastic Galerkin preconditioner studies.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <string>

#include "sgfem/sgfem.hpp"

namespace {

struct Common {
    std::string config;
    std::string out;
    std::string format = "csv";
    std::string sigma_mode;
    std::string norm;
    std::string trunc_norm;
    bool inner_cg = false;
    std::optional<int> N, P, mesh, maxit;
    std::optional<double> cov, tol;
};

void add_common(CLI::App* app, Common& c)
{
    app->add_option("--config", c.config, "flat key=value config file")->check(CLI::ExistingFile);
    app->add_option("--out", c.out, "output path (default stdout)");
    app->add_option("--N", c.N, "stochastic dimension");
    app->add_option("--P", c.P, "polynomial degree of the solution");
    app->add_option("--mesh", c.mesh, "elements per side of the unit square");
    app->add_option("--cov", c.cov, "coefficient of variation in percent");
    app->add_option("--tol", c.tol, "relative residual tolerance");
    app->add_option("--maxit", c.maxit, "iteration limit");
    app->add_option("--sigma-mode", c.sigma_mode, "moment-match | gaussian-sigma")
        ->check(CLI::IsMember({"moment-match", "gaussian-sigma"}));
    app->add_option("--norm", c.norm, "stiffness norm for the decay output: frob | two")
        ->check(CLI::IsMember({"frob", "two"}));
    app->add_option("--trunc-norm", c.trunc_norm, "stiffness norm in the adaptive truncation rule: frob | two")
        ->check(CLI::IsMember({"frob", "two"}));
    app->add_flag("--inner-cg", c.inner_cg, "solve hS level blocks with inner CG instead of a direct factorization");
}

sgfem::ExperimentConfig resolve(const Common& c)
{
    sgfem::ExperimentConfig cfg;
    if (!c.config.empty()) cfg = sgfem::load_config(c.config);
    if (c.N) cfg.N = *c.N;
    if (c.P) cfg.P = *c.P;
    if (c.mesh) cfg.mesh = *c.mesh;
    if (c.cov) cfg.cov_pct = *c.cov;
    if (c.tol) cfg.tol = *c.tol;
    if (c.maxit) cfg.maxit = *c.maxit;
    if (!c.sigma_mode.empty()) cfg.sigma_mode = sgfem::parse_sigma_mode(c.sigma_mode);
    if (!c.norm.empty()) cfg.norm = sgfem::parse_matrix_norm(c.norm);
    if (!c.trunc_norm.empty()) cfg.trunc_norm = sgfem::parse_matrix_norm(c.trunc_norm);
    if (c.inner_cg) cfg.level_solve.mode = sgfem::LevelSolve::Mode::InnerCG;
    return cfg;
}

class Output {
public:
    explicit Output(const std::string& path)
    {
        if (path.empty()) return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw sgfem::IoError("cannot open '" + path + "' for writing");
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Stochastic Galerkin FEM with hierarchical preconditioners"};
    app.require_subcommand(1);

    Common common;

    std::string which;
    std::vector<std::string> precond_list;
    auto* tables = app.add_subcommand("tables", "run a convergence sweep");
    tables->add_option("which", which, "logN | logP | logCoV | logh | trunc-std | trunc-adapt")->required();
    tables->add_option("--format", common.format, "csv | md")->check(CLI::IsMember({"csv", "md"}));
    tables->add_option("--precond", precond_list, "restrict the preconditioner columns")->delimiter(',');
    add_common(tables, common);

    int cp_n = 4, cp_p = 4, cp_lt = 0;
    auto* cpattern = app.add_subcommand("cpattern", "coefficient coupling counts under standard truncation");
    cpattern->add_option("--N", cp_n, "stochastic dimension");
    cpattern->add_option("--P", cp_p, "polynomial degree");
    cpattern->add_option("--lt", cp_lt, "truncation degree")->required();
    cpattern->add_option("--out", common.out, "output path");

    std::string weighted_out;
    auto* norms = app.add_subcommand("norms", "stiffness norm decay and weighted coupling matrix");
    norms->add_option("--weighted-out", weighted_out, "path for the (j,k) weighted matrix CSV");
    add_common(norms, common);

    std::string export_dir = "case";
    std::size_t dense_cap = 5000;
    bool no_dense = false;
    auto* exp = app.add_subcommand("export", "write K_i, tensor, load vector and global matrix");
    exp->add_option("--dir", export_dir, "output directory");
    exp->add_option("--dense-cap", dense_cap, "largest global dimension written densely");
    exp->add_flag("--no-dense", no_dense, "skip the global matrix");
    add_common(exp, common);

    std::string precond = "hs";
    std::optional<int> lt;
    std::optional<double> tau;
    std::string trace_path;
    auto* solve = app.add_subcommand("solve", "solve one system with flexible CG");
    solve->add_option("--precond", precond, "mb | kron | hs | ahs | gs | ahgs");
    auto* lt_opt = solve->add_option("--lt", lt, "standard truncation degree");
    solve->add_option("--tau", tau, "adaptive truncation threshold")->excludes(lt_opt);
    solve->add_option("--trace", trace_path, "write the residual history as CSV");
    add_common(solve, common);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*tables) {
            auto cfg = resolve(common);
            if (!precond_list.empty()) {
                cfg.preconds.clear();
                for (const auto& p : precond_list) cfg.preconds.push_back(sgfem::parse_precond(p));
            }
            const auto report = sgfem::run_table(cfg, sgfem::parse_table(which));
            Output out(common.out);
            if (common.format == "md") sgfem::write_markdown(out.stream(), report);
            else sgfem::write_csv(out.stream(), report);
        } else if (*cpattern) {
            const auto pat = sgfem::emit_c_pattern(cp_n, cp_p, cp_lt);
            Output out(common.out);
            out.stream() << "N,P,lt,nnz,n_MV\n"
                         << cp_n << ',' << cp_p << ',' << cp_lt << ',' << pat.nnz << ',' << pat.entries << '\n';
        } else if (*norms) {
            const auto cfg = resolve(common);
            const auto prob = sgfem::build_problem(cfg.problem());
            const auto decay = sgfem::emit_norm_decay(prob.A(), cfg.norm);
            Output out(common.out);
            sgfem::write_norms_csv(out.stream(), decay);
            if (!weighted_out.empty()) {
                Output w(weighted_out);
                sgfem::write_weighted_csv(w.stream(), decay);
            }
        } else if (*exp) {
            const auto cfg = resolve(common);
            const auto prob = sgfem::build_problem(cfg.problem());
            for (const auto& p : sgfem::export_case(prob, export_dir, dense_cap, !no_dense)) std::cout << p << '\n';
        } else if (*solve) {
            const auto cfg = resolve(common);
            const auto prob = sgfem::build_problem(cfg.problem());
            const sgfem::GalerkinOperator& a = prob.A();
            sgfem::TruncationSet trunc = a.full_truncation();
            if (lt) trunc = sgfem::standard_truncation(cfg.N, *lt);
            if (tau) trunc = sgfem::adaptive_truncation(*tau, a.stiffness_norms(cfg.trunc_norm), a.tensor());
            const auto m = sgfem::make_preconditioner(sgfem::parse_precond(precond), a, trunc, cfg.level_solve);
            std::unique_ptr<Output> trace;
            sgfem::CgOptions opt;
            opt.tol = cfg.tol;
            opt.maxit = cfg.maxit;
            if (!trace_path.empty()) {
                trace = std::make_unique<Output>(trace_path);
                opt.trace = &trace->stream();
            }
            const auto res = sgfem::flexible_cg(
                [&a](std::span<const double> x, std::span<double> y) { a.apply(x, y); }, m->as_map(), prob.rhs, opt);
            const auto pat = sgfem::coupling_pattern(a.tensor(), trunc);
            Output out(common.out);
            out.stream() << "precond,ndof,retained,n_MV,iterations,kappa,converged,seconds\n"
                         << sgfem::display_name(m->kind()) << ',' << a.size() << ',' << trunc.size() << ','
                         << pat.entries << ',' << res.report.iterations << ',' << sgfem::fixed2(res.report.kappa) << ','
                         << (res.report.converged ? "yes" : "no") << ',' << res.report.seconds << '\n';
            return res.report.converged ? 0 : 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "sg: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
