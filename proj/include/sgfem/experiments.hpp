#pragma once

// Batch driver for the convergence studies: sweeps over N, P, CoV, h and
// truncation, coefficient-pattern counts, stiffness norm decay and case export.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgfem/chaos_basis.hpp"
#include "sgfem/galerkin_operator.hpp"
#include "sgfem/krylov.hpp"
#include "sgfem/matrix_market.hpp"
#include "sgfem/preconditioners.hpp"
#include "sgfem/problem.hpp"

namespace sgfem {

enum class TableKind { LogN, LogP, LogCoV, LogH, TruncStd, TruncAdapt };

inline TableKind parse_table(const std::string& s)
{
    static const std::map<std::string, TableKind> names{{"logN", TableKind::LogN},         {"logP", TableKind::LogP},
                                                        {"logCoV", TableKind::LogCoV},     {"logh", TableKind::LogH},
                                                        {"trunc-std", TableKind::TruncStd}, {"trunc-adapt", TableKind::TruncAdapt}};
    auto it = names.find(s);
    if (it == names.end())
        throw std::invalid_argument("unknown table '" + s + "' (expected logN|logP|logCoV|logh|trunc-std|trunc-adapt)");
    return it->second;
}

struct ExperimentConfig {
    int N = 4;
    int P = 4;
    int mesh = 10;
    double cov_pct = 100.0;
    double mean = 1.0;
    double correlation_length = 0.5;
    double source = 1.0;
    SigmaMode sigma_mode = SigmaMode::MomentMatch;
    MatrixNorm norm = MatrixNorm::Frobenius;       // norm-decay output
    MatrixNorm trunc_norm = MatrixNorm::Two;       // adaptive truncation rule
    std::vector<PrecondKind> preconds = all_preconditioners();
    std::vector<int> N_list{1, 2, 3, 4};
    std::vector<int> P_list{1, 2, 3, 4};
    std::vector<int> mesh_list{5, 10, 15, 20, 25, 30};
    std::vector<double> cov_list{25, 50, 75, 100, 125, 150};
    std::vector<double> trunc_cov_list{25, 50, 100, 150};
    std::vector<int> lt_list{0, 1, 2, 3, 4, 8};
    std::vector<double> tau_list;  // empty: per-CoV defaults
    double tol = 1e-8;
    int maxit = 1000;
    LevelSolve level_solve{};

    ProblemSpec problem(int n_dim, int degree, int mesh_n, double cov_percent) const
    {
        ProblemSpec p;
        p.dimension = n_dim;
        p.degree = degree;
        p.mesh = mesh_n;
        p.cov = cov_percent / 100.0;
        p.mean = mean;
        p.correlation_length = correlation_length;
        p.source = source;
        p.sigma_mode = sigma_mode;
        return p;
    }

    ProblemSpec problem() const { return problem(N, P, mesh, cov_pct); }
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class T, class F>
std::vector<T> parse_list(const std::string& s, F conv)
{
    std::vector<T> out;
    for (const auto& x : split_list(s)) out.push_back(conv(x));
    return out;
}

}  // namespace detail

/// Applies one key=value setting. Unknown keys are an error.
inline void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value)
{
    using detail::parse_list;
    auto to_i = [](const std::string& s) { return std::stoi(s); };
    auto to_d = [](const std::string& s) { return std::stod(s); };
    if (key == "N") c.N = to_i(value);
    else if (key == "P") c.P = to_i(value);
    else if (key == "mesh") c.mesh = to_i(value);
    else if (key == "cov") c.cov_pct = to_d(value);
    else if (key == "mean") c.mean = to_d(value);
    else if (key == "L") c.correlation_length = to_d(value);
    else if (key == "source") c.source = to_d(value);
    else if (key == "sigma_mode") c.sigma_mode = parse_sigma_mode(value);
    else if (key == "norm") c.norm = parse_matrix_norm(value);
    else if (key == "trunc_norm") c.trunc_norm = parse_matrix_norm(value);
    else if (key == "precond") c.preconds = parse_list<PrecondKind>(value, parse_precond);
    else if (key == "N_list") c.N_list = parse_list<int>(value, to_i);
    else if (key == "P_list") c.P_list = parse_list<int>(value, to_i);
    else if (key == "mesh_list") c.mesh_list = parse_list<int>(value, to_i);
    else if (key == "cov_list") c.cov_list = parse_list<double>(value, to_d);
    else if (key == "trunc_cov_list") c.trunc_cov_list = parse_list<double>(value, to_d);
    else if (key == "lt_list") c.lt_list = parse_list<int>(value, to_i);
    else if (key == "tau_list") c.tau_list = parse_list<double>(value, to_d);
    else if (key == "tol") c.tol = to_d(value);
    else if (key == "maxit") c.maxit = to_i(value);
    else if (key == "level_solve") {
        if (value == "direct") c.level_solve.mode = LevelSolve::Mode::Direct;
        else if (value == "cg") c.level_solve.mode = LevelSolve::Mode::InnerCG;
        else throw std::invalid_argument("level_solve must be direct|cg");
    } else
        throw std::invalid_argument("unknown config key '" + key + "'");
}

/// Flat "key = value" lines; '#' starts a comment.
inline ExperimentConfig parse_config(std::istream& is, ExperimentConfig base = {})
{
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
        try {
            set_config_value(base, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
        } catch (const std::exception& e) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return base;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {})
{
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config '" + path + "'");
    return parse_config(is, std::move(base));
}

// ---------------------------------------------------------------------------
// Solving and reporting
// ---------------------------------------------------------------------------

struct CellResult {
    PrecondKind kind;
    int iterations = 0;
    double kappa = 1.0;
    bool converged = false;
    double seconds = 0.0;
};

inline CellResult solve_cell(const StochasticProblem& prob, PrecondKind kind, const TruncationSet& trunc,
                             const ExperimentConfig& cfg, SolveResult* full = nullptr)
{
    const auto m = make_preconditioner(kind, prob.A(), trunc, cfg.level_solve);
    CgOptions opt;
    opt.tol = cfg.tol;
    opt.maxit = cfg.maxit;
    const GalerkinOperator& a = prob.A();
    SolveResult s = flexible_cg([&a](std::span<const double> x, std::span<double> y) { a.apply(x, y); }, m->as_map(),
                                prob.rhs, opt);
    CellResult c{kind, s.report.iterations, s.report.kappa, s.report.converged, s.report.seconds};
    if (full) *full = std::move(s);
    return c;
}

struct ReportRow {
    std::vector<std::pair<std::string, std::string>> setup;
    std::vector<CellResult> cells;

    const CellResult& cell(PrecondKind k) const
    {
        for (const auto& c : cells)
            if (c.kind == k) return c;
        throw std::out_of_range(std::string("ReportRow: no column for ") + to_string(k));
    }

    std::string value(const std::string& key) const
    {
        for (const auto& [k, v] : setup)
            if (k == key) return v;
        throw std::out_of_range("ReportRow: no setup column " + key);
    }
};

struct Report {
    std::string title;
    std::vector<ReportRow> rows;
};

inline std::string fixed2(double v)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
}

inline std::string compact(double v)
{
    std::ostringstream os;
    os << v;
    return os.str();
}

inline void write_csv(std::ostream& os, const Report& r)
{
    if (r.rows.empty()) return;
    const ReportRow& first = r.rows.front();
    bool need_flag = false;
    for (const auto& row : r.rows)
        for (const auto& c : row.cells) need_flag |= !c.converged;
    bool sep = false;
    for (const auto& [k, v] : first.setup) {
        os << (sep ? "," : "") << k;
        sep = true;
    }
    for (const auto& c : first.cells) os << (sep ? "," : "") << display_name(c.kind) << "_it," << display_name(c.kind) << "_kappa", sep = true;
    if (need_flag) os << ",nonconverged";
    os << '\n';
    for (const auto& row : r.rows) {
        sep = false;
        for (const auto& [k, v] : row.setup) {
            os << (sep ? "," : "") << v;
            sep = true;
        }
        std::string bad;
        for (const auto& c : row.cells) {
            os << (sep ? "," : "") << c.iterations << ',' << fixed2(c.kappa);
            sep = true;
            if (!c.converged) bad += (bad.empty() ? "" : ";") + std::string(display_name(c.kind));
        }
        if (need_flag) os << ',' << bad;
        os << '\n';
    }
}

inline void write_markdown(std::ostream& os, const Report& r)
{
    if (!r.title.empty()) os << "### " << r.title << "\n\n";
    if (r.rows.empty()) return;
    const ReportRow& first = r.rows.front();
    os << '|';
    auto heading = [](std::string k) {
        for (const auto& [suffix, label] : {std::pair<std::string, std::string>{"_it", " it"}, {"_kappa", " κ"}})
            if (k.size() > suffix.size() && k.ends_with(suffix)) return k.substr(0, k.size() - suffix.size()) + label;
        return k;
    };
    for (const auto& [k, v] : first.setup) os << ' ' << heading(k) << " |";
    for (const auto& c : first.cells) os << ' ' << display_name(c.kind) << " it | " << display_name(c.kind) << " κ |";
    os << "\n|";
    for (std::size_t i = 0; i < first.setup.size() + 2 * first.cells.size(); ++i) os << "---|";
    os << '\n';
    for (const auto& row : r.rows) {
        os << '|';
        for (const auto& [k, v] : row.setup) os << ' ' << v << " |";
        for (const auto& c : row.cells)
            os << ' ' << c.iterations << (c.converged ? "" : "*") << " | " << fixed2(c.kappa) << " |";
        os << '\n';
    }
}

inline std::vector<double> default_tau_list(double cov_pct)
{
    if (cov_pct <= 50.0) return {10, 1, 0.1, 0};
    if (cov_pct <= 100.0) return {100, 10, 1, 0.1, 0};
    return {100, 10, 1, 0.1, 0.01, 0};
}

namespace detail {

inline ReportRow sweep_row(const StochasticProblem& prob, const ExperimentConfig& cfg,
                           std::vector<std::pair<std::string, std::string>> setup)
{
    ReportRow row{std::move(setup), {}};
    const TruncationSet full = prob.A().full_truncation();
    for (PrecondKind k : cfg.preconds) row.cells.push_back(solve_cell(prob, k, full, cfg));
    return row;
}

}  // namespace detail

/// Runs one sweep. Each system is built once and solved once per preconditioner
/// (and truncation); non-converged solves are flagged in the row.
inline Report run_table(const ExperimentConfig& cfg, TableKind which)
{
    Report rep;
    switch (which) {
    case TableKind::LogN:
        rep.title = "stochastic dimension N (P=" + std::to_string(cfg.P) + ", CoV=" + compact(cfg.cov_pct) + "%)";
        for (int n : cfg.N_list) {
            const auto prob = build_problem(cfg.problem(n, cfg.P, cfg.mesh, cfg.cov_pct));
            rep.rows.push_back(detail::sweep_row(prob, cfg, {{"N", std::to_string(n)}, {"ndof", std::to_string(prob.A().size())}}));
        }
        break;
    case TableKind::LogP:
        rep.title = "polynomial degree P (N=" + std::to_string(cfg.N) + ", CoV=" + compact(cfg.cov_pct) + "%)";
        for (int p : cfg.P_list) {
            const auto prob = build_problem(cfg.problem(cfg.N, p, cfg.mesh, cfg.cov_pct));
            rep.rows.push_back(detail::sweep_row(prob, cfg, {{"P", std::to_string(p)}, {"ndof", std::to_string(prob.A().size())}}));
        }
        break;
    case TableKind::LogCoV:
        rep.title = "coefficient of variation (N=" + std::to_string(cfg.N) + ", P=" + std::to_string(cfg.P) + ")";
        for (double cov : cfg.cov_list) {
            const auto prob = build_problem(cfg.problem(cfg.N, cfg.P, cfg.mesh, cov));
            rep.rows.push_back(detail::sweep_row(prob, cfg, {{"CoV", compact(cov)}}));
        }
        break;
    case TableKind::LogH:
        rep.title = "mesh size h (N=" + std::to_string(cfg.N) + ", P=" + std::to_string(cfg.P) + ", CoV=" + compact(cfg.cov_pct) + "%)";
        for (int n : cfg.mesh_list) {
            const auto prob = build_problem(cfg.problem(cfg.N, cfg.P, n, cfg.cov_pct));
            rep.rows.push_back(detail::sweep_row(prob, cfg, {{"h", "1/" + std::to_string(n)}, {"ndof", std::to_string(prob.A().size())}}));
        }
        break;
    case TableKind::TruncStd:
    case TableKind::TruncAdapt: {
        const bool adaptive = which == TableKind::TruncAdapt;
        rep.title = adaptive ? "adaptive truncation" : "standard truncation";
        for (double cov : cfg.trunc_cov_list) {
            const auto prob = build_problem(cfg.problem(cfg.N, cfg.P, cfg.mesh, cov));
            const GalerkinOperator& a = prob.A();
            const TruncationSet full = a.full_truncation();
            ExperimentConfig base_cfg = cfg;
            const CellResult mb = solve_cell(prob, PrecondKind::MeanBased, full, cfg);
            const CellResult kr = solve_cell(prob, PrecondKind::Kronecker, full, cfg);
            std::vector<PrecondKind> kinds;
            for (PrecondKind k : cfg.preconds)
                if (k != PrecondKind::MeanBased && k != PrecondKind::Kronecker) kinds.push_back(k);
            std::vector<TruncationSet> sets;
            std::vector<std::string> labels;
            if (adaptive) {
                const Vector norms = a.stiffness_norms(cfg.trunc_norm);
                for (double tau : cfg.tau_list.empty() ? default_tau_list(cov) : cfg.tau_list) {
                    sets.push_back(adaptive_truncation(tau, norms, a.tensor()));
                    labels.push_back(compact(tau));
                }
            } else {
                for (int lt : cfg.lt_list) {
                    if (lt > 2 * cfg.P) throw std::invalid_argument("trunc-std: l_t exceeds the coefficient degree 2P");
                    sets.push_back(standard_truncation(cfg.N, lt));
                    labels.push_back(std::to_string(lt));
                }
            }
            for (std::size_t s = 0; s < sets.size(); ++s) {
                const CouplingPattern pat = coupling_pattern(a.tensor(), sets[s]);
                ReportRow row;
                row.setup = {{"CoV", compact(cov)},
                             {adaptive ? "tau" : "lt", labels[s]},
                             {adaptive ? "N_adapt" : "Mt+1", std::to_string(sets[s].size())},
                             {"nz(c_ijk)", std::to_string(pat.entries)},
                             {"mb_it", std::to_string(mb.iterations)},
                             {"mb_kappa", fixed2(mb.kappa)},
                             {"K_it", std::to_string(kr.iterations)},
                             {"K_kappa", fixed2(kr.kappa)}};
                for (PrecondKind k : kinds) row.cells.push_back(solve_cell(prob, k, sets[s], base_cfg));
                rep.rows.push_back(std::move(row));
            }
        }
        break;
    }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Coefficient pattern, norm decay, export
// ---------------------------------------------------------------------------

/// nnz of the summed coefficient matrix and the number of retained tensor entries
/// for standard truncation at l_t, with the coefficient basis of degree 2P.
inline CouplingPattern emit_c_pattern(int n_dim, int degree, int lt)
{
    if (lt > 2 * degree) throw std::invalid_argument("cpattern: l_t must not exceed 2P");
    const CijkTensor c = build_c_tensor(n_dim, degree, 2 * degree);
    return coupling_pattern(c, standard_truncation(n_dim, lt));
}

struct NormDecay {
    Vector norms;          // ||K_i||
    DenseMatrix weighted;  // sum_i c_ijk ||K_i||
};

inline NormDecay emit_norm_decay(const GalerkinOperator& op, MatrixNorm kind = MatrixNorm::Frobenius)
{
    NormDecay out{op.stiffness_norms(kind), DenseMatrix(op.blocks(), op.blocks())};
    for (const auto& e : op.tensor().entries()) out.weighted(e.j, e.k) += e.value * out.norms[e.i];
    return out;
}

inline void write_norms_csv(std::ostream& os, const NormDecay& d)
{
    os << "i,norm\n";
    for (std::size_t i = 0; i < d.norms.size(); ++i) os << i << ',' << format_real(d.norms[i]) << '\n';
}

inline void write_weighted_csv(std::ostream& os, const NormDecay& d)
{
    os << "j,k,log10_weighted\n";
    for (std::size_t j = 0; j < d.weighted.rows(); ++j)
        for (std::size_t k = 0; k < d.weighted.cols(); ++k) {
            const double w = d.weighted(j, k);
            os << j << ',' << k << ',' << (w > 0.0 ? format_real(std::log10(w)) : std::string("-inf")) << '\n';
        }
}

inline std::string stiffness_file_name(std::size_t i)
{
    std::ostringstream os;
    os << "K_" << std::setw(3) << std::setfill('0') << i << ".mtx";
    return os.str();
}

inline void write_vector(std::ostream& os, std::span<const double> v)
{
    for (double x : v) os << format_real(x) << '\n';
}

inline Vector read_vector(std::istream& is)
{
    Vector out;
    std::string tok;
    while (is >> tok) out.push_back(std::stod(tok));
    return out;
}

/// Writes K_i (Matrix Market), the tensor triples, the load vector, mesh and KL
/// CSVs and, when `dense_cap` admits it, the global matrix. Returns written paths.
inline std::vector<std::string> export_case(const StochasticProblem& prob, const std::string& dir,
                                            std::size_t dense_cap = 5000, bool with_dense = true)
{
    namespace fs = std::filesystem;
    const GalerkinOperator& a = prob.A();
    if (with_dense && a.size() > dense_cap)
        throw std::length_error("export: global dimension " + std::to_string(a.size()) + " exceeds the dense cap " +
                                std::to_string(dense_cap) + "; pass a cap of at least " + std::to_string(a.size()) +
                                " or skip the dense matrix");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
    std::vector<std::string> written;
    auto open = [&](const std::string& name) {
        const std::string path = (fs::path(dir) / name).string();
        std::ofstream os(path);
        if (!os) throw IoError("cannot open '" + path + "' for writing");
        written.push_back(path);
        return os;
    };
    for (std::size_t i = 0; i < a.coefficients(); ++i) {
        auto os = open(stiffness_file_name(i));
        write_matrix_market(os, a.stiffness(i), false);
    }
    {
        auto os = open("tensor.txt");
        write_tensor_triples(os, a.tensor());
    }
    {
        auto os = open("rhs.txt");
        write_vector(os, prob.rhs);
    }
    {
        auto os = open("mesh.csv");
        prob.mesh.write_csv(os);
    }
    {
        auto os = open("kl.csv");
        write_kl_csv(os, prob.mesh, prob.kl);
    }
    if (with_dense) {
        auto os = open("global.mtx");
        write_matrix_market(os, a.assemble_global_dense(dense_cap), false);
    }
    for (const auto& p : written) {
        std::ifstream check(p);
        if (!check) throw IoError("export: '" + p + "' not readable after writing");
    }
    return written;
}

}  // namespace sgfem
