#pragma once

// Matrix Market (coordinate, real, general|symmetric) reader and writer.
// Values are written with 17 significant digits so text round trips are exact.

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "sgfem/linalg.hpp"

namespace sgfem {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string format_real(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Symmetric output stores the lower triangle only and requires an exactly symmetric matrix.
inline void write_matrix_market(std::ostream& os, const SparseMatrixCSR& a, bool symmetric = false)
{
    if (symmetric && !a.is_symmetric(0.0)) throw std::invalid_argument("write_matrix_market: matrix not symmetric");
    std::size_t count = 0;
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t p = a.offsets()[r]; p < a.offsets()[r + 1]; ++p)
            if (!symmetric || a.columns()[p] <= r) ++count;
    os << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general") << '\n';
    os << a.rows() << ' ' << a.cols() << ' ' << count << '\n';
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t p = a.offsets()[r]; p < a.offsets()[r + 1]; ++p) {
            const std::size_t c = a.columns()[p];
            if (symmetric && c > r) continue;
            os << r + 1 << ' ' << c + 1 << ' ' << format_real(a.values()[p]) << '\n';
        }
}

inline void write_matrix_market(std::ostream& os, const DenseMatrix& a, bool symmetric = false)
{
    write_matrix_market(os, SparseMatrixCSR::from_dense(a), symmetric);
}

inline SparseMatrixCSR read_matrix_market(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line)) throw IoError("matrix market: empty input");
    std::istringstream banner(line);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    auto lower = [](std::string s) {
        for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        return s;
    };
    if (tag != "%%MatrixMarket" || lower(object) != "matrix" || lower(format) != "coordinate")
        throw IoError("matrix market: unsupported header '" + line + "'");
    if (lower(field) != "real" && lower(field) != "double" && lower(field) != "integer")
        throw IoError("matrix market: unsupported field '" + field + "'");
    const std::string sym = lower(symmetry);
    if (sym != "general" && sym != "symmetric") throw IoError("matrix market: unsupported symmetry '" + symmetry + "'");

    while (std::getline(is, line))
        if (!line.empty() && line[0] != '%') break;
    std::size_t rows = 0, cols = 0, count = 0;
    {
        std::istringstream sz(line);
        if (!(sz >> rows >> cols >> count)) throw IoError("matrix market: bad size line '" + line + "'");
    }
    std::vector<Triplet> t;
    t.reserve(sym == "symmetric" ? 2 * count : count);
    for (std::size_t e = 0; e < count; ++e) {
        std::size_t r = 0, c = 0;
        std::string value;
        if (!(is >> r >> c >> value)) throw IoError("matrix market: truncated entry list");
        if (r == 0 || c == 0 || r > rows || c > cols) throw IoError("matrix market: index out of range");
        const double v = std::stod(value);
        t.push_back({r - 1, c - 1, v});
        if (sym == "symmetric" && r != c) t.push_back({c - 1, r - 1, v});
    }
    return SparseMatrixCSR::from_triplets(rows, cols, std::move(t));
}

inline void save_matrix_market(const std::string& path, const SparseMatrixCSR& a, bool symmetric = false)
{
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_matrix_market(os, a, symmetric);
    if (!os) throw IoError("write failed for '" + path + "'");
}

inline SparseMatrixCSR load_matrix_market(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "' for reading");
    try {
        return read_matrix_market(is);
    } catch (const IoError& e) {
        throw IoError(path + ": " + e.what());
    }
}

}  // namespace sgfem
