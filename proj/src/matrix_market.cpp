#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "bura/error.hpp"
#include "bura/matrix.hpp"

namespace bura {
namespace {

std::string lowered(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

[[noreturn]] void malformed(const std::string& what, long line) {
    throw Error(ErrorKind::Io, "Matrix Market line " + std::to_string(line) + ": " + what);
}

}  // namespace

SparseSpdMatrix read_matrix_market(std::istream& in) {
    std::string line;
    long lineno = 0;
    if (!std::getline(in, line)) throw Error(ErrorKind::Io, "empty Matrix Market stream");
    ++lineno;

    std::istringstream banner(line);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (lowered(tag) != "%%matrixmarket") malformed("missing %%MatrixMarket banner", lineno);
    object = lowered(object);
    format = lowered(format);
    field = lowered(field);
    symmetry = lowered(symmetry);
    if (object != "matrix" || format != "coordinate") malformed("only 'matrix coordinate' is supported", lineno);
    if (field != "real" && field != "integer" && field != "double") {
        malformed("unsupported field '" + field + "'", lineno);
    }
    if (symmetry != "symmetric" && symmetry != "general") {
        malformed("unsupported symmetry '" + symmetry + "'", lineno);
    }
    const bool symmetric = symmetry == "symmetric";

    long rows = 0, cols = 0, nnz = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '%') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream size_line(line);
        if (!(size_line >> rows >> cols >> nnz)) malformed("bad size line", lineno);
        break;
    }
    if (rows <= 0 || rows != cols) malformed("matrix must be square with positive size", lineno);
    if (nnz < 0) malformed("negative entry count", lineno);
    if (rows > std::numeric_limits<int>::max()) malformed("dimension too large", lineno);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(symmetric ? 2 * nnz : nnz);
    long seen = 0;
    while (seen < nnz && std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '%') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream entry(line);
        long i = 0, j = 0;
        double v = 0.0;
        if (!(entry >> i >> j >> v)) malformed("bad entry", lineno);
        if (i < 1 || i > rows || j < 1 || j > cols) malformed("index out of range", lineno);
        if (symmetric && j > i) malformed("symmetric storage must hold the lower triangle only", lineno);
        triplets.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
        if (symmetric && i != j) triplets.emplace_back(static_cast<int>(j - 1), static_cast<int>(i - 1), v);
        ++seen;
    }
    if (seen != nnz) {
        throw Error(ErrorKind::Io, "expected " + std::to_string(nnz) + " entries, found " + std::to_string(seen));
    }
    return SparseSpdMatrix::from_triplets(static_cast<int>(rows), triplets);
}

SparseSpdMatrix read_matrix_market_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const SparseSpdMatrix& a) {
    const auto& s = a.storage();
    long nnz = 0;
    for (int i = 0; i < s.outerSize(); ++i)
        for (SparseSpdMatrix::Storage::InnerIterator it(s, i); it; ++it)
            if (it.col() <= it.row()) ++nnz;
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    out << a.n() << ' ' << a.n() << ' ' << nnz << '\n';
    out << std::setprecision(17);
    for (int i = 0; i < s.outerSize(); ++i)
        for (SparseSpdMatrix::Storage::InnerIterator it(s, i); it; ++it)
            if (it.col() <= it.row()) out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

void write_dense_csv(std::ostream& out, const Eigen::MatrixXd& a) {
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (j) out << ',';
            out << a(i, j);
        }
        out << '\n';
    }
}

}  // namespace bura
