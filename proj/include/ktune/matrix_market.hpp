#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "ktune/csr.hpp"

namespace ktune {

struct MmInfo {
    index_t n = 0;
    index_t entries = 0;  // stored coordinate entries, before duplicate folding
    bool symmetric = false;
};

namespace detail {

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

struct MmEntry {
    index_t row, col;
    double value;
};

inline MmInfo parse_mm_header(std::istream& in, const std::string& name) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "matrix market: empty file: " + name);
    std::istringstream hs(line);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    require(banner == "%%MatrixMarket", "matrix market: malformed header line: " + name);
    require(lower(object) == "matrix" && lower(format) == "coordinate",
            "matrix market: only coordinate matrices are supported: " + name);
    const std::string f = lower(field);
    require(f != "pattern" && f != "complex",
            "matrix market: unsupported field type '" + f + "': " + name);
    require(f == "real", "matrix market: only real matrices are supported: " + name);
    const std::string sym = lower(symmetry);
    require(sym == "general" || sym == "symmetric",
            "matrix market: unsupported symmetry '" + sym + "': " + name);

    // Skip comments, then the size line.
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '%') continue;
        break;
    }
    std::istringstream ss(line);
    index_t rows = -1, cols = -1, entries = -1;
    ss >> rows >> cols >> entries;
    require(rows > 0 && cols > 0 && entries >= 0, "matrix market: malformed size line: " + name);
    require(rows == cols, "matrix market: matrix is not square: " + name);
    return MmInfo{rows, entries, sym == "symmetric"};
}

inline std::vector<MmEntry> read_mm_entries(std::istream& in, const MmInfo& info,
                                            const std::string& name) {
    std::vector<MmEntry> coo;
    coo.reserve(static_cast<std::size_t>(info.entries));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ss(line);
        index_t i, j;
        double v;
        require(static_cast<bool>(ss >> i >> j >> v),
                "matrix market: malformed entry line: " + name);
        require(i >= 1 && i <= info.n && j >= 1 && j <= info.n,
                "matrix market: index out of range: " + name);
        coo.push_back({i - 1, j - 1, v});  // 1-based on disk, 0-based internally
    }
    require(static_cast<index_t>(coo.size()) == info.entries,
            "matrix market: entry count does not match size line: " + name);
    return coo;
}

/// Sorted CSR from coordinate entries; duplicate coordinates are summed.
inline CsrMatrix coo_to_csr(index_t n, std::vector<MmEntry>& coo) {
    std::sort(coo.begin(), coo.end(), [](const MmEntry& a, const MmEntry& b) {
        return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    CsrMatrix a;
    a.n = n;
    a.row_ptr.assign(n + 1, 0);
    for (std::size_t k = 0; k < coo.size();) {
        std::size_t e = k + 1;
        double v = coo[k].value;
        while (e < coo.size() && coo[e].row == coo[k].row && coo[e].col == coo[k].col)
            v += coo[e++].value;
        a.col_idx.push_back(coo[k].col);
        a.values.push_back(v);
        ++a.row_ptr[coo[k].row + 1];
        k = e;
    }
    for (index_t i = 0; i < n; ++i) a.row_ptr[i + 1] += a.row_ptr[i];
    return a;
}

inline CsrMatrix transpose(const CsrMatrix& a) {
    CsrMatrix t;
    t.n = a.n;
    t.row_ptr.assign(a.n + 1, 0);
    for (index_t c : a.col_idx) ++t.row_ptr[c + 1];
    for (index_t i = 0; i < a.n; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
    t.col_idx.resize(a.nnz());
    t.values.resize(a.nnz());
    std::vector<index_t> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
    for (index_t i = 0; i < a.n; ++i) {
        for (index_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            index_t j = a.col_idx[k];
            t.col_idx[next[j]] = i;
            t.values[next[j]] = a.values[k];
            ++next[j];
        }
    }
    return t;
}

inline bool exactly_symmetric(const CsrMatrix& a) {
    CsrMatrix t = transpose(a);
    return t.row_ptr == a.row_ptr && t.col_idx == a.col_idx && t.values == a.values;
}

inline SymCsrMatrix fold_upper(const CsrMatrix& a) {
    SymCsrMatrix s;
    s.n = a.n;
    s.row_ptr.assign(a.n + 1, 0);
    for (index_t i = 0; i < a.n; ++i) {
        for (index_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            if (a.col_idx[k] < i) continue;
            s.col_idx.push_back(a.col_idx[k]);
            s.values.push_back(a.values[k]);
            ++s.row_ptr[i + 1];
        }
    }
    for (index_t i = 0; i < a.n; ++i) s.row_ptr[i + 1] += s.row_ptr[i];
    return s;
}

}  // namespace detail

/// Header probe without loading the entries (used for solver dispatch).
inline MmInfo probe_matrix_market(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "matrix market: cannot open " + path.string());
    return detail::parse_mm_header(in, path.string());
}

/// Loads a coordinate Matrix Market file (real, general or symmetric).
/// want_symmetric selects the return type: a symmetric file loads into
/// SymCsrMatrix storage (diagonal + upper triangle), any file into a full
/// CsrMatrix. A general file with want_symmetric is accepted only when the
/// matrix is exactly symmetric.
inline std::variant<CsrMatrix, SymCsrMatrix> load_matrix_market(
    const std::filesystem::path& path, bool want_symmetric) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "matrix market: cannot open " + path.string());
    const std::string name = path.string();
    MmInfo info = detail::parse_mm_header(in, name);
    std::vector<detail::MmEntry> coo = detail::read_mm_entries(in, info, name);

    if (info.symmetric) {
        // Entries of a symmetric file may sit in either triangle;
        // mirror everything into the upper one.
        for (auto& e : coo)
            if (e.row > e.col) std::swap(e.row, e.col);
        CsrMatrix upper = detail::coo_to_csr(info.n, coo);
        SymCsrMatrix s;
        static_cast<CsrMatrix&>(s) = std::move(upper);
        s.validate();
        if (want_symmetric) return s;
        return expand_symmetric(s);
    }

    CsrMatrix a = detail::coo_to_csr(info.n, coo);
    a.validate();
    if (!want_symmetric) return a;
    require(detail::exactly_symmetric(a),
            "matrix market: general file is not numerically symmetric: " + name);
    SymCsrMatrix s = detail::fold_upper(a);
    s.validate();
    return s;
}

inline CsrMatrix load_matrix_market_general(const std::filesystem::path& path) {
    return std::get<CsrMatrix>(load_matrix_market(path, false));
}

inline SymCsrMatrix load_matrix_market_symmetric(const std::filesystem::path& path) {
    return std::get<SymCsrMatrix>(load_matrix_market(path, true));
}

namespace detail {

inline void write_mm_body(std::ofstream& out, const CsrMatrix& a, bool as_lower) {
    out << a.n << ' ' << a.n << ' ' << a.nnz() << '\n';
    char buf[64];
    for (index_t i = 0; i < a.n; ++i) {
        for (index_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            // 17 significant digits round-trip a double exactly.
            std::snprintf(buf, sizeof buf, "%.17g", a.values[k]);
            if (as_lower)
                out << a.col_idx[k] + 1 << ' ' << i + 1 << ' ' << buf << '\n';
            else
                out << i + 1 << ' ' << a.col_idx[k] + 1 << ' ' << buf << '\n';
        }
    }
}

}  // namespace detail

inline void write_matrix_market(const std::filesystem::path& path, const CsrMatrix& a) {
    std::ofstream out(path);
    require(static_cast<bool>(out), "matrix market: cannot write " + path.string());
    out << "%%MatrixMarket matrix coordinate real general\n";
    detail::write_mm_body(out, a, false);
    require(static_cast<bool>(out), "matrix market: write failed: " + path.string());
}

/// Symmetric writer emits the stored upper triangle transposed, i.e. the
/// conventional lower-triangle form of the symmetric Matrix Market format.
inline void write_matrix_market(const std::filesystem::path& path, const SymCsrMatrix& s) {
    std::ofstream out(path);
    require(static_cast<bool>(out), "matrix market: cannot write " + path.string());
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    detail::write_mm_body(out, s, true);
    require(static_cast<bool>(out), "matrix market: write failed: " + path.string());
}

}  // namespace ktune
