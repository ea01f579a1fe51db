#ifndef TGMRF_IO_HPP
#define TGMRF_IO_HPP

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tgmrf/lattice.hpp"

namespace tgmrf {

namespace io {

/// Shortest round-trippable decimal form of a double.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back = 0.0;
    std::sscanf(buf, "%lg", &back);
    if (back == v) {
        // Try trimming digits while the value still round-trips.
        for (int prec = 1; prec <= 16; ++prec) {
            char shorter[40];
            std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
            std::sscanf(shorter, "%lg", &back);
            if (back == v) return shorter;
        }
    }
    return buf;
}

inline void write_csv(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline Matrix read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw std::runtime_error("bad number '" + cell + "' in " + path.string());
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error("ragged rows in " + path.string());
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("empty csv: " + path.string());
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.front().size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

/// Write a P5 (binary, maxval 255) PGM; values clamped and rounded.
inline void write_pgm(const std::filesystem::path& path, const Matrix& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
    for (Eigen::Index i = 0; i < img.rows(); ++i)
        for (Eigen::Index j = 0; j < img.cols(); ++j) {
            const double v = std::min(255.0, std::max(0.0, img(i, j)));
            out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v))));
        }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

/// Read P5 or P2 PGM into a double matrix (0..maxval rescaled to 0..255 when
/// maxval differs).
inline Matrix read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    const auto next_token = [&in, &path]() {
        std::string tok;
        while (true) {
            int c = in.get();
            if (c == EOF) throw std::runtime_error("truncated pgm: " + path.string());
            if (c == '#') {
                std::string skip;
                std::getline(in, skip);
                continue;
            }
            if (std::isspace(c)) {
                if (!tok.empty()) return tok;
                continue;
            }
            tok.push_back(static_cast<char>(c));
        }
    };
    const std::string magic = next_token();
    if (magic != "P5" && magic != "P2")
        throw std::runtime_error("unsupported pgm magic '" + magic + "' in " + path.string());
    const int cols = std::stoi(next_token());
    const int rows = std::stoi(next_token());
    const int maxval = std::stoi(next_token());
    if (cols <= 0 || rows <= 0 || maxval <= 0 || maxval > 65535)
        throw std::runtime_error("bad pgm header in " + path.string());
    Matrix img(rows, cols);
    const double scale = 255.0 / maxval;
    if (magic == "P2") {
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) img(i, j) = scale * std::stoi(next_token());
    } else {
        // Binary samples follow the single whitespace after maxval.
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) {
                int lo = in.get();
                if (lo == EOF) throw std::runtime_error("truncated pgm: " + path.string());
                if (maxval > 255) {
                    const int hi = in.get();
                    if (hi == EOF) throw std::runtime_error("truncated pgm: " + path.string());
                    img(i, j) = scale * ((lo << 8) | hi);
                } else {
                    img(i, j) = scale * lo;
                }
            }
    }
    return img;
}

/// Plain-text key=value report, one pair per line.
inline void write_report(const std::filesystem::path& path,
                         const std::vector<std::pair<std::string, std::string>>& kv) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
}

} // namespace io

/// Model description parsed from the config file. Keys: n_rows, n_cols,
/// alpha (number or csv path), beta.n/.ne/.e/.se/.s/.sw/.w/.nw (numbers),
/// boundary_cov ("identity:sigma2" or csv path). '#' starts a comment.
struct ModelConfig {
    int n_rows = 0;
    int n_cols = 0;
    double alpha_scalar = 0.0;
    std::string alpha_path;            // empty means scalar
    std::array<double, 8> beta{};      // kNeighborOffsets order
    double boundary_cov_scale = 1.0;   // identity:sigma2 form
    std::string boundary_cov_path;     // empty means scaled identity
    std::filesystem::path base_dir;    // for resolving relative paths
};

inline ModelConfig parse_model_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path.string());
    ModelConfig cfg;
    cfg.base_dir = path.has_parent_path() ? path.parent_path() : ".";
    bool have_rows = false, have_cols = false, have_alpha = false, have_bcov = false;
    std::array<bool, 8> have_beta{};

    const auto strip = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r\n");
        const auto b = s.find_last_not_of(" \t\r\n");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const auto unquote = [&strip](std::string s) {
        s = strip(s);
        if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                              (s.front() == '\'' && s.back() == '\'')))
            return s.substr(1, s.size() - 2);
        return s;
    };
    const auto looks_numeric = [](const std::string& s) {
        char* end = nullptr;
        std::strtod(s.c_str(), &end);
        return end != s.c_str() && *end == '\0';
    };

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = strip(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                     ": expected key = value");
        const std::string key = strip(line.substr(0, eq));
        const std::string raw = strip(line.substr(eq + 1));
        const std::string val = unquote(raw);

        if (key == "n_rows") {
            cfg.n_rows = std::stoi(val);
            have_rows = true;
        } else if (key == "n_cols") {
            cfg.n_cols = std::stoi(val);
            have_cols = true;
        } else if (key == "alpha") {
            if (looks_numeric(val))
                cfg.alpha_scalar = std::stod(val);
            else
                cfg.alpha_path = val;
            have_alpha = true;
        } else if (key.rfind("beta.", 0) == 0) {
            const std::string name = key.substr(5);
            int idx = -1;
            for (int k = 0; k < 8; ++k)
                if (name == kOffsetNames[static_cast<std::size_t>(k)]) idx = k;
            if (idx < 0)
                throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                         ": unknown beta offset '" + name + "'");
            cfg.beta[static_cast<std::size_t>(idx)] = std::stod(val);
            have_beta[static_cast<std::size_t>(idx)] = true;
        } else if (key == "boundary_cov") {
            if (val.rfind("identity:", 0) == 0) {
                cfg.boundary_cov_scale = std::stod(val.substr(9));
                cfg.boundary_cov_path.clear();
            } else {
                cfg.boundary_cov_path = val;
            }
            have_bcov = true;
        } else {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                     ": unknown key '" + key + "'");
        }
    }
    if (!have_rows || !have_cols || !have_alpha || !have_bcov)
        throw std::runtime_error(path.string() +
                                 ": n_rows, n_cols, alpha and boundary_cov are required");
    for (int k = 0; k < 8; ++k)
        if (!have_beta[static_cast<std::size_t>(k)])
            throw std::runtime_error(path.string() + ": missing beta." +
                                     kOffsetNames[static_cast<std::size_t>(k)]);
    if (cfg.n_rows < 1 || cfg.n_cols < 1)
        throw std::runtime_error(path.string() + ": lattice dimensions must be >= 1");
    return cfg;
}

/// Materialize the precision system described by a config.
inline PrecisionSystem load_model(const ModelConfig& cfg) {
    const LatticeSpec spec(cfg.n_rows, cfg.n_cols);
    NeighborhoodCoefficients coeffs = NeighborhoodCoefficients::homogeneous(1.0, cfg.beta);
    if (cfg.alpha_path.empty()) {
        coeffs = NeighborhoodCoefficients::homogeneous(cfg.alpha_scalar, cfg.beta);
    } else {
        const Matrix grid = io::read_csv(cfg.base_dir / cfg.alpha_path);
        if (grid.rows() != spec.n_rows || grid.cols() != spec.n_cols)
            throw std::runtime_error("alpha grid must be " + std::to_string(spec.n_rows) + "x" +
                                     std::to_string(spec.n_cols));
        std::vector<double> alpha(static_cast<std::size_t>(spec.interior_count()));
        std::vector<std::array<double, 8>> beta(alpha.size(), cfg.beta);
        for (int i = 0; i < spec.n_rows; ++i)
            for (int j = 0; j < spec.n_cols; ++j)
                alpha[static_cast<std::size_t>(i * spec.n_cols + j)] = grid(i, j);
        coeffs = NeighborhoodCoefficients::heterogeneous(std::move(alpha), std::move(beta));
    }
    Matrix sigma_b;
    if (cfg.boundary_cov_path.empty())
        sigma_b = cfg.boundary_cov_scale *
                  Matrix::Identity(spec.boundary_count(), spec.boundary_count());
    else
        sigma_b = io::read_csv(cfg.base_dir / cfg.boundary_cov_path);
    return build_precision(spec, coeffs, sigma_b);
}

} // namespace tgmrf

#endif
