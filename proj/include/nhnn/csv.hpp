#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "nhnn/common.hpp"

namespace nhnn {

// Writes a matrix as CSV with a header row; row order is index order.
inline void write_matrix_csv(const MatD& m, const std::string& path,
                             const std::string& col_prefix = "c") {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw MalformedFile("cannot open '" + path + "' for writing");
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << col_prefix << j;
    os << "\n";
    os << std::setprecision(12);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << m(i, j);
        os << "\n";
    }
}

inline MatD read_matrix_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw MalformedFile("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(is, line)) throw MalformedFile("empty CSV");
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size())
            throw MalformedFile("ragged CSV row in '" + path + "'");
        rows.push_back(std::move(row));
    }
    MatD m(static_cast<Eigen::Index>(rows.size()),
           rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    return m;
}

}  // namespace nhnn
