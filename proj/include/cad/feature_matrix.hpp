#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cad {

/// Window matrix X: rows are features (URLs, price-change slots), columns
/// are entities (IPs, stock symbols). Stored column-major so the data
/// vectors (columns) are contiguous. Immutable once a window yields it.
struct FeatureMatrix {
    std::vector<std::string> row_ids;
    std::vector<std::string> col_ids;
    std::vector<double> data; // column-major, rows() * cols()
    std::size_t window_id = 0;
    std::int64_t start = 0;
    std::int64_t end = 0;

    FeatureMatrix() = default;
    FeatureMatrix(std::vector<std::string> rows, std::vector<std::string> cols)
        : row_ids(std::move(rows)), col_ids(std::move(cols)),
          data(row_ids.size() * col_ids.size(), 0.0) {}

    std::size_t rows() const { return row_ids.size(); }
    std::size_t cols() const { return col_ids.size(); }

    double at(std::size_t r, std::size_t c) const { return data[c * rows() + r]; }
    double& at(std::size_t r, std::size_t c) { return data[c * rows() + r]; }

    std::span<const double> col(std::size_t c) const {
        return std::span<const double>(data).subspan(c * rows(), rows());
    }

    /// Copy of the selected columns, preserving order of `indices`.
    FeatureMatrix select_columns(std::span<const std::size_t> indices) const {
        std::vector<std::string> ids;
        ids.reserve(indices.size());
        for (std::size_t j : indices) ids.push_back(col_ids[j]);
        FeatureMatrix out(row_ids, std::move(ids));
        out.window_id = window_id;
        out.start = start;
        out.end = end;
        const std::size_t m = rows();
        for (std::size_t c = 0; c < indices.size(); ++c) {
            const auto src = col(indices[c]);
            std::copy(src.begin(), src.end(), out.data.begin() + static_cast<std::ptrdiff_t>(c * m));
        }
        return out;
    }
};

} // namespace cad
