#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "paretoscl/contrastive.hpp"

namespace testing {

inline Eigen::RowVectorXd unit_row(std::mt19937_64& gen, Eigen::Index d) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::RowVectorXd v(d);
    for (Eigen::Index j = 0; j < d; ++j) v[j] = n(gen);
    return v / v.norm();
}

/// Random class-blocked batch with unit rows.
inline paretoscl::ClassBlockedBatch random_batch(std::mt19937_64& gen, int classes, int min_rows, int max_rows,
                                                 Eigen::Index d, double tau) {
    std::uniform_int_distribution<int> rows(min_rows, max_rows);
    paretoscl::ClassBlockedBatch b;
    b.tau = tau;
    std::size_t id = 0;
    for (int k = 0; k < classes; ++k) {
        paretoscl::ClassBlock block;
        block.label = k;
        const int n = rows(gen);
        block.rows.resize(n, d);
        for (int i = 0; i < n; ++i) {
            block.rows.row(i) = unit_row(gen, d);
            block.ids.push_back(id++);
        }
        b.blocks.push_back(std::move(block));
    }
    return b;
}

inline paretoscl::ClassBlockedBatch batch_of(std::vector<std::vector<std::vector<double>>> classes, double tau) {
    paretoscl::ClassBlockedBatch b;
    b.tau = tau;
    std::size_t id = 0;
    for (std::size_t k = 0; k < classes.size(); ++k) {
        paretoscl::ClassBlock block;
        block.label = static_cast<int>(k);
        const auto& rows = classes[k];
        block.rows.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.at(0).size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = 0; j < rows[i].size(); ++j) {
                block.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
            }
            block.ids.push_back(id++);
        }
        b.blocks.push_back(std::move(block));
    }
    return b;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("paretoscl-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing
