#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "evpr/reconstruct.hpp"

namespace evpr {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One row per frame. Timestamps are frame end times in seconds and must be
/// strictly increasing.
struct DescriptorSet {
    RowMatrix descriptors;
    std::vector<double> timestamps;
    std::string label;

    Eigen::Index count() const { return descriptors.rows(); }
    Eigen::Index dim() const { return descriptors.cols(); }
};

/// Average-pools each channel onto a g x g grid, flattens to 3*g*g values,
/// centres and L2-normalises. Constant frames give the zero vector.
Eigen::VectorXd grid_descriptor(const RenderedFrame& frame, int grid);

DescriptorSet describe_frames(std::span<const RenderedFrame> frames, int grid, std::string label);

/// Throws DataError if rows are non-finite or timestamps are not strictly increasing.
void validate(const DescriptorSet& set);

DescriptorSet select_rows(const DescriptorSet& set, std::span<const std::size_t> rows);

// Descriptor interchange (EVPD) -------------------------------------------

std::vector<std::uint8_t> encode_descriptors(const DescriptorSet& set);
DescriptorSet decode_descriptors(std::span<const std::uint8_t> bytes);
void save_descriptors(const DescriptorSet& set, const std::string& path);
DescriptorSet load_descriptors(const std::string& path);

}  // namespace evpr
