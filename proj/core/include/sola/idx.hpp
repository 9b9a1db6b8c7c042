#pragma once

#include <string>

#include <Eigen/Dense>

namespace sola {

// IDX image/label container IO (the MNIST on-disk format: big-endian
// magic + dims header, then raw unsigned bytes).

// returns one image per row, pixels scaled to [0,1]; optionally reports
// the stored height/width
Eigen::MatrixXd load_idx_images(const std::string& path, int* rows = nullptr,
                                int* cols = nullptr);

Eigen::VectorXi load_idx_labels(const std::string& path);

// inverse of the loaders (pixels are rounded back to bytes)
void write_idx_images(const std::string& path, const Eigen::MatrixXd& pixels, int rows,
                      int cols);
void write_idx_labels(const std::string& path, const Eigen::VectorXi& labels);

}  // namespace sola
