#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "geometry.hpp"

namespace mln {

// All numeric CSV output uses 17 significant digits, '.' separators and LF
// line endings, so identical runs produce byte-identical files.
std::string format_number(double v);

void write_grid_function_csv(const std::filesystem::path& path,
                             const Geometry& g, const GridFunction& u);

GridFunction read_grid_function_csv(const std::filesystem::path& path,
                                    const Geometry& g, Tag expected);

// Long format (t, x, value) over the extended nodes.
void write_trajectory_csv(const std::filesystem::path& path, const Geometry& g,
                          const Trajectory& traj);

// One CSV per frame in a directory: frame_0000.csv, ...
void write_trajectory_frames(const std::filesystem::path& dir,
                             const Geometry& g, const Trajectory& traj);

// Coordinate-format matrix dump: row, col, value (nonzeros only).
void write_matrix_coo(const std::filesystem::path& path,
                      const Eigen::MatrixXd& A);

// Generic table writer: header row plus rows of preformatted cells.
void write_table_csv(const std::filesystem::path& path,
                     const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace mln
