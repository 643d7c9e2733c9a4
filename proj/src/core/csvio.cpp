#include "csvio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mln {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

const char* node_tag_of(const Geometry& g, int ext) {
    if (ext == g.ext_left_boundary() || ext == g.ext_right_boundary())
        return "boundary";
    if (ext > g.ext_left_boundary() && ext < g.ext_right_boundary())
        return "interior";
    return "collar";
}

}  // namespace

void write_grid_function_csv(const std::filesystem::path& path,
                             const Geometry& g, const GridFunction& u) {
    GridFunction ext = extend_by_zero(g, u);
    std::ofstream out = open_out(path);
    out << "node_index,x,tag,value\n";
    const auto& xs = g.extended_coords();
    for (int i = 0; i < g.extended_nodes(); ++i)
        out << i << ',' << format_number(xs[i]) << ',' << node_tag_of(g, i)
            << ',' << format_number(ext.values[i]) << '\n';
}

GridFunction read_grid_function_csv(const std::filesystem::path& path,
                                    const Geometry& g, Tag expected) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::string line;
    std::getline(in, line);  // header
    GridFunction ext = make_grid_function(g, Tag::Extended);
    int count = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');
        const int idx = std::stoi(cell);
        std::getline(row, cell, ',');  // x
        std::getline(row, cell, ',');  // tag
        std::getline(row, cell, ',');
        if (idx < 0 || idx >= g.extended_nodes())
            throw ConfigError(path.string() + ": node index out of range");
        ext.values[idx] = std::stod(cell);
        ++count;
    }
    if (count != g.extended_nodes())
        throw ConfigError(path.string() + ": expected " +
                          std::to_string(g.extended_nodes()) + " rows, got " +
                          std::to_string(count));
    return restrict_to(g, ext, expected);
}

void write_trajectory_csv(const std::filesystem::path& path, const Geometry& g,
                          const Trajectory& traj) {
    std::ofstream out = open_out(path);
    out << "t,x,value\n";
    const auto& xs = g.extended_coords();
    for (size_t m = 0; m < traj.frames.size(); ++m) {
        const std::string ts = format_number(traj.time.t(static_cast<int>(m)));
        for (int i = 0; i < g.extended_nodes(); ++i)
            out << ts << ',' << format_number(xs[i]) << ','
                << format_number(traj.frames[m][i]) << '\n';
    }
}

void write_trajectory_frames(const std::filesystem::path& dir,
                             const Geometry& g, const Trajectory& traj) {
    std::filesystem::create_directories(dir);
    const auto& xs = g.extended_coords();
    for (size_t m = 0; m < traj.frames.size(); ++m) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%04zu.csv", m);
        std::ofstream out = open_out(dir / name);
        out << "x,value\n";
        for (int i = 0; i < g.extended_nodes(); ++i)
            out << format_number(xs[i]) << ','
                << format_number(traj.frames[m][i]) << '\n';
    }
}

void write_matrix_coo(const std::filesystem::path& path,
                      const Eigen::MatrixXd& A) {
    std::ofstream out = open_out(path);
    out << "row,col,value\n";
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j)
            if (A(i, j) != 0.0)
                out << i << ',' << j << ',' << format_number(A(i, j)) << '\n';
}

void write_table_csv(const std::filesystem::path& path,
                     const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out = open_out(path);
    for (size_t c = 0; c < header.size(); ++c)
        out << header[c] << (c + 1 < header.size() ? ',' : '\n');
    for (const auto& row : rows)
        for (size_t c = 0; c < row.size(); ++c)
            out << row[c] << (c + 1 < row.size() ? ',' : '\n');
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
    std::ofstream out = open_out(path);
    out << content;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

}  // namespace mln
