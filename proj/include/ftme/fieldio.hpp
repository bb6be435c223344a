#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ftme {

/// Rectangular node grid; node(i, j) = (x_min + i dx, y_min + j dy), last node on the bounds.
struct Grid2D {
    double x_min = -1.0;
    double x_max = 1.0;
    double y_min = -1.0;
    double y_max = 1.0;
    int nx = 2;
    int ny = 2;

    void validate() const;
    double dx() const { return (x_max - x_min) / (nx - 1); }
    double dy() const { return (y_max - y_min) / (ny - 1); }
    double x(int i) const { return i == nx - 1 ? x_max : x_min + i * dx(); }
    double y(int j) const { return j == ny - 1 ? y_max : y_min + j * dy(); }
    std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    /// Row-major: rows are y, i runs fastest.
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }

    /// Parses "xmin:xmax:ymin:ymax:NXxNY".
    static Grid2D parse(const std::string& spec);
    std::string to_spec() const;
};

enum class NodeStatus : std::uint8_t { valid = 0, equilibrium = 1, blow_up = 2, masked = 3 };

struct FieldMeta {
    std::string kind;
    double T = 0.0;
    std::string alpha_policy;
    std::uint64_t seed = 0;
};

struct ScalarField2D {
    Grid2D grid;
    std::vector<double> values;
    std::vector<std::uint8_t> mask;  ///< 1 = valid
    std::vector<NodeStatus> status;
    FieldMeta meta;

    ScalarField2D() = default;
    explicit ScalarField2D(const Grid2D& g);

    double& at(int i, int j) { return values[grid.index(i, j)]; }
    double at(int i, int j) const { return values[grid.index(i, j)]; }
    bool valid(int i, int j) const { return mask[grid.index(i, j)] != 0; }

    std::size_t valid_count() const;
    /// Min / max over valid nodes; nullopt when every node is masked.
    std::optional<std::pair<double, double>> valid_range() const;
};

/// Header `x,y,value,valid`, one row per node (row-major), 17 significant digits, LF.
/// Masked nodes are written with the valid-node maximum.
void export_csv(const ScalarField2D& field, const std::filesystem::path& path);
std::string to_csv(const ScalarField2D& field);

/// Binary 8-bit P5 image, top row = max y. Masked nodes are black.
void export_pgm(const ScalarField2D& field, const std::filesystem::path& path,
                std::optional<std::pair<double, double>> clip = std::nullopt);
std::string to_pgm(const ScalarField2D& field, std::optional<std::pair<double, double>> clip = std::nullopt);

ScalarField2D import_csv(const std::filesystem::path& path);
ScalarField2D parse_csv(const std::string& text);

}  // namespace ftme
