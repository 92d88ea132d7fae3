#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace bulksurf {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// 2-D triangulation of the bulk together with its closed boundary polyline.
///
/// Boundary unknowns are not separate degrees of freedom: boundary node k is
/// bulk node trace_map[k], so a pair (z, z_G) built through restrict_to_boundary
/// satisfies the trace condition exactly. Immutable after construction.
class MeshBundle {
public:
    MeshBundle(std::vector<Point> nodes, std::vector<std::array<int, 3>> triangles,
               std::vector<std::array<int, 2>> boundary_edges);

    const std::vector<Point>& nodes() const noexcept { return nodes_; }
    const std::vector<std::array<int, 3>>& triangles() const noexcept { return triangles_; }
    /// Edges in loop order, counterclockwise; edge k runs from boundary node k to k+1.
    const std::vector<std::array<int, 2>>& boundary_edges() const noexcept { return boundary_edges_; }
    /// boundary-local index -> bulk node index
    const std::vector<int>& trace_map() const noexcept { return trace_map_; }
    /// bulk node index -> boundary-local index, or -1 for interior nodes
    const std::vector<int>& boundary_index() const noexcept { return boundary_index_; }

    std::size_t num_nodes() const noexcept { return nodes_.size(); }
    std::size_t num_boundary_nodes() const noexcept { return trace_map_.size(); }
    double bulk_area() const noexcept { return bulk_area_; }
    double boundary_length() const noexcept { return boundary_length_; }

    double triangle_area(std::size_t t) const;
    double edge_length(std::size_t e) const;

    Eigen::VectorXd restrict_to_boundary(const Eigen::VectorXd& bulk) const;

private:
    std::vector<Point> nodes_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<std::array<int, 2>> boundary_edges_;
    std::vector<int> trace_map_;
    std::vector<int> boundary_index_;
    double bulk_area_ = 0.0;
    double boundary_length_ = 0.0;
};

/// Unit-disk triangulation: `rings` concentric rings of `sectors` nodes each
/// around a center node. The outermost ring is the boundary polyline.
MeshBundle gen_disk_mesh(int rings, int sectors);

MeshBundle load_mesh(const std::filesystem::path& path);
MeshBundle read_mesh(std::istream& in);
void save_mesh(const MeshBundle& mesh, const std::filesystem::path& path);
void write_mesh(const MeshBundle& mesh, std::ostream& out);

}  // namespace bulksurf
