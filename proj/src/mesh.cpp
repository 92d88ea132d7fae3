#include "bulksurf/mesh.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include "bulksurf/errors.hpp"

namespace bulksurf {

namespace {

double signed_area(const Point& a, const Point& b, const Point& c) {
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

std::string edge_name(std::size_t e, const std::array<int, 2>& edge) {
    std::ostringstream os;
    os << "boundary edge " << e << " (" << edge[0] << " -> " << edge[1] << ")";
    return os.str();
}

}  // namespace

MeshBundle::MeshBundle(std::vector<Point> nodes, std::vector<std::array<int, 3>> triangles,
                       std::vector<std::array<int, 2>> boundary_edges)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)), boundary_edges_(std::move(boundary_edges)) {
    const int n = static_cast<int>(nodes_.size());
    if (n < 3) throw MeshError("mesh needs at least 3 nodes");
    if (triangles_.empty()) throw MeshError("mesh has no triangles");
    if (boundary_edges_.size() < 3) throw MeshError("boundary loop needs at least 3 edges");

    // Triangles: valid indices, nonzero area; clockwise ones are flipped.
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        auto& tri = triangles_[t];
        for (int v : tri) {
            if (v < 0 || v >= n) {
                throw MeshError("triangle " + std::to_string(t) + " references missing node " + std::to_string(v));
            }
        }
        const double a = signed_area(nodes_[tri[0]], nodes_[tri[1]], nodes_[tri[2]]);
        if (a == 0.0 || !std::isfinite(a)) {
            throw MeshError("triangle " + std::to_string(t) + " is degenerate");
        }
        if (a < 0.0) std::swap(tri[1], tri[2]);
    }

    // Boundary loop: valid indices, chained, closed, each node once.
    boundary_index_.assign(n, -1);
    const std::size_t nb = boundary_edges_.size();
    for (std::size_t e = 0; e < nb; ++e) {
        const auto& edge = boundary_edges_[e];
        for (int v : edge) {
            if (v < 0 || v >= n) throw MeshError(edge_name(e, edge) + " references missing node " + std::to_string(v));
        }
        if (edge[0] == edge[1]) throw MeshError(edge_name(e, edge) + " is degenerate");
        const auto& next = boundary_edges_[(e + 1) % nb];
        if (edge[1] != next[0]) {
            throw MeshError(edge_name(e, edge) + " is not followed by an edge starting at node " +
                            std::to_string(edge[1]) + " (boundary loop is open or out of order)");
        }
        if (boundary_index_[edge[0]] != -1) {
            throw MeshError(edge_name(e, edge) + " revisits node " + std::to_string(edge[0]) +
                            " (boundary must be a single simple loop)");
        }
        boundary_index_[edge[0]] = static_cast<int>(e);
    }

    // The loop must coincide with the set of edges owned by exactly one
    // triangle; anything else means a second boundary component.
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& tri : triangles_) {
        for (int k = 0; k < 3; ++k) {
            int a = tri[k], b = tri[(k + 1) % 3];
            edge_count[{std::min(a, b), std::max(a, b)}] += 1;
        }
    }
    std::size_t free_edges = 0;
    for (const auto& [key, count] : edge_count) {
        if (count > 2) {
            throw MeshError("edge (" + std::to_string(key.first) + ", " + std::to_string(key.second) +
                            ") is shared by more than two triangles");
        }
        if (count == 1) ++free_edges;
    }
    for (std::size_t e = 0; e < nb; ++e) {
        const auto& edge = boundary_edges_[e];
        auto it = edge_count.find({std::min(edge[0], edge[1]), std::max(edge[0], edge[1])});
        if (it == edge_count.end() || it->second != 1) {
            throw MeshError(edge_name(e, edge) + " is not a free edge of the triangulation");
        }
    }
    if (free_edges != nb) {
        throw MeshError("triangulation has " + std::to_string(free_edges) + " free edges but the boundary loop has " +
                        std::to_string(nb) + " (multiple boundary components are not supported)");
    }

    // Store the loop counterclockwise.
    double loop_area = 0.0;
    for (const auto& edge : boundary_edges_) {
        const auto& p = nodes_[edge[0]];
        const auto& q = nodes_[edge[1]];
        loop_area += 0.5 * (p.x * q.y - q.x * p.y);
    }
    if (loop_area < 0.0) {
        std::vector<std::array<int, 2>> reversed;
        reversed.reserve(nb);
        for (std::size_t e = nb; e-- > 0;) reversed.push_back({boundary_edges_[e][1], boundary_edges_[e][0]});
        boundary_edges_ = std::move(reversed);
    }

    boundary_index_.assign(n, -1);
    trace_map_.resize(nb);
    for (std::size_t e = 0; e < nb; ++e) {
        trace_map_[e] = boundary_edges_[e][0];
        boundary_index_[boundary_edges_[e][0]] = static_cast<int>(e);
    }

    for (std::size_t t = 0; t < triangles_.size(); ++t) bulk_area_ += triangle_area(t);
    for (std::size_t e = 0; e < nb; ++e) boundary_length_ += edge_length(e);
}

double MeshBundle::triangle_area(std::size_t t) const {
    const auto& tri = triangles_.at(t);
    return signed_area(nodes_[tri[0]], nodes_[tri[1]], nodes_[tri[2]]);
}

double MeshBundle::edge_length(std::size_t e) const {
    const auto& edge = boundary_edges_.at(e);
    const auto& p = nodes_[edge[0]];
    const auto& q = nodes_[edge[1]];
    return std::hypot(q.x - p.x, q.y - p.y);
}

Eigen::VectorXd MeshBundle::restrict_to_boundary(const Eigen::VectorXd& bulk) const {
    if (static_cast<std::size_t>(bulk.size()) != nodes_.size()) {
        throw Error("restrict_to_boundary: vector size does not match the node count");
    }
    Eigen::VectorXd out(trace_map_.size());
    for (std::size_t k = 0; k < trace_map_.size(); ++k) out[k] = bulk[trace_map_[k]];
    return out;
}

MeshBundle gen_disk_mesh(int rings, int sectors) {
    if (rings < 1) throw MeshError("gen_disk_mesh: rings must be >= 1");
    if (sectors < 3) throw MeshError("gen_disk_mesh: sectors must be >= 3 (degenerate polygon)");

    std::vector<Point> nodes;
    nodes.reserve(1 + static_cast<std::size_t>(rings) * sectors);
    nodes.push_back({0.0, 0.0});
    for (int k = 1; k <= rings; ++k) {
        const double r = static_cast<double>(k) / rings;
        for (int j = 0; j < sectors; ++j) {
            const double theta = 2.0 * std::numbers::pi * j / sectors;
            nodes.push_back({r * std::cos(theta), r * std::sin(theta)});
        }
    }
    auto id = [sectors](int ring, int j) { return 1 + (ring - 1) * sectors + ((j % sectors) + sectors) % sectors; };

    std::vector<std::array<int, 3>> tris;
    for (int j = 0; j < sectors; ++j) tris.push_back({0, id(1, j), id(1, j + 1)});
    for (int k = 1; k < rings; ++k) {
        for (int j = 0; j < sectors; ++j) {
            const int a = id(k, j), b = id(k, j + 1), c = id(k + 1, j), d = id(k + 1, j + 1);
            tris.push_back({a, c, d});
            tris.push_back({a, d, b});
        }
    }

    std::vector<std::array<int, 2>> bedges;
    for (int j = 0; j < sectors; ++j) bedges.push_back({id(rings, j), id(rings, j + 1)});
    return MeshBundle(std::move(nodes), std::move(tris), std::move(bedges));
}

MeshBundle read_mesh(std::istream& in) {
    // Tokenize, remembering the line each token came from.
    struct Token {
        std::string text;
        int line;
    };
    std::vector<Token> tokens;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) tokens.push_back({tok, lineno});
    }

    std::size_t pos = 0;
    auto fail = [&](const std::string& msg) -> MeshError {
        const int at = pos < tokens.size() ? tokens[pos].line : lineno;
        return MeshError("line " + std::to_string(at) + ": " + msg);
    };
    auto expect_word = [&](const std::string& word) {
        if (pos >= tokens.size() || tokens[pos].text != word) throw fail("expected '" + word + "'");
        ++pos;
    };
    auto next_long = [&](const char* what) {
        if (pos >= tokens.size()) throw fail(std::string("unexpected end of file while reading ") + what);
        const auto& t = tokens[pos];
        std::size_t used = 0;
        long v = 0;
        try {
            v = std::stol(t.text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != t.text.size()) throw fail(std::string("invalid integer '") + t.text + "' in " + what);
        ++pos;
        return v;
    };
    auto next_double = [&](const char* what) {
        if (pos >= tokens.size()) throw fail(std::string("unexpected end of file while reading ") + what);
        const auto& t = tokens[pos];
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(t.text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != t.text.size() || !std::isfinite(v)) {
            throw fail(std::string("invalid number '") + t.text + "' in " + what);
        }
        ++pos;
        return v;
    };

    expect_word("nodes");
    const long n = next_long("header");
    expect_word("triangles");
    const long nt = next_long("header");
    expect_word("bedges");
    const long nb = next_long("header");
    if (n <= 0 || nt <= 0 || nb <= 0) throw fail("header counts must be positive");

    std::vector<Point> nodes(n);
    for (auto& p : nodes) {
        p.x = next_double("node coordinates");
        p.y = next_double("node coordinates");
    }
    std::vector<std::array<int, 3>> tris(nt);
    for (auto& t : tris) {
        for (auto& v : t) v = static_cast<int>(next_long("triangle"));
    }
    std::vector<std::array<int, 2>> bedges(nb);
    for (auto& e : bedges) {
        for (auto& v : e) v = static_cast<int>(next_long("boundary edge"));
    }
    if (pos != tokens.size()) throw fail("trailing data after " + std::to_string(nb) + " boundary edges");
    return MeshBundle(std::move(nodes), std::move(tris), std::move(bedges));
}

MeshBundle load_mesh(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open mesh file " + path.string());
    return read_mesh(in);
}

void write_mesh(const MeshBundle& mesh, std::ostream& out) {
    out << "nodes " << mesh.num_nodes() << " triangles " << mesh.triangles().size() << " bedges "
        << mesh.boundary_edges().size() << '\n';
    out << std::setprecision(17);
    for (const auto& p : mesh.nodes()) out << p.x << ' ' << p.y << '\n';
    for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    for (const auto& e : mesh.boundary_edges()) out << e[0] << ' ' << e[1] << '\n';
}

void save_mesh(const MeshBundle& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw MeshError("cannot write mesh file " + path.string());
    write_mesh(mesh, out);
}

}  // namespace bulksurf
