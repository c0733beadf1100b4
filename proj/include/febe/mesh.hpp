#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "febe/common.hpp"

namespace febe {

enum class BoundaryLabel { GammaS, GammaT };

struct BoundaryEdge {
    int a = -1;           // ordered so the adjacent triangle lies on the left
    int b = -1;
    BoundaryLabel label = BoundaryLabel::GammaT;
    int tri = -1;         // parent triangle
};

enum class TriColor { Red, Green, Blue };

// Conforming triangulation with labeled boundary.  Triangles are CCW and
// stored with their refinement reference edge (the longest one) first,
// i.e. between local vertices 0 and 1.
class Mesh {
  public:
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> tris;
    std::vector<BoundaryEdge> boundary;    // closed CCW loop around the domain
    std::vector<int> generation;           // per triangle
    std::vector<TriColor> color;           // per triangle
    double initial_shape_ratio = 0.0;      // max h_K/rho_K of the coarsest mesh

    int num_nodes() const { return static_cast<int>(nodes.size()); }
    int num_tris() const { return static_cast<int>(tris.size()); }
    int num_boundary_edges() const { return static_cast<int>(boundary.size()); }

    double tri_area(int t) const {
        const auto& k = tris[t];
        return 0.5 * cross(nodes[k[1]] - nodes[k[0]], nodes[k[2]] - nodes[k[0]]);
    }

    double tri_diameter(int t) const {
        const auto& k = tris[t];
        double h = 0.0;
        for (int e = 0; e < 3; ++e)
            h = std::max(h, dist(nodes[k[e]], nodes[k[(e + 1) % 3]]));
        return h;
    }

    // diameter of the inscribed ball
    double tri_inball(int t) const {
        const auto& k = tris[t];
        double per = 0.0;
        for (int e = 0; e < 3; ++e) per += dist(nodes[k[e]], nodes[k[(e + 1) % 3]]);
        return 4.0 * tri_area(t) / per;
    }

    double shape_ratio() const {
        double r = 0.0;
        for (int t = 0; t < num_tris(); ++t) r = std::max(r, tri_diameter(t) / tri_inball(t));
        return r;
    }

    double total_area() const {
        double a = 0.0;
        for (int t = 0; t < num_tris(); ++t) a += tri_area(t);
        return a;
    }

    double boundary_length() const {
        double l = 0.0;
        for (const auto& e : boundary) l += dist(nodes[e.a], nodes[e.b]);
        return l;
    }

    // Boundary node indices in loop order (node i is the start of boundary edge i).
    std::vector<int> boundary_loop() const {
        std::vector<int> loop;
        loop.reserve(boundary.size());
        for (const auto& e : boundary) loop.push_back(e.a);
        return loop;
    }

    // index of the boundary edge of a triangle, or -1
    std::vector<int> tri_boundary_edge() const {
        std::vector<int> idx(tris.size(), -1);
        for (int e = 0; e < num_boundary_edges(); ++e) idx[boundary[e].tri] = e;
        return idx;
    }
};

struct MarkSet {
    std::vector<int> tri_indices;
};

namespace detail {

inline void orient_longest_edge_first(const std::vector<Vec2>& nodes, std::array<int, 3>& k) {
    double best = -1.0;
    int rot = 0;
    for (int e = 0; e < 3; ++e) {
        double l = dist(nodes[k[e]], nodes[k[(e + 1) % 3]]);
        if (l > best + 1e-15 * (1.0 + best)) {
            best = l;
            rot = e;
        }
    }
    std::array<int, 3> out = {k[rot], k[(rot + 1) % 3], k[(rot + 2) % 3]};
    k = out;
}

struct EdgeTable {
    std::map<std::pair<int, int>, int> id;                // sorted node pair -> edge id
    std::vector<std::pair<int, int>> edges;
    std::vector<std::array<int, 3>> tri_edges;            // edge ids per triangle
    std::vector<std::array<int, 2>> edge_tris;            // adjacent triangles (-1 if none)

    explicit EdgeTable(const Mesh& m) {
        tri_edges.resize(m.tris.size());
        for (int t = 0; t < m.num_tris(); ++t) {
            for (int e = 0; e < 3; ++e) {
                int a = m.tris[t][e], b = m.tris[t][(e + 1) % 3];
                auto key = std::minmax(a, b);
                auto it = id.find(key);
                int eid;
                if (it == id.end()) {
                    eid = static_cast<int>(edges.size());
                    id.emplace(key, eid);
                    edges.push_back(key);
                    edge_tris.push_back({t, -1});
                } else {
                    eid = it->second;
                    if (edge_tris[eid][1] != -1)
                        throw std::runtime_error("mesh: edge shared by more than two triangles");
                    edge_tris[eid][1] = t;
                }
                tri_edges[t][e] = eid;
            }
        }
    }
};

// Reorders the raw boundary edges into a closed CCW loop and restores labels.
inline void rebuild_boundary(Mesh& mesh,
                             const std::map<std::pair<int, int>, BoundaryLabel>& label_of) {
    EdgeTable et(mesh);
    std::map<int, std::pair<int, int>> next_of;  // start node -> (end node, tri)
    int count = 0;
    for (std::size_t eid = 0; eid < et.edges.size(); ++eid) {
        if (et.edge_tris[eid][1] != -1) continue;
        int t = et.edge_tris[eid][0];
        // orient along the triangle's CCW traversal so the interior is on the left
        int a = -1, b = -1;
        for (int e = 0; e < 3; ++e) {
            int u = mesh.tris[t][e], v = mesh.tris[t][(e + 1) % 3];
            if (std::pair<int, int>(std::minmax(u, v)) == et.edges[eid]) { a = u; b = v; break; }
        }
        next_of[a] = {b, t};
        ++count;
    }
    if (count == 0) throw std::runtime_error("mesh: no boundary edges");
    mesh.boundary.clear();
    mesh.boundary.reserve(count);
    int start = next_of.begin()->first;
    int cur = start;
    do {
        auto it = next_of.find(cur);
        if (it == next_of.end()) throw std::runtime_error("mesh: boundary loop broken");
        BoundaryEdge be;
        be.a = cur;
        be.b = it->second.first;
        be.tri = it->second.second;
        auto lit = label_of.find(std::minmax(be.a, be.b));
        if (lit == label_of.end()) throw std::runtime_error("mesh: unlabeled boundary edge");
        be.label = lit->second;
        mesh.boundary.push_back(be);
        cur = be.b;
    } while (cur != start);
    if (static_cast<int>(mesh.boundary.size()) != count)
        throw std::runtime_error("mesh: boundary is not a single closed loop");
}

}  // namespace detail

// Audit used by tests and after refinement: interior edges shared by exactly
// two triangles, positive areas, at most one boundary edge per triangle.
inline void check_conforming(const Mesh& mesh) {
    detail::EdgeTable et(mesh);
    std::set<std::pair<int, int>> bset;
    for (const auto& e : mesh.boundary) bset.insert(std::minmax(e.a, e.b));
    std::vector<int> nb(mesh.num_tris(), 0);
    for (std::size_t eid = 0; eid < et.edges.size(); ++eid) {
        const bool on_boundary = bset.count(et.edges[eid]) > 0;
        const int ntri = et.edge_tris[eid][1] == -1 ? 1 : 2;
        if (on_boundary && ntri != 1) throw std::runtime_error("audit: boundary edge with two triangles");
        if (!on_boundary && ntri != 2) throw std::runtime_error("audit: hanging node");
        if (on_boundary) ++nb[et.edge_tris[eid][0]];
    }
    for (int t = 0; t < mesh.num_tris(); ++t) {
        if (mesh.tri_area(t) <= 0.0) throw std::runtime_error("audit: non-positive triangle area");
        if (nb[t] > 1) throw std::runtime_error("audit: triangle with more than one boundary edge");
    }
}

// Red-green-blue refinement of the marked triangles.  Marked triangles are
// red-refined; conformity is restored by marking reference (longest) edges,
// which yields green (bisection) and blue (three-child) closures.
inline Mesh refine_adaptive(const Mesh& mesh, const MarkSet& marks) {
    detail::EdgeTable et(mesh);
    std::vector<char> edge_marked(et.edges.size(), 0);
    for (int t : marks.tri_indices) {
        if (t < 0 || t >= mesh.num_tris()) throw std::out_of_range("refine: invalid mark");
        for (int e = 0; e < 3; ++e) edge_marked[et.tri_edges[t][e]] = 1;
    }
    // closure: any triangle with a marked edge gets its reference edge marked
    bool changed = true;
    while (changed) {
        changed = false;
        for (int t = 0; t < mesh.num_tris(); ++t) {
            if (edge_marked[et.tri_edges[t][0]]) continue;
            if (edge_marked[et.tri_edges[t][1]] || edge_marked[et.tri_edges[t][2]]) {
                edge_marked[et.tri_edges[t][0]] = 1;
                changed = true;
            }
        }
    }

    Mesh out;
    out.nodes = mesh.nodes;
    out.initial_shape_ratio = mesh.initial_shape_ratio;
    std::vector<int> midpoint(et.edges.size(), -1);
    for (std::size_t eid = 0; eid < et.edges.size(); ++eid) {
        if (!edge_marked[eid]) continue;
        const auto [a, b] = et.edges[eid];
        midpoint[eid] = out.num_nodes();
        out.nodes.push_back(0.5 * (mesh.nodes[a] + mesh.nodes[b]));
    }

    auto emit = [&](std::array<int, 3> k, int gen, TriColor c) {
        detail::orient_longest_edge_first(out.nodes, k);
        out.tris.push_back(k);
        out.generation.push_back(gen);
        out.color.push_back(c);
    };

    for (int t = 0; t < mesh.num_tris(); ++t) {
        const auto [i, j, k] = mesh.tris[t];
        const int gen = mesh.generation.empty() ? 0 : mesh.generation[t];
        const int m0 = midpoint[et.tri_edges[t][0]];  // on reference edge i-j
        const int m1 = midpoint[et.tri_edges[t][1]];  // on j-k
        const int m2 = midpoint[et.tri_edges[t][2]];  // on k-i
        if (m0 == -1) {
            emit({i, j, k}, gen, mesh.color.empty() ? TriColor::Red : mesh.color[t]);
        } else if (m1 == -1 && m2 == -1) {
            emit({i, m0, k}, gen + 1, TriColor::Green);
            emit({m0, j, k}, gen + 1, TriColor::Green);
        } else if (m1 != -1 && m2 != -1) {
            emit({i, m0, m2}, gen + 1, TriColor::Red);
            emit({m0, j, m1}, gen + 1, TriColor::Red);
            emit({m2, m1, k}, gen + 1, TriColor::Red);
            emit({m1, m2, m0}, gen + 1, TriColor::Red);
        } else if (m1 != -1) {
            emit({i, m0, k}, gen + 1, TriColor::Blue);
            emit({m0, j, m1}, gen + 1, TriColor::Blue);
            emit({m0, m1, k}, gen + 1, TriColor::Blue);
        } else {
            emit({i, m0, m2}, gen + 1, TriColor::Blue);
            emit({m0, j, k}, gen + 1, TriColor::Blue);
            emit({m0, k, m2}, gen + 1, TriColor::Blue);
        }
    }

    // boundary labels: split edges inherit from their parent
    std::map<std::pair<int, int>, BoundaryLabel> label_of;
    for (const auto& be : mesh.boundary) {
        auto key = std::minmax(be.a, be.b);
        int m = midpoint[et.id.at(key)];
        if (m == -1) {
            label_of[key] = be.label;
        } else {
            label_of[std::minmax(be.a, m)] = be.label;
            label_of[std::minmax(m, be.b)] = be.label;
        }
    }
    detail::rebuild_boundary(out, label_of);
    return out;
}

inline Mesh refine_uniform(const Mesh& mesh) {
    MarkSet all;
    all.tri_indices.resize(mesh.num_tris());
    std::iota(all.tri_indices.begin(), all.tri_indices.end(), 0);
    return refine_adaptive(mesh, all);
}

// The ceil(fraction*N) elements with the largest indicators; ties broken by
// lower element index.
inline MarkSet mark_fraction(const std::vector<double>& indicators, double fraction) {
    if (fraction <= 0.0 || fraction > 1.0) throw std::invalid_argument("mark_fraction: fraction in (0,1]");
    const int n = static_cast<int>(indicators.size());
    const int k = static_cast<int>(std::ceil(fraction * n));
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (indicators[a] != indicators[b]) return indicators[a] > indicators[b];
        return a < b;
    });
    MarkSet marks;
    marks.tri_indices.assign(idx.begin(), idx.begin() + std::min(k, n));
    std::sort(marks.tri_indices.begin(), marks.tri_indices.end());
    return marks;
}

// L-shape [-1/4,1/4]^2 minus the closed quadrant [0,1/4]^2, meshed by the 5x5
// grid with every square split along its bottom-left/top-right diagonal.
// Gamma_s = bottom and left sides, Gamma_t = the remainder.
inline Mesh build_lshape(int levels) {
    if (levels < 0) throw std::invalid_argument("build_lshape: levels >= 0");
    Mesh mesh;
    const double h = 0.125;
    std::array<std::array<int, 5>, 5> id{};
    for (auto& row : id) row.fill(-1);
    for (int j = 0; j < 5; ++j) {
        for (int i = 0; i < 5; ++i) {
            const double x = -0.25 + i * h, y = -0.25 + j * h;
            if (x > 0.0 && y > 0.0) continue;  // removed quadrant
            id[j][i] = mesh.num_nodes();
            mesh.nodes.push_back({x, y});
        }
    }
    for (int j = 0; j < 4; ++j) {
        for (int i = 0; i < 4; ++i) {
            if (i >= 2 && j >= 2) continue;
            const int bl = id[j][i], br = id[j][i + 1], tr = id[j + 1][i + 1], tl = id[j + 1][i];
            // corner squares at the bottom-right and top-left take the other
            // diagonal so no triangle carries two boundary edges
            const bool flip = (i == 3 && j == 0) || (i == 0 && j == 3);
            std::array<int, 3> t1 = flip ? std::array<int, 3>{bl, br, tl} : std::array<int, 3>{bl, br, tr};
            std::array<int, 3> t2 = flip ? std::array<int, 3>{br, tr, tl} : std::array<int, 3>{bl, tr, tl};
            detail::orient_longest_edge_first(mesh.nodes, t1);
            detail::orient_longest_edge_first(mesh.nodes, t2);
            mesh.tris.push_back(t1);
            mesh.tris.push_back(t2);
            mesh.generation.push_back(0);
            mesh.generation.push_back(0);
            mesh.color.push_back(TriColor::Red);
            mesh.color.push_back(TriColor::Red);
        }
    }
    // label by geometry, then order the loop
    std::map<std::pair<int, int>, BoundaryLabel> label_of;
    detail::EdgeTable et(mesh);
    for (std::size_t eid = 0; eid < et.edges.size(); ++eid) {
        if (et.edge_tris[eid][1] != -1) continue;
        const auto [a, b] = et.edges[eid];
        const Vec2 mid = 0.5 * (mesh.nodes[a] + mesh.nodes[b]);
        const bool gs = std::abs(mid.y + 0.25) < 1e-12 || std::abs(mid.x + 0.25) < 1e-12;
        label_of[{a, b}] = gs ? BoundaryLabel::GammaS : BoundaryLabel::GammaT;
    }
    detail::rebuild_boundary(mesh, label_of);
    mesh.initial_shape_ratio = mesh.shape_ratio();
    for (int l = 0; l < levels; ++l) mesh = refine_uniform(mesh);
    return mesh;
}

// --- text dump format: node/triangle/boundary-edge records, one per line ---

inline void dump_mesh(const Mesh& mesh, std::ostream& os) {
    os.precision(17);
    os << "nodes " << mesh.num_nodes() << "\n";
    for (const auto& n : mesh.nodes) os << n.x << " " << n.y << "\n";
    os << "triangles " << mesh.num_tris() << "\n";
    for (const auto& t : mesh.tris) os << t[0] << " " << t[1] << " " << t[2] << "\n";
    os << "boundary_edges " << mesh.num_boundary_edges() << "\n";
    for (const auto& e : mesh.boundary)
        os << e.a << " " << e.b << " "
           << (e.label == BoundaryLabel::GammaS ? "GammaS" : "GammaT") << "\n";
}

inline void dump_mesh(const Mesh& mesh, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("dump_mesh: cannot open " + path);
    dump_mesh(mesh, os);
}

inline Mesh read_mesh(std::istream& is) {
    Mesh mesh;
    std::string tag;
    int n = 0;
    is >> tag >> n;
    if (tag != "nodes") throw std::runtime_error("read_mesh: expected 'nodes'");
    mesh.nodes.resize(n);
    for (auto& v : mesh.nodes) is >> v.x >> v.y;
    is >> tag >> n;
    if (tag != "triangles") throw std::runtime_error("read_mesh: expected 'triangles'");
    mesh.tris.resize(n);
    for (auto& t : mesh.tris) is >> t[0] >> t[1] >> t[2];
    mesh.generation.assign(n, 0);
    mesh.color.assign(n, TriColor::Red);
    is >> tag >> n;
    if (tag != "boundary_edges") throw std::runtime_error("read_mesh: expected 'boundary_edges'");
    std::map<std::pair<int, int>, BoundaryLabel> label_of;
    for (int i = 0; i < n; ++i) {
        int a, b;
        std::string lab;
        is >> a >> b >> lab;
        label_of[std::minmax(a, b)] =
            lab == "GammaS" ? BoundaryLabel::GammaS : BoundaryLabel::GammaT;
    }
    detail::rebuild_boundary(mesh, label_of);
    mesh.initial_shape_ratio = mesh.shape_ratio();
    return mesh;
}

inline Mesh read_mesh(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_mesh: cannot open " + path);
    return read_mesh(is);
}

}  // namespace febe
