#pragma once

#include "relux/io.hpp"
#include "relux/network.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace relux {

using PointN = std::vector<Rational>;

/// a . x + c on R^n.
struct AffineN {
    std::vector<Rational> a;
    Rational c;

    Rational operator()(const PointN& x) const;
    bool operator==(const AffineN& o) const { return a == o.a && c == o.c; }
};

/// Continuous PWL on a simplicial complex, linear on each simplex.
struct PwlSimplicial {
    int dim = 0;
    std::vector<PointN> vertices;
    std::vector<std::vector<std::size_t>> simplices;
    std::vector<Rational> values;
    bool compact_support = false;

    /// Throws ContractError on degenerate simplices, bad indices, overlapping
    /// simplices or a false compact_support claim.
    void validate() const;
    /// Vertex indices on the boundary of the complex.
    std::vector<std::size_t> boundary_vertices() const;
    /// True iff every boundary vertex has value 0.
    bool boundary_is_zero() const;
    /// Interpolated value; 0 outside the complex.
    Rational operator()(const PointN& x) const;
    /// Index of a simplex containing x.
    std::optional<std::size_t> locate(const PointN& x) const;
    std::vector<std::size_t> star(std::size_t p) const;
    PointN barycenter(std::size_t s) const;
};

Json pwl_simplicial_to_json(const PwlSimplicial& f);
PwlSimplicial pwl_simplicial_from_json(const Json& j);

/// Barycentric coordinates of x in the simplex with the given vertices.
std::vector<Rational> barycentric_coordinates(const std::vector<PointN>& simplex, const PointN& x);

/// The affine functionals lambda_i with lambda_i(x_j) = [i = j].
std::vector<AffineN> barycentric_functionals(const std::vector<PointN>& simplex);

/// f_i = lambda_i * f(x_i); sums to f and vanishes on the face opposite x_i.
std::vector<AffineN> barycentric_decompose(const std::vector<PointN>& simplex, const AffineN& f);

using GridSampler = std::function<Rational(const PointN&)>;

/// r^n0 cubes of [0,1]^n0, each cut into n0! Kuhn simplices.
PwlSimplicial kuhn_grid_interpolant(const GridSampler& sampler, int n0, int r);

struct ConeSpec {
    PointN apex;
    std::vector<std::vector<Rational>> face_normals;
    std::vector<Rational> interior_direction;
    Rational slope;
};

/// s * max(0, min_i a_i.(x - apex)) with a_i scaled to a_i.v = 1; k layers of
/// 2 compute neurons next to 2n input-storage neurons.
Network<Rational> lego_min_network(const ConeSpec& cone);

struct VertexBlockInfo {
    std::size_t vertex = 0;
    bool fast_path = false;
    std::size_t layers = 0;
    std::size_t star_simplices = 0;  // S_p
};

/// Standalone width-(2n0+6) network computing f(p) * hat_p; validated at probe
/// points, throws ReconstructionMismatch on disagreement.
Network<Rational> compile_vertex_block(const PwlSimplicial& f, std::size_t p, VertexBlockInfo* info = nullptr);

struct SimplicialStats {
    std::size_t depth = 0;
    std::size_t width = 0;
    /// sum_p (1 + n0 S_p) over the vertices that get a block.
    std::size_t layer_budget = 0;
    std::vector<VertexBlockInfo> blocks;
};

struct SimplicialOptions {
    /// Exact check at all vertices and simplex barycenters.
    bool verify = true;
};

/// Width-(2n0+6) network equal to f; requires compact support.
Network<Rational> compile_simplicial(const PwlSimplicial& f, SimplicialStats* stats = nullptr,
                                     const SimplicialOptions& opt = {});

}  // namespace relux
