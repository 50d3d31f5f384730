#pragma once

// Graded 1D meshes for an interval containing (or abutting) the degeneracy
// point x = 0 of the weight |x|^alpha, plus exact cell integrals of the
// weight and of the measure |x|^{N-1} dx used by the radial reduction.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

namespace aplab {

/// 1D mesh with cells graded toward the degeneracy point x = 0.
///
/// Invariants (enforced by build_mesh):
///  - nodes strictly increasing, first = x_left, last = x_right;
///  - if 0 lies in [x_left, x_right] it is a node, so no cell straddles it;
///  - for radial_dimension > 1 the mesh is anchored at x_left = 0.
struct Mesh {
    std::vector<double> nodes;
    double x_left = 0.0;
    double x_right = 1.0;
    double grading_exponent = 1.0;
    int radial_dimension = 1;

    std::size_t n_cells() const { return nodes.size() - 1; }
    std::size_t n_nodes() const { return nodes.size(); }
    double cell_width(std::size_t c) const { return nodes[c + 1] - nodes[c]; }
    bool contains_origin() const { return x_left <= 0.0 && 0.0 <= x_right; }

    /// Index of the node at x = 0, if the origin lies in the closed interval.
    std::optional<std::size_t> origin_node() const;
};

/// Builds a mesh with `n_cells` cells whose node positions accumulate toward
/// x = 0 as |xi|^gamma of a uniform parameter xi. With gamma = 1 the mesh is
/// uniform (per side when 0 is interior). Throws std::invalid_argument on
/// n_cells < 2, inverted intervals, gamma < 1, or a radial mesh (N > 1) not
/// anchored at x_left = 0.
Mesh build_mesh(double x_left, double x_right, int n_cells,
                double grading_exponent, int radial_dimension);

/// Exact integral of |x|^{alpha + N - 1} over the cell [a, b]: the weight
/// |x|^alpha times the radial measure |x|^{N-1}. Closed form
/// (b^{alpha+N} - a^{alpha+N}) / (alpha+N) for 0 <= a < b, mirrored for
/// cells on the negative axis. Throws on cells straddling 0 and on
/// alpha outside [0, 2).
double weight_cell_integral(double a, double b, double alpha,
                            int radial_dimension);

/// Exact integral of the measure |x|^{N-1} over [a, b] (cell must not
/// straddle 0; for N > 1 it must satisfy a >= 0).
double measure_cell_integral(double a, double b, int radial_dimension);

/// Row-sum lumped P1 masses against the measure |x|^{N-1} dx, one entry per
/// node. Summing all entries gives the domain measure.
std::vector<double> lumped_masses(const Mesh& mesh);

/// Plain-text node table (index, coordinate), one row per node.
void write_mesh_table(const Mesh& mesh, std::ostream& os);

} // namespace aplab
