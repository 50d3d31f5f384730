#include "aplab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace aplab {

namespace {

// Nodes of one graded side, walking away from the accumulation endpoint.
// Returns m+1 coordinates from `from` to `to` with spacing that shrinks
// toward `toward` (one of the two endpoints).
void append_graded_side(std::vector<double>& nodes, double a, double b,
                        int m, double gamma, bool accumulate_at_a) {
    // nodes gets a..b inclusive; caller drops duplicates at joins.
    for (int j = 0; j <= m; ++j) {
        double xi = static_cast<double>(j) / m;
        double x;
        if (accumulate_at_a) {
            x = a + (b - a) * std::pow(xi, gamma);
        } else {
            x = b - (b - a) * std::pow(1.0 - xi, gamma);
        }
        nodes.push_back(x);
    }
}

} // namespace

std::optional<std::size_t> Mesh::origin_node() const {
    if (!contains_origin()) return std::nullopt;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i] == 0.0) return i;
    return std::nullopt;
}

Mesh build_mesh(double x_left, double x_right, int n_cells,
                double grading_exponent, int radial_dimension) {
    if (n_cells < 2)
        throw std::invalid_argument("build_mesh: n_cells must be >= 2");
    if (!(x_left < x_right))
        throw std::invalid_argument("build_mesh: interval is degenerate or inverted");
    if (!(grading_exponent >= 1.0))
        throw std::invalid_argument("build_mesh: grading_exponent must be >= 1");
    if (radial_dimension < 1)
        throw std::invalid_argument("build_mesh: radial_dimension must be >= 1");
    if (radial_dimension > 1 && x_left != 0.0)
        throw std::invalid_argument("build_mesh: radial mesh must be anchored at x_left = 0");

    Mesh mesh;
    mesh.x_left = x_left;
    mesh.x_right = x_right;
    mesh.grading_exponent = grading_exponent;
    mesh.radial_dimension = radial_dimension;
    mesh.nodes.reserve(static_cast<std::size_t>(n_cells) + 1);

    const double gamma = grading_exponent;
    if (x_left < 0.0 && 0.0 < x_right) {
        // Origin interior: split cells between the two sides proportionally
        // to length, at least one cell each, and grade both toward 0.
        const double len = x_right - x_left;
        int m_left = static_cast<int>(std::lround(n_cells * (-x_left) / len));
        m_left = std::clamp(m_left, 1, n_cells - 1);
        const int m_right = n_cells - m_left;
        append_graded_side(mesh.nodes, x_left, 0.0, m_left, gamma, false);
        mesh.nodes.pop_back(); // 0 re-added by the right side
        append_graded_side(mesh.nodes, 0.0, x_right, m_right, gamma, true);
        mesh.nodes[static_cast<std::size_t>(m_left)] = 0.0;
    } else if (x_left >= 0.0) {
        // Origin at or left of x_left: accumulate toward x_left.
        append_graded_side(mesh.nodes, x_left, x_right, n_cells, gamma, true);
    } else {
        // Origin at or right of x_right: accumulate toward x_right.
        append_graded_side(mesh.nodes, x_left, x_right, n_cells, gamma, false);
    }

    mesh.nodes.front() = x_left;
    mesh.nodes.back() = x_right;

    for (std::size_t i = 0; i + 1 < mesh.nodes.size(); ++i)
        if (!(mesh.nodes[i] < mesh.nodes[i + 1]))
            throw std::runtime_error("build_mesh: nodes not strictly increasing");
    return mesh;
}

double weight_cell_integral(double a, double b, double alpha,
                            int radial_dimension) {
    if (!(alpha >= 0.0 && alpha < 2.0))
        throw std::invalid_argument("weight_cell_integral: alpha must lie in [0, 2)");
    if (!(a < b))
        throw std::invalid_argument("weight_cell_integral: empty or inverted cell");
    if (a < 0.0 && b > 0.0)
        throw std::invalid_argument("weight_cell_integral: cell straddles the degeneracy point");
    if (radial_dimension < 1)
        throw std::invalid_argument("weight_cell_integral: radial_dimension must be >= 1");
    if (radial_dimension > 1 && a < 0.0)
        throw std::invalid_argument("weight_cell_integral: radial cells must satisfy a >= 0");

    const double p = alpha + radial_dimension;
    if (a >= 0.0)
        return (std::pow(b, p) - std::pow(a, p)) / p;
    // Negative-axis cell, N = 1: integrate |x|^alpha.
    return (std::pow(-a, p) - std::pow(-b, p)) / p;
}

double measure_cell_integral(double a, double b, int radial_dimension) {
    if (!(a < b))
        throw std::invalid_argument("measure_cell_integral: empty or inverted cell");
    if (radial_dimension == 1) return b - a;
    if (a < 0.0)
        throw std::invalid_argument("measure_cell_integral: radial cells must satisfy a >= 0");
    const double n = radial_dimension;
    return (std::pow(b, n) - std::pow(a, n)) / n;
}

std::vector<double> lumped_masses(const Mesh& mesh) {
    const int nd = mesh.radial_dimension;
    std::vector<double> m(mesh.n_nodes(), 0.0);
    for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
        const double a = mesh.nodes[c];
        const double b = mesh.nodes[c + 1];
        const double h = b - a;
        // m0 = int |x|^{N-1}, m1 = int x |x|^{N-1}; both exact. For N = 1 the
        // formulas below hold for cells of either sign.
        double m0, m1;
        if (nd == 1) {
            m0 = h;
            m1 = 0.5 * (b * b - a * a);
        } else {
            m0 = (std::pow(b, nd) - std::pow(a, nd)) / nd;
            m1 = (std::pow(b, nd + 1) - std::pow(a, nd + 1)) / (nd + 1);
        }
        m[c] += (b * m0 - m1) / h;     // hat function peaking at the left node
        m[c + 1] += (m1 - a * m0) / h; // hat function peaking at the right node
    }
    return m;
}

void write_mesh_table(const Mesh& mesh, std::ostream& os) {
    os << "# node\tx\n";
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
        os << i << '\t' << mesh.nodes[i] << '\n';
}

} // namespace aplab
