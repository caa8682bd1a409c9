#pragma once

#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "perifem/bonds.hpp"
#include "perifem/discretization.hpp"
#include "perifem/mesh.hpp"
#include "perifem/pe.hpp"

namespace perifem {

using Vector = Eigen::VectorXd;

/// Node-major dof numbering: node n owns dofs 2n (x) and 2n+1 (y).
struct DofMap {
    int num_nodes = 0;

    explicit DofMap(int nodes = 0) : num_nodes(nodes) {}
    int size() const noexcept { return 2 * num_nodes; }
    static int dof(int node, int component) noexcept { return 2 * node + component; }
    static int node_of(int dof) noexcept { return dof / 2; }
    static int component_of(int dof) noexcept { return dof % 2; }
};

struct Triplet {
    int row = 0;
    int col = 0;
    double value = 0.0;
};

/// Structurally symmetric sparse matrix in compressed-row form (both triangles stored).
class SparseSym {
public:
    SparseSym() = default;
    explicit SparseSym(int n) : n_(n), row_ptr_(n + 1, 0) {}

    /// Sums duplicates; drops entries that end up exactly zero.
    static SparseSym from_triplets(int n, std::span<const Triplet> triplets);
    /// Zero-valued matrix over a given pattern; rows[r] must be sorted and unique.
    static SparseSym from_pattern(const std::vector<std::vector<int>>& rows);

    int rows() const noexcept { return n_; }
    std::size_t nnz() const noexcept { return cols_.size(); }

    double coeff(int r, int c) const;
    /// Adds to an existing entry; throws if (r, c) is outside the pattern.
    void add(int r, int c, double v);
    /// Position of (r, c) in values(), or -1.
    std::ptrdiff_t find(int r, int c) const;

    Vector multiply(const Vector& x) const;
    void multiply(const Vector& x, Vector& y) const;
    Vector diagonal() const;
    double max_abs() const;
    /// Maximum absolute row sum.
    double norm_inf() const;
    /// max |A - A^T| over stored entries.
    double max_asymmetry() const;
    /// Removes entries equal to exactly zero.
    void prune();
    Eigen::MatrixXd to_dense() const;

    const std::vector<std::size_t>& row_ptr() const noexcept { return row_ptr_; }
    const std::vector<int>& cols() const noexcept { return cols_; }
    std::vector<double>& values() noexcept { return vals_; }
    const std::vector<double>& values() const noexcept { return vals_; }

private:
    int n_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<int> cols_;
    std::vector<double> vals_;
};

/// Debug dump, one "row col value" line per stored entry (0-based, 17 digits).
void write_coordinate(const SparseSym& k, std::ostream& os);

/// Relative max-entry difference max|A - B| / max|B| over the union of patterns.
double relative_difference(const SparseSym& a, const SparseSym& b);

struct AssemblyOptions {
    int threads = 1;
    bool prune_zeros = true;
};

/// Global K = sum over PEs of the scattered PE stiffness, using the table's flags.
SparseSym assemble_stiffness(const Mesh& mesh, const PeSet& pes, const BondTable& table,
                             const MaterialParams& p, const AssemblyOptions& opts = {});

/// Removes the contribution of the given (newly broken) bonds from K. Each bond
/// is realized by two ordered pairs with identical contributions.
void subtract_bonds(SparseSym& k, const Mesh& mesh, const BondTable& table, std::span<const int> bonds,
                    const MaterialParams& p);

/// Scatters a PE matrix into the global matrix (pattern must contain the PE's node blocks).
void scatter_pe(SparseSym& k, const PeriElement& pe, const PeMatrix& kk);

Vector assemble_load(const Mesh& mesh, const BodyForce& b, const QuadratureRule& rule, double thickness);

// ---------------------------------------------------------------------------
// Boundary conditions

enum class Component { x, y, both };

/// Prescribed displacement on a node set; `value` is the final value, scaled per increment.
struct BoundaryCondition {
    std::string node_set;
    Component component = Component::both;
    double value = 0.0;
};

struct PrescribedDof {
    int dof = 0;
    double value = 0.0;
};

/// Expands node-set conditions to dofs; throws on conflicting values.
std::vector<PrescribedDof> resolve_bcs(const Mesh& mesh, const std::vector<BoundaryCondition>& bcs);

struct ConstrainedSystem {
    SparseSym k;
    Vector f;
    std::vector<PrescribedDof> constrained;   ///< values already scaled
    double reference_stiffness = 1.0;
};

/// Symmetric elimination for 1/2 K d = F with d = scale * value on constrained dofs.
ConstrainedSystem apply_dirichlet(const SparseSym& k, const Vector& f,
                                  const std::vector<PrescribedDof>& bcs, double scale);

// ---------------------------------------------------------------------------
// Solver

class SingularSystemError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

enum class SolveMethod { automatic, dense, cg };

struct SolveOptions {
    SolveMethod method = SolveMethod::automatic;
    int dense_threshold = 2000;   ///< automatic: dense below this many dofs
    double tolerance = 1e-10;     ///< on |1/2 K d - F| / |F|
    int max_iterations = 0;       ///< 0: 20 n
};

struct SolveResult {
    Vector d;
    int iterations = 0;
    double residual = 0.0;
    SolveMethod method = SolveMethod::dense;
};

/// Solves 1/2 K d = F. `guess` seeds the iterative path.
SolveResult solve(const SparseSym& k, const Vector& f, const SolveOptions& opts = {},
                  const Vector* guess = nullptr);

/// Solves a constrained system and restores the prescribed values exactly.
SolveResult solve(const ConstrainedSystem& sys, const SolveOptions& opts = {}, const Vector* guess = nullptr);

// ---------------------------------------------------------------------------
// Reactions

struct Reactions {
    std::vector<Vec2> per_node;            ///< zero on unconstrained dofs
    std::map<std::string, Vec2> per_set;   ///< resultants over each requested node set
};

/// r = 1/2 K d - F on constrained dofs, with K the unmodified stiffness.
Reactions reaction_forces(const Mesh& mesh, const SparseSym& k, const Vector& d, const Vector& f,
                          const std::vector<PrescribedDof>& constrained,
                          const std::vector<std::string>& sets = {});

} // namespace perifem
