#include "perifem/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <thread>

#include <Eigen/Cholesky>

#include "perifem/log.hpp"

namespace perifem {

// ---------------------------------------------------------------------------
// SparseSym

SparseSym SparseSym::from_triplets(int n, std::span<const Triplet> triplets)
{
    std::vector<Triplet> t(triplets.begin(), triplets.end());
    for (const auto& e : t)
        if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n)
            throw std::out_of_range("SparseSym::from_triplets: index out of range");
    std::stable_sort(t.begin(), t.end(),
                     [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
    SparseSym m(n);
    for (std::size_t k = 0; k < t.size();) {
        std::size_t l = k;
        double v = 0.0;
        while (l < t.size() && t[l].row == t[k].row && t[l].col == t[k].col)
            v += t[l++].value;
        m.cols_.push_back(t[k].col);
        m.vals_.push_back(v);
        ++m.row_ptr_[t[k].row + 1];
        k = l;
    }
    std::partial_sum(m.row_ptr_.begin(), m.row_ptr_.end(), m.row_ptr_.begin());
    m.prune();
    return m;
}

SparseSym SparseSym::from_pattern(const std::vector<std::vector<int>>& rows)
{
    SparseSym m(static_cast<int>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        m.cols_.insert(m.cols_.end(), rows[r].begin(), rows[r].end());
        m.row_ptr_[r + 1] = m.cols_.size();
    }
    m.vals_.assign(m.cols_.size(), 0.0);
    return m;
}

std::ptrdiff_t SparseSym::find(int r, int c) const
{
    const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
    const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
    auto it = std::lower_bound(first, last, c);
    return (it != last && *it == c) ? it - cols_.begin() : -1;
}

double SparseSym::coeff(int r, int c) const
{
    const auto k = find(r, c);
    return k < 0 ? 0.0 : vals_[k];
}

void SparseSym::add(int r, int c, double v)
{
    const auto k = find(r, c);
    if (k < 0)
        throw std::out_of_range("SparseSym::add: entry outside pattern");
    vals_[k] += v;
}

void SparseSym::multiply(const Vector& x, Vector& y) const
{
    y.resize(n_);
    for (int r = 0; r < n_; ++r) {
        double s = 0.0;
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            s += vals_[k] * x[cols_[k]];
        y[r] = s;
    }
}

Vector SparseSym::multiply(const Vector& x) const
{
    Vector y;
    multiply(x, y);
    return y;
}

Vector SparseSym::diagonal() const
{
    Vector d = Vector::Zero(n_);
    for (int r = 0; r < n_; ++r)
        d[r] = coeff(r, r);
    return d;
}

double SparseSym::max_abs() const
{
    double m = 0.0;
    for (double v : vals_)
        m = std::max(m, std::abs(v));
    return m;
}

double SparseSym::norm_inf() const
{
    double m = 0.0;
    for (int r = 0; r < n_; ++r) {
        double s = 0.0;
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            s += std::abs(vals_[k]);
        m = std::max(m, s);
    }
    return m;
}

double SparseSym::max_asymmetry() const
{
    double m = 0.0;
    for (int r = 0; r < n_; ++r)
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            m = std::max(m, std::abs(vals_[k] - coeff(cols_[k], r)));
    return m;
}

void SparseSym::prune()
{
    std::size_t out = 0;
    std::size_t start = 0;
    for (int r = 0; r < n_; ++r) {
        const std::size_t end = row_ptr_[r + 1];
        for (std::size_t k = start; k < end; ++k)
            if (vals_[k] != 0.0) {
                cols_[out] = cols_[k];
                vals_[out] = vals_[k];
                ++out;
            }
        start = end;
        row_ptr_[r + 1] = out;
    }
    cols_.resize(out);
    vals_.resize(out);
}

Eigen::MatrixXd SparseSym::to_dense() const
{
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
    for (int r = 0; r < n_; ++r)
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            a(r, cols_[k]) += vals_[k];
    return a;
}

void write_coordinate(const SparseSym& k, std::ostream& os)
{
    char buf[64];
    for (int r = 0; r < k.rows(); ++r)
        for (std::size_t q = k.row_ptr()[r]; q < k.row_ptr()[r + 1]; ++q) {
            std::snprintf(buf, sizeof buf, "%d %d %.17g\n", r, k.cols()[q], k.values()[q]);
            os << buf;
        }
}

double relative_difference(const SparseSym& a, const SparseSym& b)
{
    if (a.rows() != b.rows())
        throw std::invalid_argument("relative_difference: size mismatch");
    double diff = 0.0;
    for (int r = 0; r < a.rows(); ++r) {
        for (std::size_t k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k)
            diff = std::max(diff, std::abs(a.values()[k] - b.coeff(r, a.cols()[k])));
        for (std::size_t k = b.row_ptr()[r]; k < b.row_ptr()[r + 1]; ++k)
            diff = std::max(diff, std::abs(b.values()[k] - a.coeff(r, b.cols()[k])));
    }
    const double scale = b.max_abs();
    return scale > 0.0 ? diff / scale : diff;
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

SparseSym stiffness_pattern(const Mesh& mesh, const PeSet& pes)
{
    std::vector<std::vector<int>> adj(mesh.num_nodes());
    for (const auto& pe : pes.pes)
        for (int a : pe.node_ids)
            for (int b : pe.node_ids)
                adj[a].push_back(b);
    std::vector<std::vector<int>> rows(2 * mesh.num_nodes());
    for (std::size_t n = 0; n < adj.size(); ++n) {
        auto& v = adj[n];
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        std::vector<int> cols;
        cols.reserve(2 * v.size());
        for (int m : v) {
            cols.push_back(2 * m);
            cols.push_back(2 * m + 1);
        }
        rows[2 * n] = cols;
        rows[2 * n + 1] = std::move(cols);
        std::vector<int>().swap(v);
    }
    return SparseSym::from_pattern(rows);
}

// Adds a 16x16 block over 8 nodes (node-major, 2 dofs each). On the assembly
// pattern the two columns of a node are adjacent and both rows of a node share
// one column list; other patterns fall back to per-entry lookup.
template <class Block>
void scatter_nodes(SparseSym& k, const std::array<int, 8>& nodes, const Block& kk, double sign)
{
    auto& vals = k.values();
    const auto& rp = k.row_ptr();
    const auto& cols = k.cols();
    for (int a = 0; a < 8; ++a) {
        const int r0 = 2 * nodes[a];
        const std::size_t offset = rp[r0 + 1] - rp[r0];
        for (int b = 0; b < 8; ++b) {
            const int c0 = 2 * nodes[b];
            const auto pos = k.find(r0, c0);
            const auto p = static_cast<std::size_t>(pos);
            const bool blocked = pos >= 0 && p + 1 < rp[r0 + 1] && cols[p + 1] == c0 + 1 &&
                                 p + offset + 1 < rp[r0 + 2] && cols[p + offset] == c0 &&
                                 cols[p + offset + 1] == c0 + 1;
            if (blocked) {
                vals[p] += sign * kk(2 * a, 2 * b);
                vals[p + 1] += sign * kk(2 * a, 2 * b + 1);
                vals[p + offset] += sign * kk(2 * a + 1, 2 * b);
                vals[p + offset + 1] += sign * kk(2 * a + 1, 2 * b + 1);
            } else {
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j)
                        if (const double v = kk(2 * a + i, 2 * b + j); v != 0.0)
                            k.add(r0 + i, c0 + j, sign * v);
            }
        }
    }
}

void table_pe_stiffness(const BondTable& table, int pe, const MaterialParams& p, PeMatrix& kk, bool& nonzero)
{
    kk.setZero();
    nonzero = false;
    const auto& sites = table.sites();
    for (const auto& op : table.pairs_of(pe)) {
        const auto& b = table.bonds()[op.bond];
        if (b.flag == BondFlag::broken)
            continue;
        const double scale = b.weight * micromodulus(b.r, p) / (b.r * b.r);
        add_pair_contribution(kk, sites[op.site_prime].n, sites[op.site].n, table.pair_xi(op), scale);
        nonzero = true;
    }
}

template <class F>
void parallel_for(int begin, int end, int threads, F&& f)
{
    threads = std::max(1, std::min(threads, end - begin));
    if (threads == 1) {
        for (int i = begin; i < end; ++i)
            f(i);
        return;
    }
    std::vector<std::jthread> pool;
    const int chunk = (end - begin + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int lo = begin + t * chunk, hi = std::min(end, lo + chunk);
        pool.emplace_back([lo, hi, &f] {
            for (int i = lo; i < hi; ++i)
                f(i);
        });
    }
}

} // namespace

void scatter_pe(SparseSym& k, const PeriElement& pe, const PeMatrix& kk) { scatter_nodes(k, pe.node_ids, kk, 1.0); }

SparseSym assemble_stiffness(const Mesh& mesh, const PeSet& pes, const BondTable& table,
                             const MaterialParams& p, const AssemblyOptions& opts)
{
    if (table.num_pes() != pes.size())
        throw std::invalid_argument("assemble_stiffness: bond table built for another PE set");
    SparseSym k = stiffness_pattern(mesh, pes);
    // PE matrices are computed in parallel per block, then scattered in PE order
    // so that the result does not depend on the thread count.
    constexpr int kBlock = 2048;
    std::vector<PeMatrix> buf(kBlock);
    std::vector<char> nonzero(kBlock);
    const auto m = static_cast<int>(pes.size());
    for (int start = 0; start < m; start += kBlock) {
        const int stop = std::min(m, start + kBlock);
        parallel_for(start, stop, opts.threads, [&](int pe) {
            bool nz = false;
            table_pe_stiffness(table, pe, p, buf[pe - start], nz);
            nonzero[pe - start] = nz;
        });
        for (int pe = start; pe < stop; ++pe)
            if (nonzero[pe - start])
                scatter_nodes(k, pes.pes[pe].node_ids, buf[pe - start], 1.0);
    }
    if (opts.prune_zeros)
        k.prune();
    return k;
}

void subtract_bonds(SparseSym& k, const Mesh& mesh, const BondTable& table, std::span<const int> bonds,
                    const MaterialParams& p)
{
    const auto& sites = table.sites();
    PeMatrix kk;
    for (int id : bonds) {
        const auto& b = table.bonds()[id];
        const auto& sa = sites[b.site_a];
        const auto& sb = sites[b.site_b];
        kk.setZero();
        add_pair_contribution(kk, sa.n, sb.n, b.xi, b.weight * micromodulus(b.r, p) / (b.r * b.r));
        std::array<int, 8> nodes{};
        const auto& na = mesh.elements()[sa.element].node_ids;
        const auto& nb = mesh.elements()[sb.element].node_ids;
        std::copy(na.begin(), na.end(), nodes.begin());
        std::copy(nb.begin(), nb.end(), nodes.begin() + 4);
        // the mirrored ordered pair contributes the same matrix
        scatter_nodes(k, nodes, kk, -2.0);
    }
}

Vector assemble_load(const Mesh& mesh, const BodyForce& b, const QuadratureRule& rule, double thickness)
{
    Vector f = Vector::Zero(2 * static_cast<Eigen::Index>(mesh.num_nodes()));
    for (const auto& e : mesh.elements()) {
        const auto fe = ce_load_vector(mesh, e.id, b, rule, thickness);
        for (int a = 0; a < 4; ++a) {
            f[2 * e.node_ids[a]] += fe(2 * a);
            f[2 * e.node_ids[a] + 1] += fe(2 * a + 1);
        }
    }
    return f;
}

// ---------------------------------------------------------------------------
// Boundary conditions

std::vector<PrescribedDof> resolve_bcs(const Mesh& mesh, const std::vector<BoundaryCondition>& bcs)
{
    std::map<int, double> fixed;
    for (const auto& bc : bcs) {
        if (!mesh.has_node_set(bc.node_set))
            throw InvariantError("boundary condition: unknown node set '" + bc.node_set + "'");
        for (int n : mesh.node_set(bc.node_set))
            for (int c = 0; c < 2; ++c) {
                if (bc.component == Component::x && c != 0)
                    continue;
                if (bc.component == Component::y && c != 1)
                    continue;
                const int dof = DofMap::dof(n, c);
                auto [it, fresh] = fixed.emplace(dof, bc.value);
                if (!fresh && it->second != bc.value)
                    throw InvariantError("boundary condition: node " + std::to_string(n) + " component " +
                                         (c == 0 ? "x" : "y") + " constrained to conflicting values");
            }
    }
    std::vector<PrescribedDof> out;
    out.reserve(fixed.size());
    for (const auto& [dof, v] : fixed)
        out.push_back({dof, v});
    return out;
}

ConstrainedSystem apply_dirichlet(const SparseSym& k, const Vector& f, const std::vector<PrescribedDof>& bcs,
                                  double scale)
{
    const int n = k.rows();
    if (f.size() != n)
        throw std::invalid_argument("apply_dirichlet: load vector size mismatch");
    std::vector<char> is_fixed(n, 0);
    Vector u = Vector::Zero(n);
    ConstrainedSystem sys;
    for (const auto& pd : bcs) {
        if (pd.dof < 0 || pd.dof >= n)
            throw std::out_of_range("apply_dirichlet: dof out of range");
        if (is_fixed[pd.dof] && u[pd.dof] != scale * pd.value)
            throw InvariantError("apply_dirichlet: conflicting constraints on dof " + std::to_string(pd.dof));
        is_fixed[pd.dof] = 1;
        u[pd.dof] = scale * pd.value;
    }
    for (int d = 0; d < n; ++d)
        if (is_fixed[d])
            sys.constrained.push_back({d, u[d]});

    // reference stiffness: power of two near the mean diagonal, so that the
    // constrained rows reproduce the prescribed values without rounding
    double sum = 0.0;
    int count = 0;
    for (int d = 0; d < n; ++d)
        if (const double v = std::abs(k.coeff(d, d)); v > 0.0) {
            sum += v;
            ++count;
        }
    sys.reference_stiffness = count ? std::exp2(std::round(std::log2(sum / count))) : 1.0;

    sys.k = k;
    sys.f = f;
    auto& vals = sys.k.values();
    const auto& rp = sys.k.row_ptr();
    const auto& cols = sys.k.cols();
    for (int r = 0; r < n; ++r)
        for (std::size_t q = rp[r]; q < rp[r + 1]; ++q) {
            const int c = cols[q];
            if (is_fixed[r]) {
                vals[q] = 0.0;
            } else if (is_fixed[c]) {
                sys.f[r] -= 0.5 * vals[q] * u[c];
                vals[q] = 0.0;
            }
        }
    // constrained rows keep only their diagonal (inserted if the row was empty)
    bool missing_diag = false;
    for (int d = 0; d < n; ++d)
        if (is_fixed[d]) {
            if (const auto pos = sys.k.find(d, d); pos >= 0)
                vals[pos] = sys.reference_stiffness;
            else
                missing_diag = true;
            sys.f[d] = 0.5 * sys.reference_stiffness * u[d];
        }
    if (missing_diag) {
        std::vector<Triplet> t;
        for (int r = 0; r < n; ++r)
            for (std::size_t q = rp[r]; q < rp[r + 1]; ++q)
                if (vals[q] != 0.0 && !is_fixed[r])
                    t.push_back({r, cols[q], vals[q]});
        for (int d = 0; d < n; ++d)
            if (is_fixed[d])
                t.push_back({d, d, sys.reference_stiffness});
        sys.k = SparseSym::from_triplets(n, t);
    } else {
        sys.k.prune();
    }
    return sys;
}

// ---------------------------------------------------------------------------
// Solver

namespace {

double relative_residual(const SparseSym& k, const Vector& d, const Vector& f)
{
    const Vector r = 0.5 * k.multiply(d) - f;
    const double nf = f.norm();
    return nf > 0.0 ? r.norm() / nf : r.norm();
}

SolveResult solve_dense(const SparseSym& k, const Vector& f, const SolveOptions& opts)
{
    const Eigen::MatrixXd a = k.to_dense();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    const Vector dv = ldlt.vectorD();
    const double dmax = dv.size() ? dv.cwiseAbs().maxCoeff() : 0.0;
    if (ldlt.info() != Eigen::Success || dv.size() == 0 || !(dv.minCoeff() > 1e-12 * dmax))
        throw SingularSystemError("solve: stiffness matrix is singular (insufficient constraints?)");
    SolveResult res;
    res.method = SolveMethod::dense;
    res.d = 2.0 * ldlt.solve(f);
    res.residual = relative_residual(k, res.d, f);
    if (!(res.residual <= opts.tolerance)) {
        // one step of iterative refinement
        const Vector r = f - 0.5 * k.multiply(res.d);
        res.d += 2.0 * ldlt.solve(r);
        res.residual = relative_residual(k, res.d, f);
    }
    if (!(res.residual <= opts.tolerance))
        throw ConvergenceError("solve: dense factorization residual above tolerance", res.residual);
    return res;
}

// Jacobi-preconditioned conjugate gradient on K d = 2F.
SolveResult solve_cg(const SparseSym& k, const Vector& f, const SolveOptions& opts, const Vector* guess)
{
    const int n = k.rows();
    SolveResult res;
    res.method = SolveMethod::cg;
    const Vector b = 2.0 * f;
    const double nb = b.norm();
    if (nb == 0.0) {
        res.d = Vector::Zero(n);
        return res;
    }
    Vector inv_diag = k.diagonal();
    for (int i = 0; i < n; ++i)
        inv_diag[i] = inv_diag[i] > 0.0 ? 1.0 / inv_diag[i] : 1.0;

    Vector x = (guess && guess->size() == n) ? *guess : Vector::Zero(n);
    const int max_it = opts.max_iterations > 0 ? opts.max_iterations : 20 * std::max(n, 1);
    Vector r(n), z(n), p(n), q(n);
    int it = 0;
    double rel = 0.0;
    for (int restart = 0; restart < 4; ++restart) {
        k.multiply(x, q);
        r = b - q;
        rel = r.norm() / nb;
        if (rel <= opts.tolerance)
            break;
        z = inv_diag.cwiseProduct(r);
        p = z;
        double rz = r.dot(z);
        for (; it < max_it; ++it) {
            k.multiply(p, q);
            const double pq = p.dot(q);
            if (!(pq > 0.0)) {
                if (p.norm() == 0.0)
                    break;
                throw SingularSystemError("solve: conjugate gradient breakdown (matrix not positive definite)");
            }
            const double alpha = rz / pq;
            x += alpha * p;
            r -= alpha * q;
            rel = r.norm() / nb;
            if (rel <= 0.5 * opts.tolerance)
                break;
            z = inv_diag.cwiseProduct(r);
            const double rz_new = r.dot(z);
            p = z + (rz_new / rz) * p;
            rz = rz_new;
        }
        if (it >= max_it)
            break;
    }
    res.d = std::move(x);
    res.iterations = it;
    res.residual = relative_residual(k, res.d, f);
    if (!(res.residual <= opts.tolerance))
        throw ConvergenceError("solve: conjugate gradient did not converge in " + std::to_string(it) +
                                   " iterations (residual " + std::to_string(res.residual) + ")",
                               res.residual);
    return res;
}

} // namespace

SolveResult solve(const SparseSym& k, const Vector& f, const SolveOptions& opts, const Vector* guess)
{
    if (f.size() != k.rows())
        throw std::invalid_argument("solve: size mismatch");
    SolveMethod m = opts.method;
    if (m == SolveMethod::automatic)
        m = k.rows() < opts.dense_threshold ? SolveMethod::dense : SolveMethod::cg;
    return m == SolveMethod::dense ? solve_dense(k, f, opts) : solve_cg(k, f, opts, guess);
}

SolveResult solve(const ConstrainedSystem& sys, const SolveOptions& opts, const Vector* guess)
{
    auto res = solve(sys.k, sys.f, opts, guess);
    for (const auto& pd : sys.constrained)
        res.d[pd.dof] = pd.value;
    return res;
}

// ---------------------------------------------------------------------------
// Reactions

Reactions reaction_forces(const Mesh& mesh, const SparseSym& k, const Vector& d, const Vector& f,
                          const std::vector<PrescribedDof>& constrained, const std::vector<std::string>& sets)
{
    Reactions out;
    out.per_node.assign(mesh.num_nodes(), Vec2::Zero());
    const Vector kd = 0.5 * k.multiply(d);
    for (const auto& pd : constrained)
        out.per_node[DofMap::node_of(pd.dof)][DofMap::component_of(pd.dof)] = kd[pd.dof] - f[pd.dof];
    for (const auto& name : sets) {
        Vec2 sum = Vec2::Zero();
        for (int node : mesh.node_set(name))
            sum += out.per_node[node];
        out.per_set[name] = sum;
    }
    return out;
}

} // namespace perifem
