#include "perifem/fracture.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "perifem/log.hpp"

namespace perifem {

void RunConfig::validate() const
{
    if (increments < 1)
        throw InvariantError("run: increment count must be >= 1");
    if (inner_cap < 1)
        throw InvariantError("run: inner iteration cap must be >= 1");
    if (mesh.num_elements() == 0)
        throw InvariantError("run: empty mesh");
    material.validate();
    for (const auto& t : tracked)
        if (!mesh.has_node_set(t.node_set))
            throw InvariantError("run: tracked node set '" + t.node_set + "' not in mesh");
}

namespace {

std::vector<Vec2> site_displacements(const Mesh& mesh, const BondTable& table, const Vector& d)
{
    std::vector<Vec2> u(table.sites().size(), Vec2::Zero());
    for (std::size_t s = 0; s < u.size(); ++s) {
        const auto& site = table.sites()[s];
        const auto& nodes = mesh.elements()[site.element].node_ids;
        for (int a = 0; a < 4; ++a)
            u[s] += site.n[a] * Vec2(d[2 * nodes[a]], d[2 * nodes[a] + 1]);
    }
    return u;
}

double stretch_of(const Bond& b, const std::vector<Vec2>& u)
{
    return bond_stretch(b.xi, u[b.site_a] - u[b.site_b]);
}

} // namespace

std::vector<int> evaluate_breaks(const Mesh& mesh, const Vector& d, BondTable& table, const MaterialParams& p)
{
    const auto u = site_displacements(mesh, table, d);
    std::vector<int> broken;
    const auto& bonds = table.bonds();
    for (int id = 0; id < static_cast<int>(bonds.size()); ++id) {
        const auto& b = bonds[id];
        if (b.flag == BondFlag::broken)
            continue;
        if (update_bond_flag(stretch_of(b, u), p.s_crit, b.flag) == BondFlag::broken)
            broken.push_back(id);
    }
    // flags change only after every stretch of this pass has been evaluated
    for (int id : broken)
        table.break_bond(id);
    return broken;
}

std::vector<double> site_damage(const BondTable& table, const MaterialParams& p)
{
    const auto& sites = table.sites();
    std::vector<double> phi(sites.size(), 0.0);
    std::vector<DamageBond> local;
    for (std::size_t s = 0; s < sites.size(); ++s) {
        local.clear();
        for (int id : table.bonds_at(static_cast<int>(s))) {
            const auto& b = table.bonds()[id];
            const int other = b.site_a == static_cast<int>(s) ? b.site_b : b.site_a;
            local.push_back({b.flag, b.r, sites[other].volume});
        }
        phi[s] = effective_damage_at(local, p);
    }
    return phi;
}

std::vector<double> damage_field(const Mesh& mesh, const BondTable& table, const MaterialParams& p)
{
    const auto phi_site = site_damage(table, p);
    const auto& sites = table.sites();
    std::vector<double> num(mesh.num_nodes(), 0.0), den(mesh.num_nodes(), 0.0);
    const int gp = table.gps_per_element();
    for (const auto& e : mesh.elements())
        for (int q = 0; q < gp; ++q) {
            const int s = table.site_index(e.id, q);
            for (int node : e.node_ids) {
                const double dist = (sites[s].x - mesh.position(node)).norm();
                const double w = 1.0 / std::max(dist, 1e-300);
                num[node] += w * phi_site[s];
                den[node] += w;
            }
        }
    std::vector<double> phi(mesh.num_nodes(), 0.0);
    for (std::size_t n = 0; n < phi.size(); ++n)
        phi[n] = den[n] > 0.0 ? std::clamp(num[n] / den[n], 0.0, 1.0) : 0.0;
    return phi;
}

namespace {

// Last resort for fragments that no constraint reaches: a weak spring ties
// every dof to its previous value, which leaves well-supported parts
// essentially untouched and keeps floating pieces in place.
SolveResult solve_regularized(const ConstrainedSystem& sys, const SolveOptions& opts, const Vector& anchor)
{
    ConstrainedSystem reg = sys;
    const Vector diag = reg.k.diagonal();
    const double eps = 1e-8 * diag.cwiseAbs().mean();
    for (int i = 0; i < reg.k.rows(); ++i)
        reg.k.add(i, i, eps);
    reg.f += 0.5 * eps * anchor;
    SolveOptions cg = opts;
    cg.method = SolveMethod::cg;
    return solve(reg, cg, &anchor);
}

SolveResult solve_step(const ConstrainedSystem& sys, const SolveOptions& opts, const Vector& previous)
{
    Vector guess = previous;
    for (const auto& pd : sys.constrained)
        guess[pd.dof] = pd.value;
    try {
        return solve(sys, opts, &guess);
    } catch (const SingularSystemError& e) {
        log_debug(std::string(e.what()) + "; retrying");
    } catch (const ConvergenceError& e) {
        log_debug(std::string(e.what()) + "; retrying");
    }
    // Detached fragments leave a consistent singular system; conjugate
    // gradients usually converge on its range.
    if (opts.method != SolveMethod::cg) {
        SolveOptions cg = opts;
        cg.method = SolveMethod::cg;
        try {
            return solve(sys, cg, &guess);
        } catch (const SingularSystemError&) {
        } catch (const ConvergenceError&) {
        }
    }
    log_warning("singular system after fracture; anchoring unsupported fragments to their previous position");
    return solve_regularized(sys, opts, guess);
}

double reference_value(const std::vector<BoundaryCondition>& bcs)
{
    double ref = 0.0;
    for (const auto& bc : bcs)
        if (std::abs(bc.value) > std::abs(ref))
            ref = bc.value;
    return ref;
}

} // namespace

RunResult run_quasi_static(const RunConfig& config, RunObserver* observer)
{
    config.validate();
    const Mesh& mesh = config.mesh;
    const MaterialParams& p = config.material;
    const auto rule = gauss_rule(config.quadrature_order);

    const PeSet pes = generate_pe_set(mesh, p.delta);
    BondTable table(mesh, pes, rule, p);
    AssemblyOptions aopt;
    aopt.threads = config.threads;
    aopt.prune_zeros = false;
    SparseSym k = assemble_stiffness(mesh, pes, table, p, aopt);
    const Vector f = Vector::Zero(2 * static_cast<Eigen::Index>(mesh.num_nodes()));
    const auto prescribed = resolve_bcs(mesh, config.bcs);
    const double ref = reference_value(config.bcs);

    RunResult result;
    result.num_pes = pes.size();
    result.num_bonds = table.bonds().size();
    result.history.tracked = config.tracked;
    std::vector<std::string> sets;
    for (const auto& t : config.tracked)
        sets.push_back(t.node_set);

    log_info("PEs " + std::to_string(pes.size()) + ", bonds " + std::to_string(table.bonds().size()) +
             ", dofs " + std::to_string(2 * mesh.num_nodes()));

    Vector d = Vector::Zero(f.size());
    const std::vector<double> no_damage;
    for (int step = 1; step <= config.increments; ++step) {
        const double scale = static_cast<double>(step) / config.increments;
        IncrementRecord rec;
        rec.step = step;
        rec.scale = scale;
        rec.displacement = scale * ref;

        int pass = 0;
        for (;;) {
            ++pass;
            const auto sys = apply_dirichlet(k, f, prescribed, scale);
            try {
                d = solve_step(sys, config.solver, d).d;
            } catch (const std::exception& e) {
                std::ostringstream os;
                os << "solver failure at step " << step << ", inner pass " << pass << " (broken bonds "
                   << table.broken_count() << "): " << e.what();
                throw std::runtime_error(os.str());
            }

            std::vector<Vec2> u_sites;
            if (result.first_break_points.empty())
                u_sites = site_displacements(mesh, table, d);
            const auto broken = evaluate_breaks(mesh, d, table, p);

            if (observer)
                observer->on_inner_pass(RunState{mesh, table, d, no_damage, step, pass,
                                                 static_cast<int>(broken.size())});
            if (broken.empty())
                break;

            if (result.first_break_points.empty()) {
                std::vector<std::pair<double, int>> order;
                for (int id : broken)
                    order.emplace_back(-stretch_of(table.bonds()[id], u_sites), id);
                std::sort(order.begin(), order.end());
                for (const auto& [neg_s, id] : order) {
                    const auto& b = table.bonds()[id];
                    result.first_break_points.push_back(0.5 * (table.sites()[b.site_a].x + table.sites()[b.site_b].x));
                }
                result.first_break_step = step;
            }
            rec.new_breaks += static_cast<int>(broken.size());
            subtract_bonds(k, mesh, table, broken, p);

            if (pass >= config.inner_cap) {
                rec.cap_hit = true;
                log_warning("step " + std::to_string(step) + ": inner iteration cap " +
                            std::to_string(config.inner_cap) + " reached with bonds still breaking");
                // report a displacement consistent with the current flags
                d = solve_step(apply_dirichlet(k, f, prescribed, scale), config.solver, d).d;
                break;
            }
        }
        rec.inner_iterations = pass;
        rec.broken_total = table.broken_count();

        const auto reactions = reaction_forces(mesh, k, d, f, resolve_bcs(mesh, config.bcs), sets);
        for (const auto& name : sets) {
            rec.resultants[name] = reactions.per_set.at(name);
            rec.set_sizes[name] = static_cast<int>(mesh.node_set(name).size());
        }
        result.damage = damage_field(mesh, table, p);
        rec.max_damage = result.damage.empty() ? 0.0 : *std::max_element(result.damage.begin(), result.damage.end());

        if (config.check_rebuild) {
            const auto rebuilt = assemble_stiffness(mesh, pes, table, p, aopt);
            rec.rebuild_mismatch = relative_difference(k, rebuilt);
        }

        {
            std::ostringstream os;
            os << "step " << step << "/" << config.increments << "  inner " << pass << "  new breaks "
               << rec.new_breaks << "  max phi " << rec.max_damage;
            for (const auto& [name, r] : rec.resultants)
                os << "  " << name << " (" << r.x() << ", " << r.y() << ") avg/node ("
                   << r.x() / rec.set_sizes[name] << ", " << r.y() / rec.set_sizes[name] << ")";
            log_info(os.str());
        }
        if (observer)
            observer->on_increment(RunState{mesh, table, d, result.damage, step, pass, rec.new_breaks}, rec);
        result.history.records.push_back(std::move(rec));
    }
    result.displacement = std::move(d);
    return result;
}

} // namespace perifem
