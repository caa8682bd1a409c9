#pragma once

#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "perifem/assembly.hpp"
#include "perifem/bonds.hpp"
#include "perifem/material.hpp"
#include "perifem/mesh.hpp"
#include "perifem/pe.hpp"

namespace perifem {

/// A reaction resultant reported in the load history.
struct TrackedForce {
    std::string node_set;
    int component = 1;   ///< 0: x, 1: y
};

struct RunConfig {
    Mesh mesh;
    MaterialParams material;
    std::vector<BoundaryCondition> bcs;
    std::vector<TrackedForce> tracked;
    int increments = 20;
    int inner_cap = 100;
    int quadrature_order = 2;
    int threads = 1;
    SolveOptions solver;
    /// Rebuild K from the flag table at the end of each increment and record
    /// its relative difference to the incrementally updated K.
    bool check_rebuild = false;

    void validate() const;
};

struct IncrementRecord {
    int step = 0;
    double scale = 0.0;                       ///< t / N
    double displacement = 0.0;                ///< scale * reference prescribed value
    std::map<std::string, Vec2> resultants;   ///< reaction resultant per tracked set
    std::map<std::string, int> set_sizes;
    int new_breaks = 0;                       ///< bonds broken during this increment
    std::size_t broken_total = 0;             ///< cumulative
    double max_damage = 0.0;
    int inner_iterations = 0;
    bool cap_hit = false;
    double rebuild_mismatch = std::numeric_limits<double>::quiet_NaN();
};

struct LoadHistory {
    std::vector<IncrementRecord> records;
    std::vector<TrackedForce> tracked;
};

/// State snapshot handed to observers after each inner pass / increment.
struct RunState {
    const Mesh& mesh;
    const BondTable& table;
    const Vector& displacement;
    const std::vector<double>& damage;   ///< nodal; valid in on_increment only
    int step = 0;
    int inner_pass = 0;
    int new_breaks = 0;
};

struct RunObserver {
    virtual ~RunObserver() = default;
    virtual void on_inner_pass(const RunState&) {}
    virtual void on_increment(const RunState&, const IncrementRecord&) {}
};

struct RunResult {
    LoadHistory history;
    std::vector<double> damage;   ///< nodal effective damage
    Vector displacement;
    std::size_t num_pes = 0;
    std::size_t num_bonds = 0;
    /// Midpoint of the first bond(s) to break, if any broke.
    std::vector<Vec2> first_break_points;
    int first_break_step = 0;
};

/// Flags every intact bond whose stretch under d reaches s_crit; returns the
/// ids of the bonds broken in this pass.
std::vector<int> evaluate_breaks(const Mesh& mesh, const Vector& d, BondTable& table, const MaterialParams& p);

/// Effective damage at each quadrature site.
std::vector<double> site_damage(const BondTable& table, const MaterialParams& p);

/// Nodal damage: inverse-distance-weighted average of the site values of the
/// elements sharing each node.
std::vector<double> damage_field(const Mesh& mesh, const BondTable& table, const MaterialParams& p);

/// Incremental displacement-controlled loading with an inner
/// solve / break / update loop per increment.
RunResult run_quasi_static(const RunConfig& config, RunObserver* observer = nullptr);

} // namespace perifem
