#include "perifem/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace perifem {

ScenarioPreset scenario_preset(const std::string& name)
{
    ScenarioPreset s;
    s.name = name;
    if (name == "notched_beam") {
        BeamGeometry g;
        g.notch_width = 3.0;
        s.geometry = g;
        s.bcs = {{"load", Component::y, -0.75},
                 {"support_left", Component::both, 0.0},
                 {"support_right", Component::y, 0.0}};
        s.tracked = {{"load", 1}};
        s.increments = 20;
        s.E = 30000.0;
    } else if (name == "brazilian_disk") {
        s.geometry = DiskGeometry{};
        s.bcs = {{"load_top", Component::x, 0.0},
                 {"load_top", Component::y, -1.25},
                 {"support_bottom", Component::both, 0.0}};
        s.tracked = {{"load_top", 1}};
        s.increments = 64;
        s.E = 3100.0;
    } else if (name == "den_plate") {
        s.geometry = PlateGeometry{};
        s.bcs = {{"bottom", Component::y, 0.0},
                 {"right_shear", Component::x, 0.0},
                 {"top", Component::y, 0.45},
                 {"left_shear", Component::x, 0.45}};
        s.tracked = {{"top", 1}, {"left_shear", 0}};
        s.increments = 25;
        s.E = 30000.0;
    } else {
        throw std::invalid_argument("unknown scenario '" + name + "'");
    }
    return s;
}

std::vector<std::string> scenario_names() { return {"notched_beam", "brazilian_disk", "den_plate"}; }

namespace {

struct Entry {
    std::string value;
    int line = 0;
};

using Section = std::multimap<std::string, Entry>;

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::map<std::string, Section> parse_ini(std::string_view text)
{
    static const std::set<std::string> known{"material", "geometry", "loading", "run", "output"};
    std::map<std::string, Section> out;
    std::string current;
    int line = 0;
    std::istringstream is{std::string(text)};
    std::string raw;
    while (std::getline(is, raw)) {
        ++line;
        std::string l = raw;
        if (auto c = l.find_first_of("#;"); c != std::string::npos)
            l.erase(c);
        l = trim(l);
        if (l.empty())
            continue;
        if (l.front() == '[') {
            if (l.back() != ']')
                throw ParseError("malformed section header", line);
            current = trim(std::string_view(l).substr(1, l.size() - 2));
            if (!known.count(current))
                throw ParseError("unknown section [" + current + "]", line);
            out[current];
            continue;
        }
        const auto eq = l.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value'", line);
        if (current.empty())
            throw ParseError("key outside of a section", line);
        const std::string key = trim(std::string_view(l).substr(0, eq));
        out[current].emplace(key, Entry{trim(std::string_view(l).substr(eq + 1)), line});
    }
    return out;
}

class Reader {
public:
    Reader(std::map<std::string, Section> sections) : sections_(std::move(sections)) {}

    std::optional<Entry> get(const std::string& section, const std::string& key)
    {
        mark(section, key);
        auto s = sections_.find(section);
        if (s == sections_.end())
            return std::nullopt;
        auto [lo, hi] = s->second.equal_range(key);
        if (lo == hi)
            return std::nullopt;
        if (std::next(lo) != hi)
            throw ParseError("duplicate key " + section + "." + key, std::next(lo)->second.line);
        return lo->second;
    }

    std::vector<Entry> all(const std::string& section, const std::string& key)
    {
        mark(section, key);
        std::vector<Entry> out;
        auto s = sections_.find(section);
        if (s == sections_.end())
            return out;
        auto [lo, hi] = s->second.equal_range(key);
        for (auto it = lo; it != hi; ++it)
            out.push_back(it->second);
        return out;
    }

    double number(const std::string& section, const std::string& key, double fallback)
    {
        auto e = get(section, key);
        if (!e)
            return fallback;
        return to_number(*e, section + "." + key);
    }

    int integer(const std::string& section, const std::string& key, int fallback)
    {
        const double v = number(section, key, fallback);
        if (v != std::floor(v))
            throw ParseError(section + "." + key + " must be an integer", get(section, key)->line);
        return static_cast<int>(v);
    }

    bool boolean(const std::string& section, const std::string& key, bool fallback)
    {
        auto e = get(section, key);
        if (!e)
            return fallback;
        if (e->value == "true" || e->value == "yes" || e->value == "1" || e->value == "on")
            return true;
        if (e->value == "false" || e->value == "no" || e->value == "0" || e->value == "off")
            return false;
        throw ParseError(section + "." + key + ": expected a boolean", e->line);
    }

    std::string text(const std::string& section, const std::string& key, const std::string& fallback)
    {
        auto e = get(section, key);
        return e ? e->value : fallback;
    }

    /// Rejects keys never requested.
    void reject_unknown() const
    {
        for (const auto& [name, sec] : sections_)
            for (const auto& [key, entry] : sec)
                if (!used_.count(name + "." + key))
                    throw ParseError("unknown key " + name + "." + key, entry.line);
    }

    static double to_number(const Entry& e, const std::string& what)
    {
        if (e.value == "inf" || e.value == "+inf" || e.value == "infinity")
            return std::numeric_limits<double>::infinity();
        try {
            std::size_t used = 0;
            const double v = std::stod(e.value, &used);
            if (used != e.value.size())
                throw std::invalid_argument(e.value);
            return v;
        } catch (const std::exception&) {
            throw ParseError(what + ": expected a number, got '" + e.value + "'", e.line);
        }
    }

private:
    void mark(const std::string& section, const std::string& key) { used_.insert(section + "." + key); }

    std::map<std::string, Section> sections_;
    std::set<std::string> used_;
};

Component parse_component(const std::string& s, int line)
{
    if (s == "x") return Component::x;
    if (s == "y") return Component::y;
    if (s == "both" || s == "xy") return Component::both;
    throw ParseError("component must be x, y or both (got '" + s + "')", line);
}

void read_beam(Reader& r, BeamGeometry& g)
{
    g.length = r.number("geometry", "length", g.length);
    g.height = r.number("geometry", "height", g.height);
    g.notch_length = r.number("geometry", "notch_length", g.notch_length);
    g.notch_width = r.number("geometry", "notch_width", g.notch_width);
    g.notch_center = r.number("geometry", "notch_center", g.notch_center);
    g.support_inset = r.number("geometry", "support_inset", g.support_inset);
    g.load_span = r.number("geometry", "load_span", g.load_span);
    g.patch_half_width = r.number("geometry", "patch_half_width", g.patch_half_width);
    g.h = r.number("geometry", "h", g.h);
}

void read_disk(Reader& r, DiskGeometry& g)
{
    g.radius = r.number("geometry", "radius", g.radius);
    g.slit_half_length = r.number("geometry", "slit_half_length", g.slit_half_length);
    g.slit_width = r.number("geometry", "slit_width", g.slit_width);
    g.slit_angle = r.number("geometry", "slit_angle", g.slit_angle);
    g.inner_fraction = r.number("geometry", "inner_fraction", g.inner_fraction);
    g.patch_half_width = r.number("geometry", "patch_half_width", g.patch_half_width);
    g.h = r.number("geometry", "h", g.h);
}

void read_plate(Reader& r, PlateGeometry& g)
{
    g.width = r.number("geometry", "width", g.width);
    g.height = r.number("geometry", "height", g.height);
    g.notch_depth = r.number("geometry", "notch_depth", g.notch_depth);
    g.notch_width = r.number("geometry", "notch_width", g.notch_width);
    g.h = r.number("geometry", "h", g.h);
}

} // namespace

ParsedConfig parse_config(std::string_view text, const std::filesystem::path& base_dir)
{
    Reader r(parse_ini(text));
    ParsedConfig cfg;

    cfg.scenario = r.text("run", "scenario", "");
    if (cfg.scenario.empty())
        throw ParseError("missing required key run.scenario (notched_beam, brazilian_disk, den_plate, rect, file)", 0);

    std::optional<ScenarioPreset> preset;
    if (cfg.scenario != "rect" && cfg.scenario != "file") {
        try {
            preset = scenario_preset(cfg.scenario);
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what(), r.get("run", "scenario")->line);
        }
    }

    // geometry
    Mesh mesh;
    if (preset) {
        SpecimenGeometry g = preset->geometry;
        std::visit(
            [&](auto& geo) {
                using T = std::decay_t<decltype(geo)>;
                if constexpr (std::is_same_v<T, BeamGeometry>)
                    read_beam(r, geo);
                else if constexpr (std::is_same_v<T, DiskGeometry>)
                    read_disk(r, geo);
                else
                    read_plate(r, geo);
            },
            g);
        mesh = generate_specimen_mesh(g);
    } else if (cfg.scenario == "rect") {
        const double w = r.number("geometry", "width", 1.0), h = r.number("geometry", "height", 1.0);
        mesh = generate_rect_mesh(w, h, r.integer("geometry", "nx", 1), r.integer("geometry", "ny", 1));
    } else {
        auto file = r.get("geometry", "mesh_file");
        if (!file)
            throw ParseError("missing required key geometry.mesh_file for scenario 'file'", 0);
        std::filesystem::path path = file->value;
        if (path.is_relative() && !base_dir.empty())
            path = base_dir / path;
        std::ifstream in(path);
        if (!in)
            throw ParseError("cannot open mesh file " + path.string(), file->line);
        std::stringstream ss;
        ss << in.rdbuf();
        mesh = load_mesh(ss.str());
    }

    // material
    const double E = r.number("material", "E", preset ? preset->E : 30000.0);
    const double nu = r.number("material", "nu", 1.0 / 3.0);
    const double s_crit = r.number("material", "s_crit", preset ? preset->s_crit : 0.02);
    const double thickness = r.number("material", "thickness", 1.0);
    const double horizon_factor = r.number("material", "horizon_factor", 3.0);
    const double ell_divisor = r.number("material", "ell_divisor", 15.0);
    if (std::abs(nu - 1.0 / 3.0) > 1e-12)
        throw ParseError("material.nu must be 1/3 for the 2D bond-based model", r.get("material", "nu")->line);

    cfg.run.material = make_material(E, nu, s_crit, thickness, average_element_size(mesh), horizon_factor, ell_divisor);

    // loading
    const auto bc_lines = r.all("loading", "bc");
    if (!bc_lines.empty()) {
        for (const auto& e : bc_lines) {
            std::istringstream ls(e.value);
            std::string set, comp, value;
            if (!(ls >> set >> comp >> value) || !(ls >> std::ws).eof())
                throw ParseError("loading.bc: expected '<node set> <x|y|both> <value>'", e.line);
            cfg.run.bcs.push_back({set, parse_component(comp, e.line), Reader::to_number({value, e.line}, "loading.bc")});
        }
    } else if (preset) {
        cfg.run.bcs = preset->bcs;
    } else {
        throw ParseError("missing required key loading.bc for scenario '" + cfg.scenario + "'", 0);
    }
    if (auto disp = r.get("loading", "displacement")) {
        // rescales the preset's main loading value(s)
        const double v = Reader::to_number(*disp, "loading.displacement");
        if (!preset || !bc_lines.empty())
            throw ParseError("loading.displacement applies to preset loading only", disp->line);
        const std::string main = cfg.scenario == "notched_beam" ? "load" : cfg.scenario == "brazilian_disk" ? "load_top" : "top";
        for (auto& bc : cfg.run.bcs)
            if (bc.node_set == main && bc.value != 0.0)
                bc.value = std::copysign(v, bc.value);
    }
    if (auto shear = r.get("loading", "shear_displacement")) {
        if (cfg.scenario != "den_plate" || !bc_lines.empty())
            throw ParseError("loading.shear_displacement applies to the den_plate preset only", shear->line);
        const double v = Reader::to_number(*shear, "loading.shear_displacement");
        for (auto& bc : cfg.run.bcs)
            if (bc.node_set == "left_shear")
                bc.value = v;
    }
    if (auto track = r.get("loading", "track")) {
        std::istringstream ls(track->value);
        std::string item;
        while (std::getline(ls, item, ',')) {
            item = trim(item);
            if (item.empty())
                continue;
            const auto colon = item.find(':');
            TrackedForce t{item.substr(0, colon), 1};
            if (colon != std::string::npos) {
                const auto c = item.substr(colon + 1);
                if (c != "x" && c != "y")
                    throw ParseError("loading.track: component must be x or y", track->line);
                t.component = c == "x" ? 0 : 1;
            }
            cfg.run.tracked.push_back(t);
        }
    } else if (preset && bc_lines.empty()) {
        cfg.run.tracked = preset->tracked;
    } else {
        // track every set with a nonzero prescribed value
        for (const auto& bc : cfg.run.bcs)
            if (bc.value != 0.0 && std::none_of(cfg.run.tracked.begin(), cfg.run.tracked.end(),
                                                [&](const TrackedForce& t) { return t.node_set == bc.node_set; }))
                cfg.run.tracked.push_back({bc.node_set, bc.component == Component::x ? 0 : 1});
    }

    // run
    cfg.run.increments = r.integer("run", "increments", preset ? preset->increments : 20);
    cfg.run.inner_cap = r.integer("run", "inner_cap", 100);
    cfg.run.quadrature_order = r.integer("run", "quadrature_order", 2);
    cfg.run.threads = r.integer("run", "threads", 1);
    cfg.run.check_rebuild = r.boolean("run", "check_rebuild", false);
    {
        const auto method = r.text("run", "solver", "auto");
        if (method == "auto") cfg.run.solver.method = SolveMethod::automatic;
        else if (method == "dense") cfg.run.solver.method = SolveMethod::dense;
        else if (method == "cg") cfg.run.solver.method = SolveMethod::cg;
        else throw ParseError("run.solver must be auto, dense or cg", r.get("run", "solver")->line);
    }
    cfg.run.solver.tolerance = r.number("run", "tolerance", cfg.run.solver.tolerance);

    // output
    cfg.output.name = r.text("output", "name", preset ? preset->name : cfg.scenario);
    cfg.output.dir = r.text("output", "dir", ".");
    cfg.output.vtk = r.boolean("output", "vtk", true);
    cfg.output.vtk_every = r.integer("output", "vtk_every", 1);
    cfg.output.history = r.boolean("output", "history", true);
    cfg.output.pe_csv = r.boolean("output", "pe_csv", false);
    cfg.output.mesh = r.boolean("output", "mesh", false);
    if (cfg.output.vtk_every < 1)
        throw ParseError("output.vtk_every must be >= 1", r.get("output", "vtk_every")->line);

    r.reject_unknown();

    cfg.run.mesh = std::move(mesh);
    cfg.run.validate();
    resolve_bcs(cfg.run.mesh, cfg.run.bcs);   // surfaces unknown sets and conflicts now
    return cfg;
}

ParsedConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

} // namespace perifem
