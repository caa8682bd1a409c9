#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "perifem/pe.hpp"

using namespace perifem;

namespace {

Mesh two_squares(double gap)
{
    return Mesh({{0, {0, 0}}, {1, {1, 0}}, {2, {1, 1}}, {3, {0, 1}},
                 {4, {1 + gap, 0}}, {5, {2 + gap, 0}}, {6, {2 + gap, 1}}, {7, {1 + gap, 1}}},
                {{0, {0, 1, 2, 3}}, {1, {4, 5, 6, 7}}});
}

std::set<std::pair<int, int>> pair_set(const PeSet& s)
{
    std::set<std::pair<int, int>> out;
    for (const auto& pe : s.pes)
        out.emplace(pe.ej, pe.ei);
    return out;
}

} // namespace

TEST_CASE("element_neighborhood")
{
    const Mesh one = generate_rect_mesh(1, 1, 1, 1);
    CHECK(element_neighborhood(one, 0, 3.0) == std::vector<int>{0});

    const Mesh apart = two_squares(2.0);
    CHECK(element_neighborhood(apart, 0, 1.0) == std::vector<int>{0});
    CHECK(element_neighborhood(apart, 1, 1.0) == std::vector<int>{1});
    CHECK(element_neighborhood(apart, 0, 2.0) == std::vector<int>{0, 1});   // closed: distance == delta

    const Mesh grid = generate_rect_mesh(3, 3, 3, 3);
    CHECK(element_neighborhood(grid, 4, 3.0).size() == 9);
    CHECK_THROWS(element_neighborhood(grid, 9, 3.0));
    CHECK_THROWS(element_neighborhood(grid, 0, 0.0));
}

TEST_CASE("element_neighborhood agrees with an exhaustive distance scan")
{
    BeamGeometry g;
    g.length = 20;
    g.height = 8;
    g.notch_length = 3;
    g.load_span = 8;
    const Mesh m = generate_specimen_mesh(g);
    for (double delta : {0.7, 1.5, 3.0}) {
        for (int ei = 0; ei < static_cast<int>(m.num_elements()); ++ei) {
            std::vector<int> expected;
            for (int ej = 0; ej < static_cast<int>(m.num_elements()); ++ej)
                if (element_distance(m, ei, ej) <= delta)
                    expected.push_back(ej);
            CHECK(element_neighborhood(m, ei, delta) == expected);
        }
    }
}

TEST_CASE("generate_pe_set small cases")
{
    const PeSet one = generate_pe_set(generate_rect_mesh(1, 1, 1, 1), 3.0);
    REQUIRE(one.size() == 1);
    CHECK(one.pes[0].ej == 0);
    CHECK(one.pes[0].ei == 0);

    const PeSet adjacent = generate_pe_set(two_squares(0.5), 1.0);
    REQUIRE(adjacent.size() == 4);
    // ordered by ei, then ej
    CHECK(adjacent.pes[0].ej == 0);
    CHECK(adjacent.pes[0].ei == 0);
    CHECK(adjacent.pes[1].ej == 1);
    CHECK(adjacent.pes[1].ei == 0);
    CHECK(adjacent.pes[2].ej == 0);
    CHECK(adjacent.pes[2].ei == 1);
    for (int k = 0; k < 4; ++k)
        CHECK(adjacent.pes[k].id == k);

    CHECK(generate_pe_set(two_squares(2.0), 1.0).size() == 2);
}

TEST_CASE("PE node lists keep duplicates, ej first")
{
    const Mesh m = generate_rect_mesh(2, 1, 2, 1);
    const PeSet s = generate_pe_set(m, 3.0);
    for (const auto& pe : s.pes) {
        for (int a = 0; a < 4; ++a) {
            CHECK(pe.node_ids[a] == m.elements()[pe.ej].node_ids[a]);
            CHECK(pe.node_ids[4 + a] == m.elements()[pe.ei].node_ids[a]);
        }
    }
    const auto& self = s.pes[0];
    CHECK(self.ej == self.ei);
    CHECK(std::multiset<int>(self.node_ids.begin(), self.node_ids.end()).size() == 8);
}

TEST_CASE("PeSet invariants and monotonicity in delta")
{
    PlateGeometry g;
    g.width = g.height = 20;
    g.notch_depth = 5;
    const Mesh m = generate_specimen_mesh(g);
    std::set<std::pair<int, int>> previous;
    for (double delta : {1.0, 2.5, 3.75, 6.0}) {
        const PeSet s = generate_pe_set(m, delta);
        const auto pairs = pair_set(s);
        std::size_t total = 0;
        for (const auto& h : s.neighborhoods)
            total += h.size();
        CHECK(total == s.size());
        CHECK(pairs.size() == s.size());

        std::map<std::pair<int, int>, int> unordered;
        for (const auto& [a, b] : pairs) {
            CHECK(pairs.count({b, a}) == 1);
            ++unordered[{std::min(a, b), std::max(a, b)}];
        }
        for (const auto& [key, count] : unordered)
            CHECK(count == (key.first == key.second ? 1 : 2));
        for (int e = 0; e < static_cast<int>(m.num_elements()); ++e)
            CHECK(pairs.count({e, e}) == 1);

        CHECK(std::includes(pairs.begin(), pairs.end(), previous.begin(), previous.end()));
        previous = pairs;
    }
}

TEST_CASE("write_pe_csv")
{
    std::ostringstream os;
    write_pe_csv(generate_pe_set(two_squares(0.5), 1.0), os);
    CHECK(os.str() == "pe_id,ej,ei\n0,0,0\n1,1,0\n2,0,1\n3,1,1\n");
}
