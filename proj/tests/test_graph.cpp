#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gsim/graph/graph_json.hpp"
#include "gsim/graph/snapshot.hpp"
#include "gsim/util/rng.hpp"

using namespace gsim::graph;

namespace {

Schema traffic_like_schema() {
    return Schema(
        {{"car", 3}, {"lane", 2}, {"road", 1}, {"junction", 2}, {"signal", 2}},
        {{"follows", "car", "car", 2},
         {"on_lane", "car", "lane", 1},
         {"connects_to", "lane", "lane", 0},
         {"controls", "signal", "lane", 0}});
}

GraphSnapshot make_snapshot(std::int64_t ts = 0) {
    return GraphSnapshot::create(traffic_like_schema(), ts);
}

} // namespace

TEST_CASE("new snapshot is empty with the given timestamp") {
    auto g = make_snapshot(0);
    CHECK(g.node_count() == 0);
    CHECK(g.edge_count() == 0);
    CHECK_FALSE(g.sealed());

    auto g42 = make_snapshot(42);
    CHECK(g42.timestamp() == 42);
}

TEST_CASE("schema validation rejects duplicates and dangling endpoint kinds") {
    CHECK_THROWS_AS(Schema({{"car", 3}, {"car", 2}}, {}), GraphError);
    CHECK_THROWS_AS(Schema({{"car", 3}}, {{"follows", "car", "ghost", 0}}), GraphError);
    CHECK_THROWS_AS(Schema({{"car", -1}}, {}), GraphError);
    CHECK_THROWS_AS(Schema({{"car", 3}}, {{"follows", "car", "car", 0}, {"follows", "car", "car", 1}}),
                    GraphError);
}

TEST_CASE("add_node stores features and assigns distinct refs") {
    auto g = make_snapshot();
    const double f[3] = {0.0, 0.0, 0.0};
    auto a = g.add_node("car", f);
    CHECK(g.node_count() == 1);
    auto b = g.add_node("car", f);
    CHECK(a != b);

    const auto view = g.node(a);
    CHECK(view.features.size() == 3);
    CHECK(view.features[0] == 0.0);

    const double wrong[2] = {1.0, 2.0};
    CHECK_THROWS_AS(g.add_node("car", wrong), GraphError);
    CHECK_THROWS_AS(g.add_node("bike", f), GraphError);
    const double bad[3] = {0.0, std::numeric_limits<double>::quiet_NaN(), 0.0};
    CHECK_THROWS_AS(g.add_node("car", bad), GraphError);
}

TEST_CASE("add_edge validates endpoints, kinds and dimensions") {
    auto g = make_snapshot();
    const double cf[3] = {1.0, 2.0, 3.0};
    const double lf[2] = {5.0, 1.0};
    auto car_a = g.add_node("car", cf);
    auto car_b = g.add_node("car", cf);
    auto lane = g.add_node("lane", lf);

    const double ef[2] = {35.0, 0.0};
    g.add_edge(car_a, car_b, "follows", ef);
    CHECK(g.edge_count() == 1);

    // kind mismatch: follows is declared car -> car
    CHECK_THROWS_AS(g.add_edge(car_a, lane, "follows", ef), GraphError);
    // self-loop
    CHECK_THROWS_AS(g.add_edge(car_a, car_a, "follows", ef), GraphError);
    // duplicate same-type edge on the same ordered pair
    CHECK_THROWS_AS(g.add_edge(car_a, car_b, "follows", ef), GraphError);
    // dimension mismatch
    const double e1[1] = {3.0};
    CHECK_THROWS_AS(g.add_edge(car_a, car_b, "follows", e1), GraphError);
    // missing endpoint
    CHECK_THROWS_AS(g.add_edge(NodeRef{999}, car_b, "follows", ef), GraphError);

    // a different kind between the same ordered pair is allowed
    g.add_edge(car_a, lane, "on_lane", e1);
    CHECK(g.edge_count() == 2);
}

TEST_CASE("in_neighbors returns insertion order and honors the kind filter") {
    auto g = make_snapshot();
    const double cf[3] = {0, 0, 0};
    auto a = g.add_node("car", cf);
    auto b = g.add_node("car", cf);
    auto v = g.add_node("car", cf);

    CHECK(g.in_neighbors(v).empty());

    const double ef[2] = {1.0, 0.0};
    auto e1 = g.add_edge(a, v, "follows", ef);
    auto e2 = g.add_edge(b, v, "follows", ef);

    const auto in = g.in_neighbors(v);
    REQUIRE(in.size() == 2);
    CHECK(in[0].first == a);
    CHECK(in[0].second == e1);
    CHECK(in[1].first == b);
    CHECK(in[1].second == e2);

    CHECK(g.in_neighbors(v, "controls").empty());
    CHECK_THROWS_AS(g.in_neighbors(NodeRef{1234}), GraphError);
}

TEST_CASE("seal freezes the snapshot and is idempotent") {
    auto g = make_snapshot();
    const double cf[3] = {1, 2, 3};
    auto a = g.add_node("car", cf);
    g.seal();
    CHECK(g.sealed());
    g.seal();
    CHECK(g.sealed());

    CHECK_THROWS_AS(g.add_node("car", cf), GraphError);
    const double ef[2] = {0, 0};
    CHECK_THROWS_AS(g.add_edge(a, a, "follows", ef), GraphError);

    const auto before = g.node(a);
    CHECK(before.features[2] == 3.0);
}

TEST_CASE("feature storage accounting and edge partition") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        auto g = make_snapshot();
        std::vector<NodeRef> cars, lanes;
        const int n_cars = 2 + static_cast<int>(rng() % 8);
        const int n_lanes = 1 + static_cast<int>(rng() % 4);
        for (int i = 0; i < n_cars; ++i) {
            const double f[3] = {gsim::util::next_u01(rng), gsim::util::next_u01(rng), 0.5};
            cars.push_back(g.add_node("car", f));
        }
        for (int i = 0; i < n_lanes; ++i) {
            const double f[2] = {gsim::util::next_u01(rng), 1.0};
            lanes.push_back(g.add_node("lane", f));
        }
        for (int i = 0; i + 1 < n_cars; ++i) {
            if (rng() % 2 == 0) {
                const double ef[2] = {gsim::util::next_u01(rng), 0.0};
                g.add_edge(cars[i], cars[i + 1], "follows", ef);
            }
        }
        for (int i = 0; i < n_cars; ++i) {
            const double ef[1] = {0.25};
            g.add_edge(cars[i], lanes[i % n_lanes], "on_lane", ef);
        }

        // total stored node-feature scalars match sum over types of count*dim
        std::size_t stored = 0;
        std::vector<std::size_t> type_count(g.schema().node_type_count(), 0);
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            auto v = g.node_at(i);
            stored += v.features.size();
            ++type_count[v.type];
        }
        std::size_t expected = 0;
        for (int t = 0; t < g.schema().node_type_count(); ++t) {
            expected += type_count[t] * g.schema().node_feature_dim(t);
        }
        CHECK(stored == expected);

        // every edge appears in exactly one node's in-neighborhood
        std::size_t seen = 0;
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            seen += g.in_neighbors(g.node_at(i).ref).size();
        }
        CHECK(seen == g.edge_count());
    }
}

TEST_CASE("graph json round trip is byte-identical and content-preserving") {
    std::mt19937_64 rng(31);
    auto g = make_snapshot(17);
    std::vector<NodeRef> cars;
    for (int i = 0; i < 6; ++i) {
        const double f[3] = {gsim::util::next_symmetric(rng, 30.0),
                             gsim::util::next_u01(rng) * 1e-3, 1.0 / 3.0};
        cars.push_back(g.add_node("car", f));
    }
    for (int i = 0; i + 1 < 6; ++i) {
        const double ef[2] = {gsim::util::next_u01(rng) * 100.0,
                              gsim::util::next_symmetric(rng, 5.0)};
        g.add_edge(cars[i + 1], cars[i], "follows", ef);
    }
    g.seal();

    const std::string text = serialize_graph(g);
    const GraphSnapshot parsed = parse_graph(text);
    CHECK(parsed.sealed());
    CHECK(parsed.timestamp() == 17);
    CHECK(parsed.node_count() == g.node_count());
    CHECK(parsed.edge_count() == g.edge_count());
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        const auto a = g.node_at(i);
        const auto b = parsed.node_at(i);
        CHECK(a.ref == b.ref);
        CHECK(a.type == b.type);
        REQUIRE(a.features.size() == b.features.size());
        for (std::size_t k = 0; k < a.features.size(); ++k) {
            CHECK(a.features[k] == b.features[k]);  // bit-exact
        }
    }
    CHECK(serialize_graph(parsed) == text);
}

TEST_CASE("parse_graph rejects malformed documents") {
    CHECK_THROWS_AS(parse_graph("not json"), GraphError);
    CHECK_THROWS_AS(parse_graph("{}"), GraphError);
}
