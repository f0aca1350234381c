#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "adagnn/graphdata/io.hpp"
#include "adagnn/graphdata/sampling.hpp"
#include "adagnn/graphdata/split.hpp"
#include "adagnn/graphdata/synthetic.hpp"
#include "doctest.h"

using namespace adagnn::graphdata;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
  const fs::path dir = fs::temp_directory_path() / "adagnn_graphdata_test";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p) << content;
  return p;
}

Graph path_graph(std::size_t n, bool timestamps = false) {
  std::vector<Edge> edges;
  for (NodeId i = 0; i + 1 < n; ++i) {
    Edge e{i, i + 1, std::nullopt};
    if (timestamps) e.timestamp = static_cast<double>((i * 7) % n);  // distinct, unsorted
    edges.push_back(e);
  }
  return Graph(n, edges);
}

Graph star_graph(std::size_t leaves) {
  std::vector<Edge> edges;
  for (NodeId i = 1; i <= leaves; ++i) edges.push_back({0, i, std::nullopt});
  return Graph(leaves + 2, edges);  // last node is isolated
}

}  // namespace

TEST_CASE("load_edge_csv") {
  SUBCASE("basic rows") {
    const Graph g = load_edge_csv(write_temp("basic.csv", "0,1\n1,2\n"), false);
    CHECK(g.num_nodes() == 3);
    CHECK(g.num_edges() == 2);
  }
  SUBCASE("empty file") {
    const Graph g = load_edge_csv(write_temp("empty.csv", ""), false);
    CHECK(g.num_nodes() == 0);
    CHECK(g.num_edges() == 0);
  }
  SUBCASE("compaction by first appearance") {
    const auto path = write_temp("remap.csv", "src,dst\n5,9\n9,5\n");
    const Graph g = load_edge_csv(path, false);
    CHECK(g.num_nodes() == 2);
    // Oracle: re-read the file and assign ids in order of first appearance.
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    std::map<std::string, std::size_t> remap;
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string a, b;
      std::getline(ss, a, ',');
      std::getline(ss, b, ',');
      remap.try_emplace(a, remap.size());
      remap.try_emplace(b, remap.size());
    }
    for (const auto& [name, id] : remap) CHECK(g.find_node(name) == id);
    CHECK(g.edges()[0].src == 0);
    CHECK(g.edges()[1].src == 1);
  }
  SUBCASE("timestamps and header") {
    const Graph g = load_edge_csv(write_temp("ts.csv", "src,dst,ts\na,b,1.5\nb,c,2\n"), true);
    CHECK(g.has_timestamps());
    CHECK(*g.edges()[0].timestamp == 1.5);
  }
  SUBCASE("malformed row names the line") {
    CHECK_THROWS_WITH_AS(load_edge_csv(write_temp("bad.csv", "0,1\n1\n"), false), doctest::Contains(":2:"), GraphError);
  }
  SUBCASE("negative timestamp") {
    CHECK_THROWS_WITH_AS(load_edge_csv(write_temp("neg.csv", "0,1,-3\n"), true), doctest::Contains("negative"),
                         GraphError);
  }
  SUBCASE("known nodes keep isolated ids") {
    const Graph g = load_edge_csv(write_temp("known.csv", "b,c\n"), false, {"a", "b", "c"});
    CHECK(g.num_nodes() == 3);
    CHECK(g.edges()[0].src == 1);
  }
}

TEST_CASE("load_node_features") {
  const Graph g = load_edge_csv(write_temp("feat_edges.csv", "0,1\n1,2\n"), false);
  SUBCASE("one-hot rows") {
    const Graph f = load_node_features(
        write_temp("feat.csv", "node_id,f0,f1,f2,f3\n0,1,0,0,0\n1,0,1,0,0\n2,0,0,1,0\n"), g);
    CHECK(f.node_features().rows == 3);
    CHECK(f.node_features().cols == 4);
    CHECK(f.node_features()(1, 1) == 1.0);
  }
  SUBCASE("json map") {
    const Graph f = load_node_features(write_temp("feat.json", R"({"2":[1,2],"0":[3,4],"1":[5,6]})"), g);
    CHECK(f.node_features()(2, 0) == 1.0);
    CHECK(f.node_features()(0, 1) == 4.0);
  }
  SUBCASE("row count mismatch names both counts") {
    CHECK_THROWS_WITH_AS(load_node_features(write_temp("short.csv", "0,1,0\n1,0,1\n"), g),
                         doctest::Contains("2 rows but graph has 3 nodes"), GraphError);
  }
  SUBCASE("duplicate id") {
    CHECK_THROWS_WITH_AS(load_node_features(write_temp("dup.csv", "0,1\n1,1\n1,2\n"), g),
                         doctest::Contains("duplicate node id '1'"), GraphError);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(load_node_features(write_temp("dim.csv", "0,1\n1,1,2\n2,2\n"), g), GraphError);
  }
  SUBCASE("all-zero rows") {
    const auto p = write_temp("zero.csv", "0,0,0\n1,1,0\n2,0,1\n");
    CHECK_THROWS_AS(load_node_features(p, g), GraphError);
    CHECK_NOTHROW(load_node_features(p, g, true));
  }
}

TEST_CASE("make_split") {
  SUBCASE("chronological 10 edges") {
    const Graph g = path_graph(11, true);
    const EdgeSplit s = make_split(g, {SplitMode::chronological, 0.8, 1});
    CHECK(s.train.size() == 8);
    CHECK(s.validation.size() == 1);
    CHECK(s.test.size() == 1);
    // Oracle: sort all timestamps and cut.
    std::vector<double> ts;
    for (const auto& e : g.edges()) ts.push_back(*e.timestamp);
    std::ranges::sort(ts);
    for (std::size_t i = 0; i < 8; ++i) CHECK(*s.train[i].time == ts[i]);
    CHECK(*s.validation[0].time == ts[8]);
    CHECK(*s.test[0].time == ts[9]);
  }
  SUBCASE("random 100 edges at 0.5") {
    const Graph g = path_graph(101);
    const EdgeSplit s = make_split(g, {SplitMode::random_transductive, 0.5, 3});
    CHECK(s.train.size() == 50);
    CHECK(s.validation.size() == 25);
    CHECK(s.test.size() == 25);
    std::multiset<std::uint64_t> all, parts;
    for (const auto& e : g.edges()) all.insert(pair_key(e.src, e.dst));
    for (const auto* set : {&s.train, &s.validation, &s.test}) {
      for (const auto& e : *set) parts.insert(pair_key(e.src, e.dst));
    }
    CHECK(all == parts);
  }
  SUBCASE("inductive keeps held-out nodes out of training") {
    const auto syn = gen_synthetic_multimodal({.num_nodes = 200, .intra_mode_edge_prob = 0.05, .seed = 4});
    const EdgeSplit s = make_split(syn.graph, {SplitMode::inductive, 0.7, 9});
    REQUIRE_FALSE(s.held_out_nodes.empty());
    const std::set<NodeId> held(s.held_out_nodes.begin(), s.held_out_nodes.end());
    for (const auto& e : s.train) {
      CHECK_FALSE(held.contains(e.src));
      CHECK_FALSE(held.contains(e.dst));
    }
    for (const auto& e : s.test) CHECK((held.contains(e.src) || held.contains(e.dst)));
    CHECK(unseen_fraction(s.test, s.held_out_nodes) == 1.0);
    const long diff = static_cast<long>(s.validation.size()) - static_cast<long>(s.test.size());
    CHECK(std::abs(diff) <= 1);
  }
  SUBCASE("chronological monotonicity with ties") {
    std::vector<Edge> edges;
    for (NodeId i = 0; i < 40; ++i) edges.push_back({i, i + 1, static_cast<double>(i / 4)});
    const EdgeSplit s = make_split(Graph(41, edges), {SplitMode::chronological, 0.6, 0});
    double max_train = -1, min_val = 1e9, max_val = -1, min_test = 1e9;
    for (const auto& e : s.train) max_train = std::max(max_train, *e.time);
    for (const auto& e : s.validation) {
      min_val = std::min(min_val, *e.time);
      max_val = std::max(max_val, *e.time);
    }
    for (const auto& e : s.test) min_test = std::min(min_test, *e.time);
    CHECK(max_train < min_val);
    CHECK(max_val < min_test);
    CHECK(s.train.size() + s.validation.size() + s.test.size() == 40);
  }
  SUBCASE("bad fraction") {
    CHECK_THROWS_AS(make_split(path_graph(5), {SplitMode::random_transductive, 1.0, 0}), GraphError);
    CHECK_THROWS_AS(make_split(path_graph(5), {SplitMode::random_transductive, 0.0, 0}), GraphError);
  }
  SUBCASE("deduplication of repeated pairs") {
    std::vector<Edge> edges;
    for (int i = 0; i < 20; ++i) edges.push_back({0, 1, static_cast<double>(i)});
    const Graph g(2, edges);
    const EdgeSplit keep = make_split(g, {SplitMode::chronological, 0.5, 0});
    const EdgeSplit dedup = make_split(g, {SplitMode::chronological, 0.5, 0, true});
    CHECK(keep.test.size() == 5);
    CHECK(dedup.test.empty());
  }
}

TEST_CASE("sample_negatives") {
  const auto syn = gen_synthetic_multimodal({.num_nodes = 60, .intra_mode_edge_prob = 0.1, .seed = 2});
  std::vector<EdgeExample> positives;
  for (const auto& e : syn.graph.edges()) {
    positives.push_back({e.src, e.dst});
    if (positives.size() == 6) break;
  }
  const auto negs = sample_negatives(syn.graph, positives, 17);
  CHECK(negs.size() == 6);
  for (const auto& n : negs) {
    CHECK(n.label == 0);
    CHECK(n.origin == ExampleOrigin::negative_sample);
    CHECK_FALSE(syn.graph.has_edge(n.src, n.dst));
    CHECK(n.src != n.dst);
  }
  const auto again = sample_negatives(syn.graph, positives, 17);
  for (std::size_t i = 0; i < negs.size(); ++i) {
    CHECK(negs[i].src == again[i].src);
    CHECK(negs[i].dst == again[i].dst);
  }

  const Graph complete(3, {{0, 1, {}}, {1, 2, {}}, {0, 2, {}}});
  const std::vector<EdgeExample> one{{0, 1}};
  CHECK_THROWS_WITH_AS(sample_negatives(complete, one, 0), doctest::Contains("too dense"), GraphError);
}

TEST_CASE("sample_neighbors") {
  SUBCASE("degree below sample size returns all neighbors") {
    const Graph g = path_graph(3);
    const auto s = sample_neighbors(g, 1, 10, std::nullopt, 5);
    CHECK(std::set<NodeId>(s.neighbor_ids.begin(), s.neighbor_ids.end()) == std::set<NodeId>{0, 2});
    CHECK(s.neighbor_ids.size() == 2);
  }
  SUBCASE("isolated node is flagged") {
    const Graph g = star_graph(3);
    const auto s = sample_neighbors(g, 4, 10, std::nullopt, 5);
    CHECK(s.neighbor_ids.empty());
    CHECK(s.isolated);
  }
  SUBCASE("seeded subset without replacement") {
    const Graph g = star_graph(20);
    const auto s = sample_neighbors(g, 0, 10, std::nullopt, 42);
    CHECK(s.neighbor_ids.size() == 10);
    CHECK(std::set<NodeId>(s.neighbor_ids.begin(), s.neighbor_ids.end()).size() == 10);
    // Oracle: replay the partial Fisher-Yates with the same generator.
    const Adjacency adj = Adjacency::from_graph(g);
    std::vector<NodeId> cand(adj.neighbors(0).begin(), adj.neighbors(0).end());
    std::mt19937_64 rng(42);
    for (std::size_t i = 0; i < 10; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, cand.size() - 1);
      std::swap(cand[i], cand[pick(rng)]);
    }
    cand.resize(10);
    CHECK(cand == s.neighbor_ids);
    CHECK(sample_neighbors(g, 0, 10, std::nullopt, 42).neighbor_ids == s.neighbor_ids);
  }
  SUBCASE("time cutoff and exclusion") {
    const Graph g(4, {{0, 1, 1.0}, {0, 2, 2.0}, {0, 3, 3.0}});
    const auto s = sample_neighbors(g, 0, 10, 2.5, 1);
    CHECK(std::set<NodeId>(s.neighbor_ids.begin(), s.neighbor_ids.end()) == std::set<NodeId>{1, 2});
    const Adjacency adj = Adjacency::from_graph(g);
    std::mt19937_64 rng(0);
    NeighborSampleOptions opt;
    opt.exclude = 2;
    const auto ex = sample_neighbors(adj, 0, opt, rng);
    CHECK(std::ranges::find(ex.neighbor_ids, NodeId{2}) == ex.neighbor_ids.end());
    CHECK(ex.neighbor_ids.size() == 2);
  }
  SUBCASE("padding fills with replacement") {
    const Graph g = path_graph(3);
    const Adjacency adj = Adjacency::from_graph(g);
    std::mt19937_64 rng(0);
    NeighborSampleOptions opt;
    opt.sample_size = 5;
    opt.pad = true;
    const auto s = sample_neighbors(adj, 1, opt, rng);
    CHECK(s.neighbor_ids.size() == 5);
  }
}

TEST_CASE("synthetic multimodal generator") {
  SUBCASE("toy 7-node graph with 6 links") {
    // Search the seed for the 7-user / 6-link configuration.
    std::optional<SyntheticGraph> toy;
    for (std::uint64_t seed = 0; seed < 500 && !toy; ++seed) {
      auto g = gen_synthetic_multimodal({.num_nodes = 7,
                                         .num_modes = 3,
                                         .feature_dim_per_mode = 4,
                                         .modes_per_node = 2,
                                         .intra_mode_edge_prob = 0.5,
                                         .noise_edge_prob = 0.0,
                                         .seed = seed});
      if (g.graph.num_edges() == 6) toy = std::move(g);
    }
    REQUIRE(toy.has_value());
    for (std::size_t i = 0; i < 6; ++i) {
      const auto& e = toy->graph.edges()[i];
      const int m = toy->edge_modes[i];
      CHECK(std::ranges::find(toy->node_modes[e.src], static_cast<std::size_t>(m)) != toy->node_modes[e.src].end());
      CHECK(std::ranges::find(toy->node_modes[e.dst], static_cast<std::size_t>(m)) != toy->node_modes[e.dst].end());
    }
  }
  SUBCASE("noise-free edges always share a mode") {
    const auto g = gen_synthetic_multimodal({.num_nodes = 150, .intra_mode_edge_prob = 0.05, .seed = 8});
    REQUIRE(g.graph.num_edges() > 0);
    for (const auto& e : g.graph.edges()) CHECK(share_mode(g, e.src, e.dst));
    const auto& labels = *g.graph.node_labels();
    for (std::size_t r = 0; r < labels.rows; ++r) {
      double sum = 0;
      for (double v : labels.row(r)) sum += v;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("noise edges are annotated") {
    const auto g = gen_synthetic_multimodal(
        {.num_nodes = 300, .intra_mode_edge_prob = 0.03, .noise_edge_prob = 0.2, .seed = 8});
    const auto noise = std::ranges::count(g.edge_modes, kNoiseMode);
    CHECK(noise > 0);
    CHECK(g.edge_modes.size() == g.graph.num_edges());
  }
  SUBCASE("determinism") {
    const SyntheticParams p{.num_nodes = 80, .intra_mode_edge_prob = 0.1, .noise_edge_prob = 0.1, .seed = 21};
    const auto a = gen_synthetic_multimodal(p);
    const auto b = gen_synthetic_multimodal(p);
    CHECK(a.ground_truth_json() == b.ground_truth_json());
    CHECK(a.graph.node_features().data == b.graph.node_features().data);
  }
  SUBCASE("bad parameters") {
    CHECK_THROWS_AS(gen_synthetic_multimodal({.num_modes = 1}), GraphError);
    CHECK_THROWS_AS(gen_synthetic_multimodal({.num_modes = 3, .modes_per_node = 4}), GraphError);
    CHECK_THROWS_AS(gen_synthetic_multimodal({.intra_mode_edge_prob = 1.5}), GraphError);
  }
}
