#include <algorithm>

#include <json.hpp>

#include "qwalk/error.hpp"
#include "qwalk/tree.hpp"

namespace qwalk {

using nlohmann::json;

std::string tree_to_json(const DecisionTree& t) {
  json nodes = json::array();
  for (const auto& rec : t.nodes()) nodes.push_back({{"id", rec.id}, {"level", rec.level}});
  json edges = json::array();
  for (const auto& [a, b] : t.edges()) edges.push_back({a, b});
  json doc = {{"n", t.n_levels()},
              {"nodes", std::move(nodes)},
              {"edges", std::move(edges)},
              {"root", t.root()},
              {"targets", t.targets()}};
  return doc.dump();
}

DecisionTree tree_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("tree JSON does not parse: ") + e.what());
  }
  if (!doc.is_object()) throw InvalidArgument("tree JSON must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "n" && key != "nodes" && key != "edges" && key != "root" && key != "targets") {
      throw InvalidArgument("unknown key in tree JSON: " + key);
    }
  }
  try {
    const int n = doc.at("n").get<int>();
    std::vector<std::pair<int, int>> recs;
    for (const auto& node : doc.at("nodes")) {
      recs.emplace_back(node.at("id").get<int>(), node.at("level").get<int>());
    }
    std::sort(recs.begin(), recs.end());
    std::vector<int> levels;
    levels.reserve(recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
      if (recs[i].first != static_cast<int>(i)) {
        throw InvalidArgument("node ids must be 0..N-1 without gaps");
      }
      levels.push_back(recs[i].second);
    }
    std::vector<Edge> edges;
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw InvalidArgument("edges must be [a, b] pairs");
      edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    return DecisionTree(n, std::move(levels), std::move(edges), doc.at("root").get<int>(),
                        doc.at("targets").get<std::vector<int>>());
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed tree JSON: ") + e.what());
  }
}

}  // namespace qwalk
