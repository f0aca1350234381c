#include "adagnn/graphdata/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace adagnn::graphdata {

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string lower(std::string s) {
  std::ranges::transform(s, s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool looks_like_edge_header(const std::vector<std::string>& fields, bool has_timestamps) {
  if (fields.size() < 2) return false;
  if (has_timestamps && fields.size() >= 3 && !parse_number(fields[2])) return true;
  const std::string first = lower(fields[0]);
  return first == "src" || first == "source" || first == "from" || first == "u";
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open '" + path.string() + "'");
  return in;
}

struct RowTable {
  std::vector<std::pair<std::string, std::vector<double>>> rows;
};

RowTable read_rows_csv(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  RowTable table;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (first) {
      first = false;
      const bool header = lower(fields[0]) == "node_id" ||
                          std::any_of(fields.begin() + 1, fields.end(),
                                      [](const std::string& f) { return !parse_number(f); });
      if (header) continue;
    }
    std::vector<double> values;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const auto v = parse_number(fields[i]);
      if (!v) throw GraphError(path.string() + ":" + std::to_string(line_no) + ": non-numeric value '" + fields[i] + "'");
      values.push_back(*v);
    }
    table.rows.emplace_back(fields[0], std::move(values));
  }
  return table;
}

RowTable read_rows_json(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw GraphError(path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw GraphError(path.string() + ": expected an object mapping node_id to array");
  RowTable table;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_array()) throw GraphError(path.string() + ": entry '" + key + "' is not an array");
    std::vector<double> row;
    for (const auto& x : value) {
      if (!x.is_number()) throw GraphError(path.string() + ": entry '" + key + "' has a non-numeric value");
      row.push_back(x.get<double>());
    }
    table.rows.emplace_back(key, std::move(row));
  }
  return table;
}

bool is_json(const std::filesystem::path& path) {
  if (lower(path.extension().string()) == ".json") return true;
  std::ifstream in(path);
  char c = 0;
  while (in.get(c)) {
    if (!std::isspace(static_cast<unsigned char>(c))) return c == '{';
  }
  return false;
}

FeatureMatrix read_node_matrix(const std::filesystem::path& path, const Graph& graph, const char* what) {
  const RowTable table = is_json(path) ? read_rows_json(path) : read_rows_csv(path);
  if (table.rows.size() != graph.num_nodes()) {
    throw GraphError(std::string(what) + ": " + std::to_string(table.rows.size()) + " rows but graph has " +
                     std::to_string(graph.num_nodes()) + " nodes");
  }
  if (graph.num_nodes() == 0) return {};
  const std::size_t dim = table.rows.front().second.size();
  FeatureMatrix m(graph.num_nodes(), dim);
  std::vector<bool> seen(graph.num_nodes(), false);
  for (const auto& [name, values] : table.rows) {
    const auto id = graph.find_node(name);
    if (!id) throw GraphError(std::string(what) + ": unknown node id '" + name + "'");
    if (seen[*id]) throw GraphError(std::string(what) + ": duplicate node id '" + name + "'");
    if (values.size() != dim) {
      throw GraphError(std::string(what) + ": node '" + name + "' has " + std::to_string(values.size()) +
                       " values, expected " + std::to_string(dim));
    }
    seen[*id] = true;
    std::ranges::copy(values, m.row(*id).begin());
  }
  return m;
}

}  // namespace

std::vector<std::string> read_node_ids(const std::filesystem::path& path) {
  const RowTable table = is_json(path) ? read_rows_json(path) : read_rows_csv(path);
  std::vector<std::string> ids;
  ids.reserve(table.rows.size());
  for (const auto& row : table.rows) ids.push_back(row.first);
  return ids;
}

Graph load_edge_csv(const std::filesystem::path& path, bool has_timestamps,
                    const std::vector<std::string>& known_nodes) {
  auto in = open_or_throw(path);
  std::vector<std::string> names;
  std::unordered_map<std::string, NodeId> index;
  std::vector<Edge> edges;
  auto intern = [&](const std::string& name) {
    const auto [it, inserted] = index.try_emplace(name, names.size());
    if (inserted) names.push_back(name);
    return it->second;
  };
  for (const auto& name : known_nodes) intern(name);
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (first) {
      first = false;
      if (looks_like_edge_header(fields, has_timestamps)) continue;
    }
    const std::size_t expected = has_timestamps ? 3 : 2;
    if (fields.size() != expected || fields[0].empty() || fields[1].empty()) {
      throw GraphError(path.string() + ":" + std::to_string(line_no) + ": malformed row '" + line + "', expected " +
                       (has_timestamps ? "src,dst,timestamp" : "src,dst"));
    }
    Edge e;
    e.src = intern(fields[0]);
    e.dst = intern(fields[1]);
    if (has_timestamps) {
      const auto ts = parse_number(fields[2]);
      if (!ts) throw GraphError(path.string() + ":" + std::to_string(line_no) + ": bad timestamp '" + fields[2] + "'");
      if (*ts < 0) throw GraphError(path.string() + ":" + std::to_string(line_no) + ": negative timestamp");
      e.timestamp = *ts;
    }
    edges.push_back(e);
  }
  const std::size_t n = names.size();
  return Graph(n, std::move(edges), std::move(names));
}

Graph load_node_features(const std::filesystem::path& path, const Graph& graph, bool allow_zero) {
  FeatureMatrix m = read_node_matrix(path, graph, "node features");
  if (!allow_zero) {
    for (std::size_t r = 0; r < m.rows; ++r) {
      const auto row = m.row(r);
      if (std::ranges::all_of(row, [](double v) { return v == 0.0; })) {
        throw GraphError("node features: row for node '" + graph.node_name(r) + "' is all zero");
      }
    }
  }
  return graph.with_node_features(std::move(m));
}

Graph load_node_labels(const std::filesystem::path& path, const Graph& graph) {
  return graph.with_node_labels(read_node_matrix(path, graph, "node labels"));
}

void write_edge_csv(const std::filesystem::path& path, const Graph& graph) {
  std::ofstream out(path);
  if (!out) throw GraphError("cannot write '" + path.string() + "'");
  out << (graph.has_timestamps() ? "src,dst,timestamp\n" : "src,dst\n");
  out.precision(17);
  for (const auto& e : graph.edges()) {
    out << graph.node_name(e.src) << ',' << graph.node_name(e.dst);
    if (e.timestamp) out << ',' << *e.timestamp;
    out << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const Graph& graph, const FeatureMatrix& matrix,
                      const std::string& column_prefix) {
  std::ofstream out(path);
  if (!out) throw GraphError("cannot write '" + path.string() + "'");
  out << "node_id";
  for (std::size_t c = 0; c < matrix.cols; ++c) out << ',' << column_prefix << c;
  out << '\n';
  out.precision(17);
  for (std::size_t r = 0; r < matrix.rows; ++r) {
    out << graph.node_name(r);
    for (double v : matrix.row(r)) out << ',' << v;
    out << '\n';
  }
}

}  // namespace adagnn::graphdata
