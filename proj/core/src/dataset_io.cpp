#include "useembed/dataset_io.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "useembed/errors.hpp"

namespace useembed {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kFeatureMagic[4] = {'U', 'S', 'E', 'F'};

void write_u32_le(std::ostream& out, std::uint32_t v) {
  const unsigned char bytes[4] = {
      static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>((v >> 8) & 0xff),
      static_cast<unsigned char>((v >> 16) & 0xff), static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::uint32_t read_u32_le(std::istream& in, const std::string& what) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4))
    throw IoError("features: truncated while reading " + what);
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) |
         (static_cast<std::uint32_t>(bytes[3]) << 24);
}

void write_f32_le(std::ostream& out, float f) {
  std::uint32_t v;
  std::memcpy(&v, &f, 4);
  write_u32_le(out, v);
}

float read_f32_le(std::istream& in, const std::string& what) {
  const std::uint32_t v = read_u32_le(in, what);
  float f;
  std::memcpy(&f, &v, 4);
  return f;
}

std::ifstream open_input(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_output(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

std::vector<std::string> read_lines(const fs::path& path) {
  auto in = open_input(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split_tsv(const std::string& line, std::size_t expected,
                                   const std::string& where) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  if (fields.size() != expected)
    throw FormatError(where + ": expected " + std::to_string(expected) + " tab-separated fields, got " +
                      std::to_string(fields.size()) + " in line '" + line + "'");
  return fields;
}

Taxonomy load_taxonomy_tsv(const fs::path& path) {
  struct Edge {
    std::string child, parent;
  };
  std::vector<Edge> edges;
  for (const auto& line : read_lines(path)) {
    if (line.empty()) continue;
    auto f = split_tsv(line, 2, "taxonomy");
    if (f[0].empty() || f[1].empty()) throw FormatError("taxonomy: empty node name in edge");
    edges.push_back({f[0], f[1]});
  }

  // Nodes appearing only as children are leaves; parents are supercategories.
  std::unordered_set<std::string> is_parent;
  for (const auto& e : edges) is_parent.insert(e.parent);

  std::vector<std::string> leaf_names, super_names;
  std::unordered_set<std::string> seen;
  auto note = [&](const std::string& name) {
    if (!seen.insert(name).second) return;
    if (is_parent.count(name))
      super_names.push_back(name);
    else
      leaf_names.push_back(name);
  };
  for (const auto& e : edges) {
    note(e.child);
    note(e.parent);
  }

  std::unordered_map<std::string, NodeId> id_of;
  NodeId next = 1;
  for (const auto& n : leaf_names) id_of[n] = next++;
  for (const auto& n : super_names) id_of[n] = next++;

  std::vector<NodeId> parent(leaf_names.size() + super_names.size(), kNoNode);
  for (const auto& e : edges) {
    NodeId& slot = parent[id_of[e.child] - 1];
    const NodeId p = id_of[e.parent];
    if (slot != kNoNode && slot != p)
      throw ValidationError("taxonomy: node '" + e.child + "' has two parents");
    slot = p;
  }
  return Taxonomy(std::move(leaf_names), std::move(super_names), std::move(parent));
}

std::vector<std::string> load_attribute_names(const fs::path& path) {
  std::vector<std::string> names;
  for (const auto& line : read_lines(path))
    if (!line.empty()) names.push_back(line);
  return names;
}

AttributeTable load_class_attributes(const fs::path& path, const Taxonomy& taxonomy,
                                     std::vector<std::string> attr_names) {
  std::unordered_map<std::string, int> attr_index;
  for (int a = 0; a < static_cast<int>(attr_names.size()); ++a) attr_index[attr_names[a]] = a;

  Eigen::MatrixXi labels = Eigen::MatrixXi::Zero(taxonomy.num_leaves(), attr_names.size());
  for (const auto& line : read_lines(path)) {
    if (line.empty()) continue;
    auto f = split_tsv(line, 3, "class_attributes");
    const NodeId cls = taxonomy.find(f[0]);
    if (cls == kNoNode || !taxonomy.is_leaf(cls))
      throw ValidationError("class_attributes: unknown class '" + f[0] + "'");
    auto it = attr_index.find(f[1]);
    if (it == attr_index.end())
      throw ValidationError("class_attributes: unknown attribute '" + f[1] + "'");
    if (f[2] != "0" && f[2] != "1")
      throw ValidationError("class_attributes: value '" + f[2] + "' outside {0,1} for class '" +
                            f[0] + "'");
    labels(cls - 1, it->second) = f[2] == "1" ? 1 : 0;
  }
  return AttributeTable(std::move(attr_names), std::move(labels));
}

Eigen::MatrixXd load_features(const fs::path& path) {
  auto in = open_input(path, std::ios::in | std::ios::binary);
  char magic[4];
  if (!in.read(magic, 4)) throw IoError("features: file too short for magic");
  if (std::memcmp(magic, kFeatureMagic, 4) != 0)
    throw FormatError("features: bad magic in '" + path.string() + "'");
  const std::uint32_t n = read_u32_le(in, "instance count");
  const std::uint32_t d = read_u32_le(in, "feature dimension");

  Eigen::MatrixXd X(n, d);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < d; ++j)
      X(i, j) = static_cast<double>(read_f32_le(in, "feature payload"));
  return X;
}

Eigen::VectorXi load_labels(const fs::path& path, const Taxonomy& taxonomy, Eigen::Index n) {
  std::vector<std::string> rows;
  for (const auto& line : read_lines(path))
    if (!line.empty()) rows.push_back(line);
  if (static_cast<Eigen::Index>(rows.size()) != n)
    throw ValidationError("labels: feature file declares " + std::to_string(n) +
                          " instances but labels file has " + std::to_string(rows.size()) +
                          " rows");

  Eigen::VectorXi y = Eigen::VectorXi::Zero(n);
  std::vector<char> filled(n, 0);
  for (const auto& row : rows) {
    auto f = split_tsv(row, 2, "labels");
    std::size_t pos = 0;
    long idx = -1;
    try {
      idx = std::stol(f[0], &pos);
    } catch (const std::exception&) {
      throw FormatError("labels: bad instance index '" + f[0] + "'");
    }
    if (pos != f[0].size() || idx < 0 || idx >= n)
      throw ValidationError("labels: instance index '" + f[0] + "' out of range");
    if (filled[idx]) throw ValidationError("labels: duplicate instance index " + f[0]);
    const NodeId leaf = taxonomy.find(f[1]);
    if (leaf == kNoNode || !taxonomy.is_leaf(leaf))
      throw ValidationError("labels: unknown leaf '" + f[1] + "'");
    y[idx] = leaf;
    filled[idx] = 1;
  }
  return y;
}

}  // namespace

Dataset load_dataset(const std::string& manifest_path) {
  const fs::path mpath(manifest_path);
  auto in = open_input(mpath);
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw FormatError("manifest: " + std::string(e.what()));
  }

  auto resolve = [&](const char* key) -> fs::path {
    if (!manifest.contains(key) || !manifest[key].is_string())
      throw FormatError("manifest: missing path '" + std::string(key) + "'");
    fs::path p = manifest[key].get<std::string>();
    return p.is_absolute() ? p : mpath.parent_path() / p;
  };

  Dataset dataset;
  dataset.taxonomy = load_taxonomy_tsv(resolve("taxonomy"));
  dataset.attributes = load_class_attributes(resolve("class_attributes"), dataset.taxonomy,
                                             load_attribute_names(resolve("attributes")));
  dataset.X = load_features(resolve("features"));
  dataset.y = load_labels(resolve("labels"), dataset.taxonomy, dataset.X.rows());
  dataset.validate();
  return dataset;
}

std::string save_dataset(const Dataset& dataset, const std::string& dir) {
  dataset.validate();
  const Taxonomy& tax = dataset.taxonomy;
  for (NodeId leaf = 1; leaf <= tax.num_leaves(); ++leaf)
    if (tax.is_root(leaf))
      throw ValidationError("save_dataset: the edge-list format cannot express parentless leaf '" +
                            tax.name(leaf) + "'");

  const fs::path out_dir(dir);
  fs::create_directories(out_dir);

  {
    auto out = open_output(out_dir / "features.usef", std::ios::out | std::ios::binary);
    out.write(kFeatureMagic, 4);
    write_u32_le(out, static_cast<std::uint32_t>(dataset.n()));
    write_u32_le(out, static_cast<std::uint32_t>(dataset.dim()));
    for (int i = 0; i < dataset.n(); ++i)
      for (int j = 0; j < dataset.dim(); ++j)
        write_f32_le(out, static_cast<float>(dataset.X(i, j)));
  }
  {
    auto out = open_output(out_dir / "labels.tsv");
    for (int i = 0; i < dataset.n(); ++i)
      out << i << '\t' << tax.name(dataset.y[i]) << '\n';
  }
  {
    // Edges emitted in node-id order so reingestion assigns the same ids.
    auto out = open_output(out_dir / "taxonomy.tsv");
    for (NodeId id = 1; id <= tax.num_nodes(); ++id)
      if (!tax.is_root(id)) out << tax.name(id) << '\t' << tax.name(tax.parent(id)) << '\n';
  }
  {
    auto out = open_output(out_dir / "attributes.txt");
    for (const auto& name : dataset.attributes.names()) out << name << '\n';
  }
  {
    auto out = open_output(out_dir / "class_attributes.tsv");
    for (NodeId leaf = 1; leaf <= tax.num_leaves(); ++leaf)
      for (int a = 0; a < dataset.attributes.num_attributes(); ++a)
        if (dataset.attributes.has(leaf, a))
          out << tax.name(leaf) << '\t' << dataset.attributes.name(a) << "\t1\n";
  }

  const fs::path manifest_path = out_dir / "manifest.json";
  json manifest = {{"features", "features.usef"},
                   {"labels", "labels.tsv"},
                   {"taxonomy", "taxonomy.tsv"},
                   {"attributes", "attributes.txt"},
                   {"class_attributes", "class_attributes.tsv"}};
  open_output(manifest_path) << manifest.dump(2) << '\n';
  return manifest_path.string();
}

}  // namespace useembed
