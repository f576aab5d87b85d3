#include "useembed/model_io.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <vector>

#include "useembed/errors.hpp"

namespace useembed {

using nlohmann::json;

namespace {

constexpr char kModelMagic[4] = {'U', 'S', 'E', 'M'};
constexpr std::uint32_t kModelVersion = 1;

std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    table[i] = c;
  }
  return table;
}

std::uint32_t crc32(const std::vector<unsigned char>& data) {
  static const auto table = make_crc_table();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (unsigned char byte : data) crc = table[(crc ^ byte) & 0xFF] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

void append_u32_le(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

void append_matrix_f32(std::vector<unsigned char>& out, const Eigen::MatrixXd& M) {
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      const float f = static_cast<float>(M(i, j));
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      append_u32_le(out, bits);
    }
}

std::uint32_t take_u32_le(const std::vector<unsigned char>& data, std::size_t& pos) {
  if (pos + 4 > data.size()) throw IoError("model: truncated payload");
  const std::uint32_t v = static_cast<std::uint32_t>(data[pos]) |
                          (static_cast<std::uint32_t>(data[pos + 1]) << 8) |
                          (static_cast<std::uint32_t>(data[pos + 2]) << 16) |
                          (static_cast<std::uint32_t>(data[pos + 3]) << 24);
  pos += 4;
  return v;
}

Eigen::MatrixXd take_matrix_f32(const std::vector<unsigned char>& data, std::size_t& pos,
                                Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      const std::uint32_t bits = take_u32_le(data, pos);
      float f;
      std::memcpy(&f, &bits, 4);
      M(i, j) = static_cast<double>(f);
    }
  return M;
}

json hyper_to_json(const Hyperparams& h) {
  return json{{"d_e", h.d_e},
              {"lambda", h.lambda},
              {"mu1", h.mu1},
              {"mu2", h.mu2},
              {"gamma1", h.gamma1},
              {"gamma2", h.gamma2},
              {"sigma", h.sigma},
              {"outer_iters", h.outer_iters},
              {"inner_iters", h.inner_iters},
              {"tol", h.tol},
              {"seed", h.seed},
              {"reg_mode", to_string(h.reg_mode)}};
}

Hyperparams hyper_from_json(const json& j) {
  Hyperparams h;
  h.d_e = j.at("d_e").get<int>();
  h.lambda = j.at("lambda").get<double>();
  h.mu1 = j.at("mu1").get<double>();
  h.mu2 = j.at("mu2").get<double>();
  h.gamma1 = j.at("gamma1").get<double>();
  h.gamma2 = j.at("gamma2").get<double>();
  h.sigma = j.at("sigma").get<double>();
  h.outer_iters = j.at("outer_iters").get<int>();
  h.inner_iters = j.at("inner_iters").get<int>();
  h.tol = j.at("tol").get<double>();
  h.seed = j.at("seed").get<std::uint64_t>();
  h.reg_mode = reg_mode_from_string(j.at("reg_mode").get<std::string>());
  return h;
}

}  // namespace

void save_model(const EmbeddingModel& model, const std::string& path) {
  model.validate();

  std::vector<unsigned char> payload;
  payload.reserve(4 * static_cast<std::size_t>(model.W.size() + model.U_cat.size() +
                                               model.U_sup.size() + model.U_attr.size() +
                                               model.B.size()));
  append_matrix_f32(payload, model.W);
  append_matrix_f32(payload, model.U_cat);
  append_matrix_f32(payload, model.U_sup);
  append_matrix_f32(payload, model.U_attr);
  append_matrix_f32(payload, model.B);

  const Taxonomy& tax = model.taxonomy;
  json tax_json;
  for (NodeId id = 1; id <= tax.num_nodes(); ++id) {
    tax_json["names"].push_back(tax.name(id));
    tax_json["parents"].push_back(tax.is_root(id) ? 0 : tax.parent(id));
  }

  json header = {{"dims",
                  {{"d", model.dim()},
                   {"d_e", model.embed_dim()},
                   {"C", model.num_categories()},
                   {"S", model.num_supers()},
                   {"A", model.num_attributes()}}},
                 {"taxonomy", tax_json},
                 {"attribute_names", model.attribute_names},
                 {"hyperparams", hyper_to_json(model.hyper)},
                 {"payload_crc32", crc32(payload)}};
  const std::string header_str = header.dump();

  std::ofstream out(path, std::ios::out | std::ios::binary);
  if (!out) throw IoError("cannot write model file '" + path + "'");
  out.write(kModelMagic, 4);
  std::vector<unsigned char> prefix;
  append_u32_le(prefix, kModelVersion);
  append_u32_le(prefix, static_cast<std::uint32_t>(header_str.size()));
  out.write(reinterpret_cast<const char*>(prefix.data()), prefix.size());
  out.write(header_str.data(), header_str.size());
  out.write(reinterpret_cast<const char*>(payload.data()), payload.size());
  if (!out) throw IoError("short write to model file '" + path + "'");
}

EmbeddingModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::in | std::ios::binary);
  if (!in) throw IoError("cannot open model file '" + path + "'");

  char magic[4];
  if (!in.read(magic, 4)) throw IoError("model: file too short for magic");
  if (std::memcmp(magic, kModelMagic, 4) != 0)
    throw FormatError("model: bad magic in '" + path + "'");

  unsigned char prefix[8];
  if (!in.read(reinterpret_cast<char*>(prefix), 8)) throw IoError("model: truncated prefix");
  const std::uint32_t version = static_cast<std::uint32_t>(prefix[0]) | (prefix[1] << 8) |
                                (prefix[2] << 16) | (static_cast<std::uint32_t>(prefix[3]) << 24);
  const std::uint32_t header_len = static_cast<std::uint32_t>(prefix[4]) | (prefix[5] << 8) |
                                   (prefix[6] << 16) |
                                   (static_cast<std::uint32_t>(prefix[7]) << 24);
  if (version != kModelVersion)
    throw FormatError("model: unsupported version " + std::to_string(version));

  std::string header_str(header_len, '\0');
  if (!in.read(header_str.data(), header_len)) throw IoError("model: truncated header");
  json header;
  try {
    header = json::parse(header_str);
  } catch (const json::exception& e) {
    throw FormatError("model: bad header: " + std::string(e.what()));
  }

  EmbeddingModel model;
  int d, d_e, C, S, A;
  try {
    const json& dims = header.at("dims");
    d = dims.at("d").get<int>();
    d_e = dims.at("d_e").get<int>();
    C = dims.at("C").get<int>();
    S = dims.at("S").get<int>();
    A = dims.at("A").get<int>();

    const auto names = header.at("taxonomy").at("names").get<std::vector<std::string>>();
    const auto parents = header.at("taxonomy").at("parents").get<std::vector<NodeId>>();
    if (static_cast<int>(names.size()) != C + S || parents.size() != names.size())
      throw FormatError("model: taxonomy block inconsistent with dims");
    model.taxonomy = Taxonomy({names.begin(), names.begin() + C}, {names.begin() + C, names.end()},
                              parents);
    model.attribute_names = header.at("attribute_names").get<std::vector<std::string>>();
    if (static_cast<int>(model.attribute_names.size()) != A)
      throw FormatError("model: attribute name count inconsistent with dims");
    model.hyper = hyper_from_json(header.at("hyperparams"));
  } catch (const json::exception& e) {
    throw FormatError("model: bad header: " + std::string(e.what()));
  }

  const std::size_t expected =
      4 * (static_cast<std::size_t>(d_e) * d + static_cast<std::size_t>(d_e) * (C + S + A) +
           static_cast<std::size_t>(A) * (C + S));
  std::vector<unsigned char> payload(expected);
  if (!in.read(reinterpret_cast<char*>(payload.data()), expected))
    throw IoError("model: truncated payload");

  const std::uint32_t stored_crc = header.at("payload_crc32").get<std::uint32_t>();
  if (crc32(payload) != stored_crc) throw FormatError("model: payload checksum mismatch");

  std::size_t pos = 0;
  model.W = take_matrix_f32(payload, pos, d_e, d);
  model.U_cat = take_matrix_f32(payload, pos, d_e, C);
  model.U_sup = take_matrix_f32(payload, pos, d_e, S);
  model.U_attr = take_matrix_f32(payload, pos, d_e, A);
  model.B = take_matrix_f32(payload, pos, A, C + S);
  model.validate();
  return model;
}

}  // namespace useembed
