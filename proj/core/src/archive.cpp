#include "sadyn/archive.hpp"
#include "sadyn/report.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sadyn {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return {{"shape", {m.rows(), m.cols()}}, {"data", std::move(rows)}};
}

Matrix matrix_from_json(const json& j, const std::string& name) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("data"))
    throw Error(ErrorKind::IoError, name + ": expected {shape, data}");
  const auto shape = j["shape"].get<std::vector<long long>>();
  if (shape.size() != 2 || shape[0] < 0 || shape[1] < 0)
    throw Error(ErrorKind::IoError, name + ": bad shape");
  const json& data = j["data"];
  if (!data.is_array() || static_cast<long long>(data.size()) != shape[0])
    throw Error(ErrorKind::ShapeError, name + ": row count does not match shape");
  Matrix m(shape[0], shape[1]);
  for (Index i = 0; i < m.rows(); ++i) {
    const json& row = data[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<long long>(row.size()) != shape[1])
      throw Error(ErrorKind::ShapeError, name + ": column count does not match shape");
    for (Index k = 0; k < m.cols(); ++k) {
      const json& v = row[static_cast<std::size_t>(k)];
      if (!v.is_number()) throw Error(ErrorKind::IoError, name + ": non-numeric entry");
      m(i, k) = v.get<double>();
    }
  }
  return m;
}

}  // namespace

std::string archive_to_json(const WeightArchive& a) {
  a.weights.validate();
  json doc;
  doc["format"] = "sadyn-weights";
  doc["version"] = WeightArchive::kVersion;
  doc["seed"] = a.seed;
  doc["beta"] = a.weights.beta;
  json heads = json::array();
  for (const auto& h : a.weights.heads)
    heads.push_back({{"wq", matrix_to_json(h.wq)},
                     {"wk", matrix_to_json(h.wk)},
                     {"wv", matrix_to_json(h.wv)}});
  doc["heads"] = std::move(heads);
  doc["wo"] = matrix_to_json(a.weights.wo);
  if (a.bank) {
    json omegas = json::array();
    for (const auto& om : a.bank->omegas) omegas.push_back(matrix_to_json(om));
    doc["omegas"] = std::move(omegas);
  }
  return doc.dump(1) + "\n";
}

WeightArchive archive_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::IoError, std::string("archive is not valid JSON: ") + e.what());
  }
  try {
    if (doc.value("format", std::string()) != "sadyn-weights")
      throw Error(ErrorKind::IoError, "not a weight archive");
    if (doc.at("version").get<int>() != WeightArchive::kVersion)
      throw Error(ErrorKind::IoError, "unsupported archive version");
    WeightArchive a;
    a.seed = doc.at("seed").get<std::uint64_t>();
    a.weights.beta = doc.at("beta").get<double>();
    std::size_t k = 0;
    for (const auto& h : doc.at("heads")) {
      const std::string p = "heads[" + std::to_string(k++) + "].";
      a.weights.heads.push_back(HeadWeights{matrix_from_json(h.at("wq"), p + "wq"),
                                            matrix_from_json(h.at("wk"), p + "wk"),
                                            matrix_from_json(h.at("wv"), p + "wv")});
    }
    a.weights.wo = matrix_from_json(doc.at("wo"), "wo");
    a.weights.validate();
    if (doc.contains("omegas")) {
      OmegaBank bank;
      k = 0;
      for (const auto& om : doc["omegas"])
        bank.omegas.push_back(matrix_from_json(om, "omegas[" + std::to_string(k++) + "]"));
      bank.validate();
      a.bank = std::move(bank);
    }
    return a;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::IoError, std::string("malformed archive: ") + e.what());
  }
}

void save_archive(const std::string& path, const WeightArchive& a) {
  write_text_file(path, archive_to_json(a));
}

WeightArchive load_archive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return archive_from_json(ss.str());
}

}  // namespace sadyn
