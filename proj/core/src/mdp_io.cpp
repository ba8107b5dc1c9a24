#include "robustq/mdp_io.hpp"

#include "robustq/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace robustq {

using nlohmann::json;

namespace {

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, e.what());
  }
}

template <class T>
T field(const json& doc, const char* key) {
  if (!doc.contains(key)) throw Error(Errc::ParseError, std::string("missing field '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("field '") + key + "': " + e.what());
  }
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string mdp_to_json(const TabularMDP& mdp) {
  json doc;
  doc["num_states"] = mdp.num_states();
  doc["num_actions"] = mdp.num_actions();
  const RowMatrix& k = mdp.kernel();
  doc["kernel"] = std::vector<double>(k.data(), k.data() + k.size());
  doc["reward"] = to_std(mdp.reward());
  doc["discount"] = mdp.discount();
  doc["initial_dist"] = to_std(mdp.initial_dist());
  return doc.dump(2) + "\n";
}

TabularMDP mdp_from_json(std::string_view text) {
  const json doc = parse(text);
  const auto S = field<std::size_t>(doc, "num_states");
  const auto A = field<std::size_t>(doc, "num_actions");
  const auto kernel = field<std::vector<double>>(doc, "kernel");
  if (kernel.size() != S * A * S)
    throw Error(Errc::ShapeMismatch, "kernel must hold (S*A)*S entries");
  RowMatrix k = Eigen::Map<const RowMatrix>(kernel.data(), static_cast<Eigen::Index>(S * A),
                                            static_cast<Eigen::Index>(S));
  return build_tabular_mdp(std::move(k), to_vector(field<std::vector<double>>(doc, "reward")),
                           field<double>(doc, "discount"),
                           to_vector(field<std::vector<double>>(doc, "initial_dist")));
}

std::string features_to_json(const FeatureMap& features) {
  json doc;
  doc["dim"] = features.dim();
  doc["num_actions"] = features.num_actions();
  const RowMatrix dense = features.dense();
  doc["matrix"] = std::vector<double>(dense.data(), dense.data() + dense.size());
  return doc.dump(2) + "\n";
}

FeatureMap features_from_json(std::string_view text) {
  const json doc = parse(text);
  const auto d = field<std::size_t>(doc, "dim");
  const auto A = field<std::size_t>(doc, "num_actions");
  const auto values = field<std::vector<double>>(doc, "matrix");
  if (d == 0 || values.size() % d != 0)
    throw Error(Errc::ShapeMismatch, "matrix length must be a multiple of dim");
  const auto cols = static_cast<Eigen::Index>(values.size() / d);
  const Matrix m = Eigen::Map<const RowMatrix>(values.data(), static_cast<Eigen::Index>(d), cols);
  return FeatureMap::from_dense(m, A);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

}  // namespace robustq
