#include "melanie/nn/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace melanie::nn {

std::string checkpoint_to_string(const ParameterSet& params) {
  nlohmann::ordered_json j;
  j["format"] = "melanie-checkpoint";
  j["version"] = kCheckpointVersion;
  const NetworkDims& d = params.dims();
  j["dims"] = {{"d", d.embedding}, {"d_s", d.state}, {"M", d.max_viewers}, {"hidden", d.hidden}};
  j["seed"] = params.seed();
  nlohmann::ordered_json tensors = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < kNumParams; ++i) {
    const Matrix& t = params[param_at(i)];
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(t.size()));
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) data.push_back(t(r, c));
    }
    tensors[std::string(param_name(param_at(i)))] = {
        {"rows", t.rows()}, {"cols", t.cols()}, {"data", std::move(data)}};
  }
  j["tensors"] = std::move(tensors);
  return j.dump();
}

ParameterSet checkpoint_from_string(const std::string& text,
                                    const std::optional<NetworkDims>& expected) {
  const auto j = nlohmann::json::parse(text);
  if (j.value("format", "") != "melanie-checkpoint") {
    throw std::runtime_error("checkpoint: unrecognized format");
  }
  const int version = j.at("version").get<int>();
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto& jd = j.at("dims");
  NetworkDims dims{jd.at("d").get<int>(), jd.at("d_s").get<int>(), jd.at("M").get<int>(),
                   jd.at("hidden").get<int>()};
  if (expected && !(*expected == dims)) {
    throw std::runtime_error("checkpoint: dims mismatch (stored d=" + std::to_string(dims.embedding) +
                             " d_s=" + std::to_string(dims.state) +
                             " M=" + std::to_string(dims.max_viewers) +
                             " hidden=" + std::to_string(dims.hidden) + ")");
  }
  ParameterSet params = ParameterSet::zeros(dims);
  params.set_seed(j.at("seed").get<std::uint64_t>());
  const auto& tensors = j.at("tensors");
  for (std::size_t i = 0; i < kNumParams; ++i) {
    const std::string name(param_name(param_at(i)));
    if (!tensors.contains(name)) throw std::runtime_error("checkpoint: missing tensor " + name);
    const auto& jt = tensors.at(name);
    Matrix& t = params[param_at(i)];
    if (jt.at("rows").get<Eigen::Index>() != t.rows() ||
        jt.at("cols").get<Eigen::Index>() != t.cols()) {
      throw std::runtime_error("checkpoint: tensor " + name + " has the wrong shape");
    }
    const auto data = jt.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != t.size()) {
      throw std::runtime_error("checkpoint: tensor " + name + " has the wrong entry count");
    }
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = data[k++];
    }
  }
  return params;
}

void save_checkpoint(const std::filesystem::path& file, const ParameterSet& params) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write checkpoint " + file.string());
  out << checkpoint_to_string(params) << '\n';
}

ParameterSet load_checkpoint(const std::filesystem::path& file,
                             const std::optional<NetworkDims>& expected) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open checkpoint " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_string(buf.str(), expected);
}

}  // namespace melanie::nn
