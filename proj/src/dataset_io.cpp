#include "s3rr/dataset_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace s3rr {

namespace {

using nlohmann::json;

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw ValidationError("serialization error: non-finite value");
    a.push_back(v[i]);
  }
  return a;
}

Vector vector_from_json(const json& a) {
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

json trajectory_json(const Trajectory& t) {
  auto finite = [](double x) {
    if (!std::isfinite(x)) throw ValidationError("serialization error: non-finite value");
    return x;
  };
  json j;
  j["eta"] = finite(t.eta);
  j["states"] = json::array();
  for (const auto& s : t.states) j["states"].push_back(vector_json(s));
  j["actions"] = json::array();
  for (const auto& a : t.actions) j["actions"].push_back(vector_json(a));
  j["initial_rewards"] = json::array();
  for (double r : t.initial_rewards) j["initial_rewards"].push_back(finite(r));
  j["gt_return"] = t.gt_return ? json(finite(*t.gt_return)) : json(nullptr);
  return j;
}

Trajectory trajectory_from_json(const json& j) {
  Trajectory t;
  t.eta = j.at("eta").get<double>();
  for (const auto& s : j.at("states")) t.states.push_back(vector_from_json(s));
  for (const auto& a : j.at("actions")) t.actions.push_back(vector_from_json(a));
  for (const auto& r : j.at("initial_rewards")) t.initial_rewards.push_back(r.get<double>());
  const auto& gt = j.at("gt_return");
  if (!gt.is_null()) t.gt_return = gt.get<double>();
  return t;
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  auto p = path;
  p.replace_extension(".manifest.json");
  return p;
}

void save_dataset(const DegradationDataset& dataset, const std::filesystem::path& path) {
  dataset.validate();
  std::string body;
  for (const auto& t : dataset.trajectories) {
    body += trajectory_json(t).dump();
    body += '\n';
  }
  json side;
  side["env_id"] = dataset.env_id;
  side["provenance"] = std::string(to_string(dataset.provenance));
  side["levels"] = dataset.levels;
  side["controls"] = dataset.controls;
  side["seed"] = dataset.seed;
  side["scorer_digest"] = dataset.scorer_digest;
  side["records"] = dataset.trajectories.size();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write dataset file " + path.string());
  out << body;
  if (!out) throw IoError("write failed for " + path.string());
  std::ofstream meta(sidecar_path(path), std::ios::binary | std::ios::trunc);
  if (!meta) throw IoError("cannot write dataset manifest " + sidecar_path(path).string());
  meta << side.dump(2) << '\n';
  if (!meta) throw IoError("write failed for " + sidecar_path(path).string());
}

DegradationDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset file " + path.string());
  std::ifstream meta_in(sidecar_path(path), std::ios::binary);
  if (!meta_in) throw IoError("cannot open dataset manifest " + sidecar_path(path).string());

  DegradationDataset d;
  json side;
  try {
    side = json::parse(meta_in);
    d.env_id = side.at("env_id").get<std::string>();
    d.provenance = provenance_from_string(side.at("provenance").get<std::string>());
    d.levels = side.at("levels").get<std::vector<double>>();
    d.controls = side.at("controls").get<std::vector<double>>();
    d.seed = side.at("seed").get<std::uint64_t>();
    d.scorer_digest = side.at("scorer_digest").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError("malformed dataset manifest " + sidecar_path(path).string() + ": " + e.what(), 0);
  }

  std::string line;
  std::size_t record = 0;
  while (std::getline(in, line)) {
    ++record;
    if (line.empty()) continue;
    Trajectory t;
    try {
      t = trajectory_from_json(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ": parse error in record " + std::to_string(record) + ": " +
                           e.what(),
                       record);
    }
    try {
      t.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ": record " + std::to_string(record) + ": " + e.what());
    }
    d.trajectories.push_back(std::move(t));
  }
  if (side.contains("records") && side["records"].get<std::size_t>() != d.trajectories.size())
    throw ParseError(path.string() + ": expected " + std::to_string(side["records"].get<std::size_t>()) +
                         " records, found " + std::to_string(d.trajectories.size()) +
                         " (truncated at record " + std::to_string(d.trajectories.size() + 1) + ")",
                     d.trajectories.size() + 1);
  d.validate();
  return d;
}

}  // namespace s3rr
