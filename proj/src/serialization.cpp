// Copyright 2026 The EGL Lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "egl/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "egl/errors.hpp"

namespace egl {
namespace fs = std::filesystem;

namespace {

constexpr const char* kDatasetFormat = "egl-dataset";
constexpr const char* kLossDatasetFormat = "egl-loss-dataset";
constexpr const char* kFittedLossFormat = "egl-fitted-loss";

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  return out;
}

void check_header(const Json& header, const char* format,
                  const fs::path& path) {
  if (!header.is_object() || header.value("format", "") != format) {
    throw InputError("'" + path.string() + "' is not an " + format + " file");
  }
  if (header.value("version", 0) != kFormatVersion) {
    throw InputError("'" + path.string() + "': unsupported version " +
                     header.value("version", Json(0)).dump());
  }
}

Json parse_line(const std::string& line, const fs::path& path,
                std::size_t number) {
  try {
    return Json::parse(line);
  } catch (const Json::exception& e) {
    throw InputError(path.string() + ":" + std::to_string(number) + ": " +
                     e.what());
  }
}

template <class Enum, class Parse>
Enum enum_field(const Json& j, Parse&& parse) {
  return parse(j.get<std::string>());
}

}  // namespace

JsonFields::JsonFields(const Json& object, std::string context)
    : object_(object), context_(std::move(context)) {
  if (!object_.is_object()) throw ConfigError(context_ + ": expected an object");
}

void JsonFields::finish() const {
  for (const auto& item : object_.items()) {
    if (!used_.contains(item.key())) {
      throw ConfigError(context_ + ": unknown key '" + item.key() + "'");
    }
  }
}

void JsonFields::fail(const std::string& key, const char* what) const {
  throw ConfigError(context_ + "." + key + ": " + what);
}

std::string_view to_string(ExecutionPolicy policy) {
  return policy == ExecutionPolicy::kSerial ? "serial" : "parallel";
}

ExecutionPolicy execution_policy_from_string(std::string_view name) {
  if (name == "serial") return ExecutionPolicy::kSerial;
  if (name == "parallel") return ExecutionPolicy::kParallel;
  throw ConfigError("unknown execution policy '" + std::string(name) + "'");
}

Json vector_to_json(const Vector& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vector_from_json(const Json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(),
                                  static_cast<Eigen::Index>(values.size()));
}

Json to_json(const DatasetSpec& spec) {
  return {{"domain", to_string(spec.domain)},
          {"num_instances", spec.num_instances},
          {"seed", spec.seed},
          {"fractions",
           {{"train", spec.fractions.train},
            {"validation", spec.fractions.validation},
            {"test", spec.fractions.test}}},
          {"resources", spec.resources},
          {"k", spec.k},
          {"sites", spec.sites},
          {"users", spec.users},
          {"ctr_beta_a", spec.ctr_beta_a},
          {"ctr_beta_b", spec.ctr_beta_b},
          {"zero_ctr", spec.zero_ctr},
          {"stocks", spec.stocks},
          {"history", spec.history},
          {"factors", spec.factors},
          {"noise", spec.noise},
          {"risk_aversion", spec.risk_aversion}};
}

DatasetSpec dataset_spec_from_json(const Json& j) {
  JsonFields f(j, "dataset");
  DatasetSpec spec;
  if (j.contains("domain")) {
    f.get_with("domain", spec.domain, [](const Json& v) {
      return domain_from_string(v.get<std::string>());
    });
    const std::size_t n = j.value("num_instances", spec.num_instances);
    spec = default_spec(spec.domain, n, spec.seed);
  }
  f.get("num_instances", spec.num_instances);
  f.get("seed", spec.seed);
  f.get_with("fractions", spec.fractions, [&](const Json& v) {
    JsonFields g(v, "dataset.fractions");
    SplitFractions out = spec.fractions;
    g.get("train", out.train);
    g.get("validation", out.validation);
    g.get("test", out.test);
    g.finish();
    return out;
  });
  f.get("resources", spec.resources);
  f.get("k", spec.k);
  f.get("sites", spec.sites);
  f.get("users", spec.users);
  f.get("ctr_beta_a", spec.ctr_beta_a);
  f.get("ctr_beta_b", spec.ctr_beta_b);
  f.get("zero_ctr", spec.zero_ctr);
  f.get("stocks", spec.stocks);
  f.get("history", spec.history);
  f.get("factors", spec.factors);
  f.get("noise", spec.noise);
  f.get("risk_aversion", spec.risk_aversion);
  f.finish();
  try {
    spec.fractions.validate();
  } catch (const InputError& e) {
    throw ConfigError(std::string("dataset: ") + e.what());
  }
  return spec;
}

Json to_json(const SamplerConfig& c) {
  return {{"kind", to_string(c.kind)},
          {"samples", c.samples},
          {"sigma", c.sigma},
          {"num_models", c.num_models},
          {"learning_rate", c.learning_rate},
          {"schedule", to_string(c.schedule)},
          {"max_learning_rate", c.max_learning_rate},
          {"cycle_length", c.cycle_length},
          {"update_budget", c.update_budget},
          {"batch_size", c.batch_size},
          {"include_initial_checkpoint", c.include_initial_checkpoint},
          {"hidden", c.hidden},
          {"seed", c.seed}};
}

SamplerConfig sampler_config_from_json(const Json& j) {
  JsonFields f(j, "sampler");
  SamplerConfig c;
  f.get_with("kind", c.kind, [](const Json& v) {
    return enum_field<SamplerKind>(v, sampler_kind_from_string);
  });
  f.get("samples", c.samples);
  f.get("sigma", c.sigma);
  f.get("num_models", c.num_models);
  f.get("learning_rate", c.learning_rate);
  f.get_with("schedule", c.schedule, [](const Json& v) {
    return enum_field<LrSchedule>(v, schedule_from_string);
  });
  f.get("max_learning_rate", c.max_learning_rate);
  f.get("cycle_length", c.cycle_length);
  f.get("update_budget", c.update_budget);
  f.get("batch_size", c.batch_size);
  f.get("include_initial_checkpoint", c.include_initial_checkpoint);
  f.get("hidden", c.hidden);
  f.get("seed", c.seed);
  f.finish();
  return c;
}

Json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"schedule", to_string(c.schedule)},
          {"max_learning_rate", c.max_learning_rate},
          {"cycle_length", c.cycle_length},
          {"optimizer", to_string(c.optimizer)},
          {"batch_size", c.batch_size},
          {"max_updates", c.max_updates},
          {"epochs", c.epochs},
          {"patience", c.patience},
          {"seed", c.seed},
          {"policy", to_string(c.policy)}};
}

TrainConfig train_config_from_json(const Json& j) {
  JsonFields f(j, "train");
  TrainConfig c;
  f.get("learning_rate", c.learning_rate);
  f.get_with("schedule", c.schedule, [](const Json& v) {
    return enum_field<LrSchedule>(v, schedule_from_string);
  });
  f.get("max_learning_rate", c.max_learning_rate);
  f.get("cycle_length", c.cycle_length);
  f.get_with("optimizer", c.optimizer, [](const Json& v) {
    return enum_field<OptimizerKind>(v, optimizer_from_string);
  });
  f.get("batch_size", c.batch_size);
  f.get("max_updates", c.max_updates);
  f.get("epochs", c.epochs);
  f.get("patience", c.patience);
  f.get("seed", c.seed);
  f.get_with("policy", c.policy, [](const Json& v) {
    return enum_field<ExecutionPolicy>(v, execution_policy_from_string);
  });
  f.finish();
  return c;
}

Json to_json(const LossFitConfig& c) {
  return {{"family", to_string(c.family)},
          {"w_min", c.w_min},
          {"steps", c.steps},
          {"learning_rate", c.learning_rate}};
}

LossFitConfig loss_fit_config_from_json(const Json& j) {
  JsonFields f(j, "loss_fit");
  LossFitConfig c;
  f.get_with("family", c.family, [](const Json& v) {
    return enum_field<LossFamily>(v, loss_family_from_string);
  });
  f.get("w_min", c.w_min);
  f.get("steps", c.steps);
  f.get("learning_rate", c.learning_rate);
  f.finish();
  return c;
}

Json to_json(const FbpConfig& c) {
  return {{"family", to_string(c.family)},
          {"w_min", c.w_min},
          {"hidden", c.hidden},
          {"pairwise_hidden", c.pairwise_hidden},
          {"layers", c.layers},
          {"seed", c.seed}};
}

FbpConfig fbp_config_from_json(const Json& j) {
  JsonFields f(j, "fbp");
  FbpConfig c;
  f.get_with("family", c.family, [](const Json& v) {
    return enum_field<LossFamily>(v, loss_family_from_string);
  });
  f.get("w_min", c.w_min);
  f.get("hidden", c.hidden);
  f.get("pairwise_hidden", c.pairwise_hidden);
  f.get("layers", c.layers);
  f.get("seed", c.seed);
  f.finish();
  return c;
}

Json to_json(const ProblemMetadata& m) {
  return {{"domain", m.domain},
          {"dimension", m.dimension},
          {"k", m.k},
          {"risk_aversion", m.risk_aversion}};
}

Json read_json(const fs::path& path) {
  std::ifstream in = open_in(path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

void save_dataset(const Dataset& dataset, const fs::path& dir,
                  const std::string& stem) {
  fs::create_directories(dir);
  const PtoInstance* first =
      dataset.instances.empty() ? nullptr : &dataset.instances.front();
  Json meta = {{"format", kDatasetFormat},
               {"version", kFormatVersion},
               {"generator_version", dataset.generator_version},
               {"spec", to_json(dataset.spec)},
               {"instances", dataset.instances.size()},
               {"dimension", first ? first->dimension() : 0},
               {"groups", first ? first->features.size() : 0},
               {"feature_width",
                first && !first->features.empty() ? first->features[0].size()
                                                  : 0},
               {"has_q", dataset.covariance.has_value()}};
  write_json(dir / (stem + ".meta"), meta);

  std::ofstream data = open_out(dir / (stem + ".data"));
  for (const auto& inst : dataset.instances) {
    Json features = Json::array();
    for (const auto& f : inst.features) features.push_back(vector_to_json(f));
    data << Json{{"id", inst.id},
                 {"split", to_string(inst.split)},
                 {"labels", vector_to_json(inst.labels)},
                 {"features", features}}
                .dump()
         << '\n';
  }

  if (dataset.covariance) {
    std::ofstream q = open_out(dir / (stem + ".q"));
    const Matrix& m = *dataset.covariance;
    char buf[32];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
        q << (c ? " " : "") << buf;
      }
      q << '\n';
    }
  }
}

Dataset load_dataset(const fs::path& meta_path) {
  const Json meta = read_json(meta_path);
  check_header(meta, kDatasetFormat, meta_path);
  Dataset ds;
  ds.generator_version = meta.at("generator_version").get<std::string>();
  ds.spec = dataset_spec_from_json(meta.at("spec"));

  fs::path data_path = meta_path;
  data_path.replace_extension(".data");
  std::ifstream data = open_in(data_path);
  std::string line;
  std::size_t number = 0;
  while (std::getline(data, line)) {
    ++number;
    if (line.empty()) continue;
    const Json j = parse_line(line, data_path, number);
    PtoInstance inst;
    inst.id = j.at("id").get<std::uint64_t>();
    inst.split = split_from_string(j.at("split").get<std::string>());
    inst.labels = vector_from_json(j.at("labels"));
    for (const auto& f : j.at("features")) {
      inst.features.push_back(vector_from_json(f));
    }
    inst.validate();
    ds.instances.push_back(std::move(inst));
  }
  if (ds.instances.size() != meta.at("instances").get<std::size_t>()) {
    throw InputError(data_path.string() + ": instance count disagrees with " +
                     meta_path.string());
  }

  if (meta.value("has_q", false)) {
    fs::path q_path = meta_path;
    q_path.replace_extension(".q");
    std::ifstream q = open_in(q_path);
    std::vector<std::vector<double>> rows;
    while (std::getline(q, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::vector<double> row;
      double v = 0.0;
      while (ss >> v) row.push_back(v);
      rows.push_back(std::move(row));
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    Matrix m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      if (static_cast<Eigen::Index>(rows[r].size()) != n) {
        throw InputError(q_path.string() + ": matrix is not square");
      }
      for (Eigen::Index c = 0; c < n; ++c) m(r, c) = rows[r][c];
    }
    ds.covariance = std::move(m);
  }
  return ds;
}

void save_loss_dataset(const fs::path& path,
                       const std::vector<CandidateSample>& samples,
                       const SamplerConfig& sampler,
                       const ProblemMetadata& problem) {
  std::ofstream out = open_out(path);
  out << Json{{"format", kLossDatasetFormat},
              {"version", kFormatVersion},
              {"sampler", to_json(sampler)},
              {"problem", to_json(problem)},
              {"records", samples.size()}}
             .dump()
      << '\n';
  for (const auto& s : samples) {
    Json prov = {{"source", to_string(s.provenance.source)}};
    if (s.provenance.source == SampleSource::kGaussian) {
      prov["sigma"] = s.provenance.sigma;
    } else if (s.provenance.source == SampleSource::kModel) {
      prov["model_index"] = s.provenance.model_index;
      prov["checkpoint_step"] = s.provenance.checkpoint_step;
    }
    out << Json{{"instance_id", s.instance_id},
                {"sample_index", s.sample_index},
                {"provenance", prov},
                {"prediction", vector_to_json(s.prediction)},
                {"regret", s.has_regret() ? Json(s.regret) : Json(nullptr)}}
               .dump()
        << '\n';
  }
}

std::vector<CandidateSample> load_loss_dataset(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
  const Json header = parse_line(line, path, 1);
  check_header(header, kLossDatasetFormat, path);
  std::vector<CandidateSample> out;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const Json j = parse_line(line, path, number);
    CandidateSample s;
    s.instance_id = j.at("instance_id").get<std::uint64_t>();
    s.sample_index = j.at("sample_index").get<std::size_t>();
    s.prediction = vector_from_json(j.at("prediction"));
    if (!j.at("regret").is_null()) s.regret = j.at("regret").get<double>();
    const Json& p = j.at("provenance");
    s.provenance.source =
        sample_source_from_string(p.at("source").get<std::string>());
    s.provenance.sigma = p.value("sigma", 0.0);
    s.provenance.model_index = p.value("model_index", std::size_t{0});
    s.provenance.checkpoint_step = p.value("checkpoint_step", std::size_t{0});
    out.push_back(std::move(s));
  }
  if (out.size() != header.at("records").get<std::size_t>()) {
    throw InputError(path.string() + ": record count disagrees with header");
  }
  return out;
}

void save_fitted_losses(const fs::path& path,
                        const std::vector<std::uint64_t>& instance_ids,
                        const std::vector<LossParams>& params) {
  if (instance_ids.size() != params.size()) {
    throw InputError("save_fitted_losses: one id per parameter set");
  }
  Json entries = Json::array();
  for (std::size_t i = 0; i < params.size(); ++i) {
    entries.push_back({{"instance_id", instance_ids[i]},
                       {"family", to_string(params[i].family)},
                       {"w_min", params[i].w_min},
                       {"dimension", params[i].dimension},
                       {"raw", vector_to_json(params[i].raw)}});
  }
  write_json(path, {{"format", kFittedLossFormat},
                    {"version", kFormatVersion},
                    {"kind", "per_instance"},
                    {"losses", entries}});
}

std::vector<std::pair<std::uint64_t, LossParams>> load_fitted_losses(
    const fs::path& path) {
  const Json j = read_json(path);
  check_header(j, kFittedLossFormat, path);
  if (j.value("kind", "") != "per_instance") {
    throw InputError(path.string() + ": not a per-instance loss file");
  }
  std::vector<std::pair<std::uint64_t, LossParams>> out;
  for (const auto& e : j.at("losses")) {
    LossParams p;
    p.family = loss_family_from_string(e.at("family").get<std::string>());
    p.w_min = e.at("w_min").get<double>();
    p.dimension = e.at("dimension").get<std::size_t>();
    p.raw = vector_from_json(e.at("raw"));
    p.validate();
    out.emplace_back(e.at("instance_id").get<std::uint64_t>(), std::move(p));
  }
  return out;
}

void save_fbp_network(const fs::path& path, const FbpNetwork& network) {
  fs::path ckpt = path;
  ckpt += ".ckpt";
  save_checkpoint(network.net, ckpt);
  write_json(path, {{"format", kFittedLossFormat},
                    {"version", kFormatVersion},
                    {"kind", "fbp"},
                    {"family", to_string(network.family)},
                    {"w_min", network.w_min},
                    {"feature_mean", vector_to_json(network.feature_mean)},
                    {"feature_scale", vector_to_json(network.feature_scale)},
                    {"diagonal_offset", network.diagonal_offset},
                    {"checkpoint", ckpt.filename().string()}});
}

FbpNetwork load_fbp_network(const fs::path& path) {
  const Json j = read_json(path);
  check_header(j, kFittedLossFormat, path);
  if (j.value("kind", "") != "fbp") {
    throw InputError(path.string() + ": not a feature-based loss file");
  }
  FbpNetwork n;
  n.family = loss_family_from_string(j.at("family").get<std::string>());
  n.w_min = j.at("w_min").get<double>();
  n.feature_mean = vector_from_json(j.at("feature_mean"));
  n.feature_scale = vector_from_json(j.at("feature_scale"));
  n.diagonal_offset = j.at("diagonal_offset").get<double>();
  n.net = load_checkpoint(path.parent_path() /
                          j.at("checkpoint").get<std::string>());
  return n;
}

std::string fitted_loss_kind(const fs::path& path) {
  const Json j = read_json(path);
  check_header(j, kFittedLossFormat, path);
  return j.at("kind").get<std::string>();
}

}  // namespace egl
