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

// On-disk formats. Datasets: `<stem>.meta` (JSON header), `<stem>.data`
// (one JSON instance per line) and, for portfolio data, `<stem>.q` (dense
// row-major text matrix). Loss datasets: JSON lines, header first. Fitted
// losses: one JSON document. Every header carries a format tag and version.

#ifndef EGL_SERIALIZATION_HPP_
#define EGL_SERIALIZATION_HPP_

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "egl/core.hpp"
#include "egl/datagen.hpp"
#include "egl/losses.hpp"
#include "egl/sampling.hpp"
#include "egl/tensor_nn.hpp"

namespace egl {

using Json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

// Reads keys of a JSON object into existing values, then rejects keys that
// were never asked for.
class JsonFields {
 public:
  JsonFields(const Json& object, std::string context);

  template <class T>
  void get(const std::string& key, T& out) {
    used_.insert(key);
    if (!object_.contains(key)) return;
    try {
      out = object_.at(key).get<T>();
    } catch (const Json::exception& e) {
      fail(key, e.what());
    }
  }

  // parse(const Json&) -> value; errors are rethrown as ConfigError.
  template <class T, class Parse>
  void get_with(const std::string& key, T& out, Parse&& parse) {
    used_.insert(key);
    if (!object_.contains(key)) return;
    try {
      out = parse(object_.at(key));
    } catch (const std::exception& e) {
      fail(key, e.what());
    }
  }

  bool has(const std::string& key) const { return object_.contains(key); }
  void finish() const;

 private:
  [[noreturn]] void fail(const std::string& key, const char* what) const;
  const Json& object_;
  std::string context_;
  std::set<std::string> used_;
};

std::string_view to_string(ExecutionPolicy policy);
ExecutionPolicy execution_policy_from_string(std::string_view name);

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

// Config structs. Missing keys keep their defaults; unknown keys are
// rejected with ConfigError.
Json to_json(const DatasetSpec& spec);
DatasetSpec dataset_spec_from_json(const Json& j);
Json to_json(const SamplerConfig& config);
SamplerConfig sampler_config_from_json(const Json& j);
Json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const Json& j);
Json to_json(const LossFitConfig& config);
LossFitConfig loss_fit_config_from_json(const Json& j);
Json to_json(const FbpConfig& config);
FbpConfig fbp_config_from_json(const Json& j);
Json to_json(const ProblemMetadata& metadata);

// Reads a JSON document; ConfigError on parse failure.
Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

// Writes `<dir>/<stem>.meta`, `.data` and (portfolio) `.q`.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir,
                  const std::string& stem);
// `meta` is the .meta path; siblings are found by stem.
Dataset load_dataset(const std::filesystem::path& meta);

void save_loss_dataset(const std::filesystem::path& path,
                       const std::vector<CandidateSample>& samples,
                       const SamplerConfig& sampler,
                       const ProblemMetadata& problem);
std::vector<CandidateSample> load_loss_dataset(
    const std::filesystem::path& path);

// Per-instance fitted losses.
void save_fitted_losses(const std::filesystem::path& path,
                        const std::vector<std::uint64_t>& instance_ids,
                        const std::vector<LossParams>& params);
std::vector<std::pair<std::uint64_t, LossParams>> load_fitted_losses(
    const std::filesystem::path& path);

// Feature-based network: JSON header plus a model checkpoint at
// `<path>.ckpt`, referenced by file name.
void save_fbp_network(const std::filesystem::path& path,
                      const FbpNetwork& network);
FbpNetwork load_fbp_network(const std::filesystem::path& path);

// Returns "per_instance" or "fbp" for a fitted-loss file.
std::string fitted_loss_kind(const std::filesystem::path& path);

}  // namespace egl

#endif  // EGL_SERIALIZATION_HPP_
