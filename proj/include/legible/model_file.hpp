#pragma once

#include "legible/json_io.hpp"
#include "legible/nn.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace legible
{

/// Header fields stored next to the network in a trained-model file.
struct ModelHeader
{
  std::string framework;  // "slotv", "trex" or "oracle"
  std::size_t g_max = 8;
  std::size_t n_points = 100;
  std::string metric;
  std::uint64_t train_seed = 0;
};

struct ModelFile
{
  ModelHeader header;
  nn::Precision precision = nn::Precision::F32;
  json document;

  bool has_network() const { return document.contains("layers"); }

  template <class T>
  nn::MlpParams<T> params() const
  {
    return nn::params_from_json<T>(document);
  }
};

template <class T>
json model_document(const ModelHeader & header, const nn::MlpParams<T> & params)
{
  json doc{
    {"framework", header.framework},
    {"g_max", header.g_max},
    {"n_points", header.n_points},
    {"metric", header.metric},
    {"train_seed", header.train_seed}};
  const json network = nn::params_to_json(params);
  for (const auto & [key, value] : network.items()) {
    doc[key] = value;
  }
  return doc;
}

template <class T>
void write_model_file(const std::filesystem::path & path, const ModelHeader & header, const nn::MlpParams<T> & params)
{
  write_text_file(path, model_document(header, params).dump() + "\n");
}

ModelFile parse_model_file(const json & doc);
ModelFile read_model_file(const std::filesystem::path & path);

}  // namespace legible
