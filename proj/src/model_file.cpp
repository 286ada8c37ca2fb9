#include "legible/model_file.hpp"

#include "legible/errors.hpp"

namespace legible
{

ModelFile parse_model_file(const json & doc)
{
  ModelFile model;
  try {
    model.header.framework = doc.at("framework").get<std::string>();
    model.header.g_max = doc.at("g_max").get<std::size_t>();
    model.header.n_points = doc.at("n_points").get<std::size_t>();
    model.header.metric = doc.value("metric", std::string{});
    model.header.train_seed = doc.value("train_seed", std::uint64_t{0});
    if (doc.contains("precision")) {
      model.precision = nn::precision_from_name(doc["precision"].get<std::string>());
    }
  } catch (const json::exception & e) {
    throw FormatError(std::string("malformed model header: ") + e.what());
  }
  const auto & fw = model.header.framework;
  if (fw != "slotv" && fw != "trex" && fw != "oracle") {
    throw FormatError("unknown model framework '" + fw + "'");
  }
  if (fw != "oracle" && !doc.contains("layers")) {
    throw FormatError("model file for '" + fw + "' has no network layers");
  }
  if (model.header.g_max == 0 || model.header.n_points < 2) {
    throw FormatError("model header has invalid g_max or n_points");
  }
  model.document = doc;
  return model;
}

ModelFile read_model_file(const std::filesystem::path & path)
{
  return parse_model_file(read_json_file(path));
}

}  // namespace legible
