#pragma once

#include "legible/geom.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace legible
{

using json = nlohmann::ordered_json;

namespace geom
{
void to_json(json & j, const Point3 & p);
void from_json(const json & j, Point3 & p);
void to_json(json & j, const Viewpoint & vp);
void from_json(const json & j, Viewpoint & vp);
}  // namespace geom

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path & path);

std::string read_text_file(const std::filesystem::path & path);
void write_text_file(const std::filesystem::path & path, std::string_view contents);

json read_json_file(const std::filesystem::path & path);
void write_json_file(const std::filesystem::path & path, const json & doc);

}  // namespace legible
