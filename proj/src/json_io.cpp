#include "legible/json_io.hpp"

#include "legible/errors.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>
#include <sstream>

namespace legible
{

namespace geom
{

void to_json(json & j, const Point3 & p) { j = json::array({p.x, p.y, p.z}); }

void from_json(const json & j, Point3 & p)
{
  if (!j.is_array() || j.size() != 3) {
    throw FormatError("expected a 3-element coordinate array, got " + j.dump());
  }
  p = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void to_json(json & j, const Viewpoint & vp)
{
  j = json{{"eye", vp.eye}, {"look_at", vp.look_at}, {"up", vp.up}};
}

void from_json(const json & j, Viewpoint & vp)
{
  vp.eye = j.at("eye").get<Point3>();
  vp.look_at = j.at("look_at").get<Point3>();
  vp.up = j.at("up").get<Point3>();
}

}  // namespace geom

std::string sha256_hex(std::string_view bytes)
{
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path & path) { return sha256_hex(read_text_file(path)); }

std::string read_text_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path & path, std::string_view contents)
{
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

json read_json_file(const std::filesystem::path & path)
{
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception & e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path & path, const json & doc)
{
  write_text_file(path, doc.dump(2) + "\n");
}

}  // namespace legible
