#include "srcvul/vulndb.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "srcvul/lexer.hpp"

namespace srcvul {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

std::string quote(const std::string& s) {
  return nlohmann::json(s).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw DbError("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

const std::string kHeader = R"({"format":"srcvul-db","version":1})";

}  // namespace

std::string compute_record_id(const VulnRecord& r) {
  std::string key = "srcvul-record-v1";
  for (double d : r.vector.dims) key += "|" + format_double(d);
  key += "|" + r.cve_id;
  key += "|" + r.criterion.file + "|" + r.criterion.function + "|" + r.criterion.variable;
  key += "|";
  key += to_string(r.origin);
  return sha256_hex(key).substr(0, 24);
}

std::string serialize_record(const VulnRecord& r) {
  std::string s = "{\"record_id\":" + quote(r.record_id) + ",\"vector\":[";
  for (std::size_t i = 0; i < 4; ++i) {
    if (i) s += ',';
    s += format_double(r.vector.dims[i]);
  }
  s += "],\"cve_id\":" + quote(r.cve_id);
  s += ",\"description\":" + quote(r.description);
  s += ",\"project\":" + quote(r.project);
  s += ",\"version\":" + quote(r.version);
  s += ",\"criterion\":{\"file\":" + quote(r.criterion.file) + ",\"function\":" + quote(r.criterion.function) +
       ",\"variable\":" + quote(r.criterion.variable) + "}";
  s += ",\"slice_lines\":[";
  bool first = true;
  for (int l : r.slice_lines) {
    if (!first) s += ',';
    first = false;
    s += std::to_string(l);
  }
  s += "],\"patch\":" + quote(r.patch);
  s += ",\"origin\":" + quote(std::string(to_string(r.origin)));
  s += ",\"category\":" + quote(std::string(to_string(r.category)));
  s += "}";
  return s;
}

VulnRecord parse_record(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw DbError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw DbError("record is not a JSON object");
  auto str = [&](const nlohmann::json& obj, const char* key) -> std::string {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) throw DbError(std::string("field \"") + key + "\" must be a string");
    return it->get<std::string>();
  };
  VulnRecord r;
  r.record_id = str(j, "record_id");
  auto vec = j.find("vector");
  if (vec == j.end() || !vec->is_array() || vec->size() != 4) throw DbError("\"vector\" must hold 4 numbers");
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& x = (*vec)[i];
    if (!x.is_number()) throw DbError("\"vector\" must hold 4 numbers");
    r.vector.dims[i] = x.get<double>();
    if (!std::isfinite(r.vector.dims[i]) || r.vector.dims[i] < 0) throw DbError("vector component out of range");
  }
  if (r.vector.is_zero()) throw DbError("zero vector");
  r.cve_id = str(j, "cve_id");
  if (!is_valid_cve_id(r.cve_id)) throw DbError("invalid cve_id '" + r.cve_id + "'");
  r.description = str(j, "description");
  r.project = str(j, "project");
  r.version = str(j, "version");
  auto crit = j.find("criterion");
  if (crit == j.end() || !crit->is_object()) throw DbError("\"criterion\" must be an object");
  r.criterion = {str(*crit, "file"), str(*crit, "function"), str(*crit, "variable")};
  auto lines = j.find("slice_lines");
  if (lines == j.end() || !lines->is_array()) throw DbError("\"slice_lines\" must be an array");
  for (const auto& l : *lines) {
    if (!l.is_number_integer()) throw DbError("\"slice_lines\" must hold integers");
    r.slice_lines.insert(l.get<int>());
  }
  r.patch = str(j, "patch");
  try {
    r.origin = side_from_string(str(j, "origin"));
    r.category = category_from_string(str(j, "category"));
  } catch (const DbError&) {
    throw;
  } catch (const Error& e) {
    throw DbError(e.what());
  }
  if (compute_record_id(r) != r.record_id) throw DbError("record_id does not match the record content");
  return r;
}

std::string VulnStore::insert(VulnRecord r) {
  for (std::string* s : {&r.cve_id, &r.description, &r.project, &r.version, &r.criterion.file,
                         &r.criterion.function, &r.criterion.variable, &r.patch}) {
    *s = sanitize_utf8(*s);
  }
  if (!is_valid_cve_id(r.cve_id)) throw DbError("invalid cve_id '" + r.cve_id + "'");
  if (r.vector.is_zero()) throw DbError("refusing to store a zero vector for " + to_string(r.criterion));
  r.record_id = compute_record_id(r);
  auto id = r.record_id;
  records_.try_emplace(id, std::move(r));
  return id;
}

const VulnRecord* VulnStore::get(std::string_view id) const {
  auto it = records_.find(id);
  return it == records_.end() ? nullptr : &it->second;
}

std::vector<const VulnRecord*> VulnStore::by_cve(std::string_view cve_id) const {
  std::vector<const VulnRecord*> out;
  for (const auto& [id, r] : records_) {
    if (r.cve_id == cve_id) out.push_back(&r);
  }
  return out;
}

std::vector<const VulnRecord*> VulnStore::lookup_by_vector(const SlicingVector& v, double tolerance) const {
  if (!(tolerance >= 0)) throw Error("tolerance must be non-negative");
  std::vector<std::pair<double, const VulnRecord*>> hits;
  for (const auto& [id, r] : records_) {
    bool ok = true;
    double d2 = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      const double d = std::abs(r.vector.dims[i] - v.dims[i]);
      if (d > tolerance) {
        ok = false;
        break;
      }
      d2 += d * d;
    }
    if (ok) hits.emplace_back(d2, &r);
  }
  std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second->record_id < b.second->record_id;
  });
  std::vector<const VulnRecord*> out;
  for (const auto& h : hits) out.push_back(h.second);
  return out;
}

std::string VulnStore::serialize() const {
  std::string out = kHeader + "\n";
  for (const auto& [id, r] : records_) out += serialize_record(r) + "\n";
  return out;
}

VulnStore VulnStore::parse(std::string_view text) {
  VulnStore store;
  std::size_t pos = 0;
  int line_no = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    if (!header_seen) {
      nlohmann::json h;
      try {
        h = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error&) {
        throw DbError("line " + std::to_string(line_no) + ": missing srcvul-db header", line_no);
      }
      if (!h.is_object() || h.value("format", "") != "srcvul-db") {
        throw DbError("line " + std::to_string(line_no) + ": missing srcvul-db header", line_no);
      }
      if (h.value("version", 0) != 1) {
        throw DbError("line " + std::to_string(line_no) + ": unsupported database version", line_no);
      }
      header_seen = true;
      continue;
    }
    VulnRecord r;
    try {
      r = parse_record(line);
    } catch (const DbError& e) {
      throw DbError("line " + std::to_string(line_no) + ": " + e.what(), line_no);
    }
    if (store.records_.contains(r.record_id)) {
      throw DbError("line " + std::to_string(line_no) + ": duplicate record_id " + r.record_id, line_no);
    }
    store.records_.emplace(r.record_id, std::move(r));
  }
  if (!header_seen) throw DbError("empty database: missing srcvul-db header", 1);
  return store;
}

void VulnStore::save(const std::filesystem::path& path) const {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DbError("cannot write " + tmp.string());
    const std::string text = serialize();
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw DbError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DbError("cannot replace " + path.string() + ": " + ec.message());
}

VulnStore VulnStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DbError("cannot read database " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const DbError& e) {
    throw DbError(path.string() + ": " + e.what(), e.line());
  }
}

}  // namespace srcvul
