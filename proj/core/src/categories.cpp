#include <cctype>
#include <cstdlib>
#include <fstream>

#include "srcvul/vulndb.hpp"

namespace srcvul {

namespace {

constexpr std::pair<VulnCategory, std::string_view> kLabels[] = {
    {VulnCategory::MemoryManagement, "MemoryManagement"},
    {VulnCategory::ApiMisuse, "ApiMisuse"},
    {VulnCategory::InputHandling, "InputHandling"},
    {VulnCategory::AuthorizationFlaw, "AuthorizationFlaw"},
    {VulnCategory::ArithmeticLogic, "ArithmeticLogic"},
    {VulnCategory::Concurrency, "Concurrency"},
    {VulnCategory::Uncategorized, "Uncategorized"},
};

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }

bool keyword_hit(std::string_view text, std::string_view keyword) {
  bool whole = false;
  if (!keyword.empty() && keyword.back() == '$') {
    whole = true;
    keyword.remove_suffix(1);
  }
  if (keyword.empty()) return false;
  for (std::size_t pos = text.find(keyword); pos != std::string_view::npos; pos = text.find(keyword, pos + 1)) {
    if (pos > 0 && is_word_char(text[pos - 1])) continue;
    const std::size_t end = pos + keyword.size();
    if (whole && end < text.size() && is_word_char(text[end])) continue;
    return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(VulnCategory c) {
  for (const auto& [cat, label] : kLabels) {
    if (cat == c) return label;
  }
  return "Uncategorized";
}

VulnCategory category_from_string(std::string_view s) {
  for (const auto& [cat, label] : kLabels) {
    if (label == s) return cat;
  }
  throw Error("unknown category '" + std::string(s) + "'");
}

CategoryTable CategoryTable::from_json(const nlohmann::json& j) {
  CategoryTable t;
  if (!j.is_object() || !j.contains("rules") || !j["rules"].is_array()) {
    throw Error("category table needs a \"rules\" array");
  }
  for (const auto& r : j["rules"]) {
    Rule rule;
    rule.category = category_from_string(r.at("category").get<std::string>());
    for (const auto& k : r.at("keywords")) {
      std::string kw = k.get<std::string>();
      for (char& c : kw) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      rule.keywords.push_back(std::move(kw));
    }
    t.rules_.push_back(std::move(rule));
  }
  return t;
}

CategoryTable CategoryTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read category table " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error("category table " + path.string() + ": " + e.what());
  }
}

std::filesystem::path CategoryTable::standard_path() {
  if (const char* env = std::getenv("SRCVUL_CATEGORIES"); env != nullptr && *env != '\0') return env;
  const std::filesystem::path src = std::filesystem::path(SRCVUL_SOURCE_DATA_DIR) / "categories.json";
  if (std::filesystem::exists(src)) return src;
  return std::filesystem::path(SRCVUL_INSTALL_DATA_DIR) / "categories.json";
}

const CategoryTable& CategoryTable::standard() {
  static const CategoryTable table = load(standard_path());
  return table;
}

VulnCategory CategoryTable::classify(std::string_view description, std::string_view patch_text) const {
  std::string text;
  text.reserve(description.size() + patch_text.size() + 1);
  text.append(description).append("\n").append(patch_text);
  for (char& c : text) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (const Rule& r : rules_) {
    for (const auto& k : r.keywords) {
      if (keyword_hit(text, k)) return r.category;
    }
  }
  return VulnCategory::Uncategorized;
}

VulnCategory categorize(std::string_view description, std::string_view patch_text) {
  return CategoryTable::standard().classify(description, patch_text);
}

}  // namespace srcvul
