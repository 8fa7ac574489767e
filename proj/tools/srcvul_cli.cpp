#include "srcvul_cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "srcvul/analysis.hpp"
#include "srcvul/detector.hpp"
#include "srcvul/diff_analysis.hpp"
#include "srcvul/ingest.hpp"
#include "srcvul/vulndb.hpp"

namespace fs = std::filesystem;

namespace srcvul::cli {

namespace {

constexpr int kOk = 0;
constexpr int kFound = 1;
constexpr int kError = 2;

const char* const kDefaultDb = "srcvul-db.jsonl";

// Settings resolved as flag > SRCVUL_* environment > srcvul.toml > default.
struct Settings {
  std::map<std::string, std::string> file_values;

  std::optional<std::string> pick(const CLI::Option* flag, const std::string& flag_value, const std::string& key) const {
    if (flag != nullptr && flag->count() > 0) return flag_value;
    std::string env = "SRCVUL_" + key;
    std::transform(env.begin(), env.end(), env.begin(), [](unsigned char c) { return std::toupper(c); });
    if (const char* v = std::getenv(env.c_str()); v != nullptr && *v != '\0') return std::string(v);
    if (auto it = file_values.find(key); it != file_values.end()) return it->second;
    return std::nullopt;
  }
};

std::string unquote(std::string s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) s = s.substr(1, s.size() - 2);
  return s;
}

Settings load_settings(const std::string& config_path, bool explicit_path) {
  Settings s;
  if (config_path.empty()) return s;
  if (!fs::exists(config_path)) {
    if (explicit_path) throw Error("config file " + config_path + " does not exist");
    return s;
  }
  try {
    for (const auto& item : CLI::ConfigTOML().from_file(config_path)) {
      if (item.inputs.empty()) continue;
      std::string key = item.name;
      std::replace(key.begin(), key.end(), '-', '_');
      s.file_values[key] = unquote(item.inputs.front());
    }
  } catch (const CLI::Error& e) {
    throw Error("config file " + config_path + ": " + e.what());
  }
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) throw Error(key + ": '" + v + "' is not a number");
  return d;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int x{};
  auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw Error(key + ": '" + v + "' is not an integer");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw Error(key + ": '" + v + "' is not a boolean");
}

void print_diagnostics(const Diagnostics& diags, bool verbose, std::ostream& err) {
  if (diags.empty()) return;
  if (!verbose) {
    err << "note: " << diags.size() << " diagnostics (rerun with --verbose to list them)\n";
    return;
  }
  for (const auto& d : diags) err << "warning: " << to_string(d) << "\n";
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CommonOptions {
  std::string db;
  std::vector<CLI::Option*> db_opts;
  bool verbose = false;

  const CLI::Option* db_opt() const {
    for (const auto* o : db_opts) {
      if (o->count() > 0) return o;
    }
    return nullptr;
  }
};

struct ScanOptions {
  std::string target;
  std::string threshold, bands, planes, seed, review_band, format;
  bool brute_force = false;
  bool no_patches = false;
  CLI::Option *threshold_opt{}, *bands_opt{}, *planes_opt{}, *seed_opt{}, *review_opt{}, *format_opt{}, *brute_opt{};
};

int cmd_build_db(const std::string& diff_dir, const std::string& vulnerable_src, const std::string& patched_src,
                 const fs::path& db_path, bool verbose, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(diff_dir)) {
    err << "error: diff directory " << diff_dir << " does not exist\n";
    return kError;
  }
  std::vector<fs::path> diffs;
  for (const auto& e : fs::directory_iterator(diff_dir)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".diff" || ext == ".patch")) diffs.push_back(e.path());
  }
  std::sort(diffs.begin(), diffs.end());

  VulnStore store;
  if (fs::exists(db_path)) store = VulnStore::load(db_path);
  const std::size_t before = store.size();

  std::map<fs::path, AnalyzedTree> trees;
  auto tree_for = [&](const fs::path& root, const std::string& stem) -> const AnalyzedTree& {
    fs::path dir = fs::is_directory(root / stem) ? root / stem : root;
    auto it = trees.find(dir);
    if (it == trees.end()) it = trees.emplace(dir, analyze_tree(dir)).first;
    return it->second;
  };

  std::size_t cves = 0, stmts = 0, vars = 0, produced = 0;
  Diagnostics diags;
  for (const auto& diff : diffs) {
    const std::string stem = diff.stem().string();
    fs::path sidecar = diff;
    sidecar.replace_extension(".json");
    if (!fs::exists(sidecar)) {
      err << "warning: skipping " << diff.filename().string() << ": no sidecar metadata " << sidecar.filename().string()
          << "\n";
      continue;
    }
    try {
      const CveMeta meta = parse_cve_meta(read_file(sidecar));
      const DiffDocument doc = parse_unified_diff(read_file(diff), meta);
      const AnalyzedTree& vul = tree_for(vulnerable_src, stem);
      const AnalyzedTree& pat = tree_for(patched_src, stem);
      IngestResult r = ingest_cve(doc, vul, pat);
      ++cves;
      stmts += r.vr_stmts;
      vars += r.vr_vars;
      produced += r.records.size();
      for (auto& rec : r.records) store.insert(std::move(rec));
      for (auto& d : r.diagnostics) diags.push_back(std::move(d));
    } catch (const Error& e) {
      err << "warning: skipping " << diff.filename().string() << ": " << e.what() << "\n";
    }
  }
  print_diagnostics(diags, verbose, err);
  if (produced == 0) {
    err << "error: no records\n";
    return kError;
  }
  store.save(db_path);
  out << "CVEs: " << cves << "\n"
      << "vr_stmts: " << stmts << "\n"
      << "vr_vars: " << vars << "\n"
      << "records: " << produced << " (" << store.size() - before << " new, " << store.size() << " in database)\n"
      << "database: " << db_path.string() << "\n";
  return kOk;
}

int cmd_scan(const ScanOptions& o, const Settings& settings, const CommonOptions& common, std::ostream& out,
             std::ostream& err) {
  DetectorConfig cfg;
  if (auto v = settings.pick(o.threshold_opt, o.threshold, "threshold")) cfg.threshold = to_double("threshold", *v);
  if (auto v = settings.pick(o.review_opt, o.review_band, "review_band")) cfg.review_band = to_double("review_band", *v);
  if (auto v = settings.pick(o.bands_opt, o.bands, "bands")) cfg.lsh.bands = to_int<int>("bands", *v);
  if (auto v = settings.pick(o.planes_opt, o.planes, "planes")) cfg.lsh.planes_per_band = to_int<int>("planes", *v);
  if (auto v = settings.pick(o.seed_opt, o.seed, "seed")) cfg.lsh.seed = to_int<std::uint64_t>("seed", *v);
  if (auto v = settings.pick(o.brute_opt, o.brute_force ? "true" : "false", "brute_force")) {
    cfg.brute_force = to_bool("brute_force", *v);
  }
  const std::string format = settings.pick(o.format_opt, o.format, "format").value_or("text");
  if (format != "text" && format != "json") throw Error("format must be text or json");
  const std::string db = settings.pick(common.db_opt(), common.db, "db").value_or(kDefaultDb);
  cfg.validate();

  const VulnStore store = VulnStore::load(db);
  const AnalyzedTree tree = analyze_tree(o.target);
  const ScanReport report = detect_clones(tree, store, cfg);
  print_diagnostics(report.diagnostics, common.verbose, err);
  if (format == "json") {
    out << to_json(report).dump(2) << "\n";
  } else {
    out << render_text(report, !o.no_patches);
  }
  return report.vulnerable_count() > 0 ? kFound : kOk;
}

int cmd_inspect(const std::string& selector, const std::string& db, const std::string& format, std::ostream& out) {
  const VulnStore store = VulnStore::load(db);
  std::vector<const VulnRecord*> hits = store.by_cve(selector);
  if (hits.empty()) {
    for (const auto& [id, r] : store.records()) {
      if (id.rfind(selector, 0) == 0) hits.push_back(&r);
    }
  }
  if (hits.empty()) return kFound;
  if (format == "json") {
    for (const VulnRecord* r : hits) out << serialize_record(*r) << "\n";
    return kOk;
  }
  for (const VulnRecord* r : hits) {
    out << "record " << r->record_id << "\n"
        << "  cve:       " << r->cve_id << " (" << r->project << (r->version.empty() ? "" : " " + r->version) << ")\n"
        << "  criterion: " << to_string(r->criterion) << " [" << to_string(r->origin) << " side]\n"
        << "  category:  " << to_string(r->category) << "\n"
        << "  vector:    " << to_string(r->vector) << "\n"
        << "  slice:    ";
    for (int l : r->slice_lines) out << " " << l;
    out << "\n";
    if (r->patch.empty()) {
      out << "  patch:     no-patch-available\n";
    } else {
      out << "  patch:\n" << r->patch << (r->patch.back() == '\n' ? "" : "\n");
    }
  }
  return kOk;
}

int cmd_profiles(const std::string& path, std::ostream& out) {
  const AnalyzedTree tree = analyze_tree(path);
  for (const auto& [key, p] : tree.profiles) out << to_json(p).dump() << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Detects vulnerable code clones by matching program-slice metric vectors against a database of known "
               "vulnerability fixes."};
  app.name("srcvul");
  app.require_subcommand(1);
  app.fallthrough();

  CommonOptions common;
  std::string config_path = "srcvul.toml";
  auto* config_opt = app.add_option("--config", config_path,
                                    "Settings file (TOML); flags override SRCVUL_* variables, which override the file")
                         ->capture_default_str();
  app.add_flag("-v,--verbose", common.verbose, "List every diagnostic on standard error");

  auto add_db = [&](CLI::App* sub) {
    common.db_opts.push_back(sub->add_option("--db", common.db, std::string("Database file (default ") + kDefaultDb + ")"));
  };

  auto* build = app.add_subcommand("build-db", "Build or extend the database from vulnerability fix diffs");
  std::string diff_dir, vulnerable_src, patched_src;
  build->add_option("diff_dir", diff_dir, "Directory of .diff/.patch files, each with a <name>.json sidecar")
      ->required();
  build->add_option("vulnerable_src", vulnerable_src,
                    "Vulnerable source root (a <name>/ subdirectory per diff is used when present)")
      ->required();
  build->add_option("patched_src", patched_src, "Patched source root, laid out like vulnerable_src")->required();
  add_db(build);

  auto* scan = app.add_subcommand("scan", "Scan a source tree for clones of database vulnerabilities");
  ScanOptions so;
  scan->add_option("target", so.target, "Directory or file to scan")->required();
  so.threshold_opt = scan->add_option("--threshold", so.threshold,
                                      "Minimum cosine similarity for a match, in (0, 1] (default 0.8, the setting the "
                                      "detection method was tuned with)");
  so.bands_opt = scan->add_option("--bands", so.bands, "LSH bands (default 8)");
  so.planes_opt = scan->add_option("--planes", so.planes, "Hyperplanes per LSH band (default 4)");
  so.seed_opt = scan->add_option("--seed", so.seed, "Seed for the LSH hyperplanes (default 42)");
  so.brute_opt = scan->add_flag("--brute-force", so.brute_force, "Compare against every record instead of using LSH");
  so.review_opt = scan->add_option("--review-band", so.review_band,
                                   "Tag matches below threshold + band for manual review (default 0.05)");
  so.format_opt = scan->add_option("--format", so.format, "Output format: text or json (default text)");
  scan->add_flag("--no-patches", so.no_patches, "Text output: list matches without the recommended patches");
  add_db(scan);

  auto* inspect = app.add_subcommand("inspect", "Print database records for a CVE id or record id (prefix)");
  std::string selector, inspect_format;
  inspect->add_option("selector", selector, "CVE id or record id")->required();
  auto* inspect_format_opt = inspect->add_option("--format", inspect_format, "Output format: text or json (default text)");
  add_db(inspect);

  auto* profiles = app.add_subcommand("profiles", "Dump the slice profiles of a source tree as JSON lines");
  std::string profiles_path;
  profiles->add_option("path", profiles_path, "Directory or file")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kError;
  }

  try {
    const char* env_config = std::getenv("SRCVUL_CONFIG");
    const bool explicit_config = config_opt->count() > 0 || (env_config != nullptr && *env_config != '\0');
    if (config_opt->count() == 0 && env_config != nullptr && *env_config != '\0') config_path = env_config;
    const Settings settings = load_settings(config_path, explicit_config);
    const std::string db = settings.pick(common.db_opt(), common.db, "db").value_or(kDefaultDb);

    if (build->parsed()) return cmd_build_db(diff_dir, vulnerable_src, patched_src, db, common.verbose, out, err);
    if (scan->parsed()) return cmd_scan(so, settings, common, out, err);
    if (inspect->parsed()) {
      const std::string format = settings.pick(inspect_format_opt, inspect_format, "format").value_or("text");
      const int rc = cmd_inspect(selector, db, format, out);
      if (rc == kFound) err << "no record matches '" << selector << "'\n";
      return rc;
    }
    if (profiles->parsed()) return cmd_profiles(profiles_path, out);
  } catch (const DbError& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}

}  // namespace srcvul::cli
