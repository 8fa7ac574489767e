#include "corpus.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "srcvul/analysis.hpp"
#include "srcvul/ingest.hpp"
#include "srcvul/lexer.hpp"

namespace fs = std::filesystem;

namespace testsupport {

namespace {

struct TLine {
  std::string text;
  std::vector<std::string> vars;  // placeholder keys appearing as variables
};

using Stmt = std::vector<TLine>;
using Names = std::map<std::string, std::string>;

const std::vector<std::string> kKeys = {"fn", "ty", "obj", "src", "len", "ent", "ret",
                                        "i",  "total", "count", "h0", "h1", "h2"};

const std::vector<Stmt> kPlainFillers = {
    {{"\t{obj}->count++;", {"obj"}}},
    {{"\t{ret} = {h0}({obj}, {i});", {"ret", "obj", "i"}}},
    {{"\t{i} = {len} / 2;", {"i", "len"}}},
    {{"\tpr_debug(\"%s\\n\", {src});", {"src"}}},
    {{"\tif ({ret} < 0)", {"ret"}}, {"\t\treturn {ret};", {"ret"}}},
    {{"\t{total} = {count} + {len};", {"total", "count", "len"}}},
    {{"\t{count} = {obj}->count;", {"count", "obj"}}},
    {{"\tfor ({i} = 0; {i} < {count}; {i}++)", {"i", "count"}}, {"\t\t{obj}->slots[{i}] = 0;", {"obj", "i"}}},
    {{"\tspin_lock(&{obj}->slock);", {"obj"}},
     {"\t{obj}->pending = {total};", {"obj", "total"}},
     {"\tspin_unlock(&{obj}->slock);", {"obj"}}},
};

const std::vector<Stmt> kEntryFillers = {
    {{"\t{ent}->id = {i} + 7;", {"ent", "i"}}},
    {{"\t{h1}({ent}, {total});", {"ent", "total"}}},
    {{"\t{ent}->owner = {obj};", {"ent", "obj"}}},
    {{"\t{ent}->len = {len};", {"ent", "len"}}},
};

const std::vector<Stmt> kInsertions = {
    {{"\tpr_debug(\"%zu\\n\", {len});", {"len"}}},
    {{"\t{obj}->generation++;", {"obj"}}},
    {{"\t{count} = {count} + 1;", {"count"}}},
    {{"\t{i} = 0;", {"i"}}},
};

struct Variant {
  Stmt vulnerable;
  Stmt patched;
  const char* description;
};

const std::vector<Variant> kVariants = {
    {{{"\tlist_add_tail(&{ent}->list, &{obj}->children);", {"ent", "obj"}}},
     {{"\tif ({obj}) {", {"obj"}},
      {"\t\tmutex_lock(&{obj}->lock);", {"obj"}},
      {"\t\tlist_add_tail(&{ent}->list, &{obj}->children);", {"ent", "obj"}},
      {"\t\tmutex_unlock(&{obj}->lock);", {"obj"}},
      {"\t}", {}}},
     "A race condition in {fn} adds entries to a list without holding the parent mutex."},
    {{{"\tfor ({i} = 0; {i} <= {len}; {i}++)", {"i", "len"}}, {"\t\t{ent}->data[{i}] = {src}[{i}];", {"ent", "i", "src"}}},
     {{"\tfor ({i} = 0; {i} < {len}; {i}++)", {"i", "len"}}, {"\t\t{ent}->data[{i}] = {src}[{i}];", {"ent", "i", "src"}}},
     "An off-by-one error in {fn} causes a heap buffer overflow while copying data."},
    {{{"\tkfree({ent});", {"ent"}}, {"\t{ret} = {ent}->status;", {"ret", "ent"}}},
     {{"\t{ret} = {ent}->status;", {"ret", "ent"}}, {"\tkfree({ent});", {"ent"}}},
     "A use after free in {fn} reads the entry status after it has been released."},
    {{{"\t{total} = {len} * {count};", {"total", "len", "count"}}},
     {{"\tif (check_mul_overflow({len}, {count}, &{total}))", {"len", "count", "total"}},
      {"\t\treturn -EOVERFLOW;", {}}},
     "An integer overflow in {fn} miscomputes the table size."},
    {{{"\tif ({obj}->flags & 1)", {"obj"}}, {"\t\t{ret} = {h2}({obj});", {"ret", "obj"}}},
     {{"\tif (capable(CAP_SYS_ADMIN) && ({obj}->flags & 1))", {"obj"}}, {"\t\t{ret} = {h2}({obj});", {"ret", "obj"}}},
     "A missing permission check in {fn} lets unprivileged users reconfigure the device."},
};

std::string fill(std::string text, const Names& names) {
  for (const auto& [key, value] : names) {
    const std::string ph = "{" + key + "}";
    for (std::size_t pos = text.find(ph); pos != std::string::npos; pos = text.find(ph, pos + value.size())) {
      text.replace(pos, ph.size(), value);
    }
  }
  return text;
}

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  std::string word() {
    static const std::string cons = "bcdfghklmnprstvz";
    static const std::string vows = "aeiou";
    for (;;) {
      std::string w;
      const int syl = uniform(2, 3);
      for (int s = 0; s < syl; ++s) {
        w += cons[uniform(0, static_cast<int>(cons.size()) - 1)];
        w += vows[uniform(0, static_cast<int>(vows.size()) - 1)];
      }
      if (!srcvul::is_keyword(w) && !srcvul::is_type_word(w) && used_.insert(w).second) return w;
    }
  }

  Names names() {
    Names n;
    for (const auto& k : kKeys) n[k] = word();
    n["fn"] = "drv_" + n["fn"];
    for (const char* h : {"h0", "h1", "h2"}) n[h] = "hlp_" + n[h];
    return n;
  }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[uniform(0, static_cast<int>(v.size()) - 1)];
  }

 private:
  std::mt19937_64 rng_;
  std::set<std::string> used_;
};

struct FunctionShape {
  std::vector<Stmt> pre, mid, post;
  int variant = 0;
};

FunctionShape random_shape(Gen& g, int variant) {
  FunctionShape s;
  s.variant = variant;
  for (int k = g.uniform(1, 3); k > 0; --k) s.pre.push_back(g.pick(kPlainFillers));
  for (int k = g.uniform(1, 4); k > 0; --k) s.mid.push_back(g.uniform(0, 1) ? g.pick(kEntryFillers) : g.pick(kPlainFillers));
  for (int k = g.uniform(0, 3); k > 0; --k) s.post.push_back(g.uniform(0, 1) ? g.pick(kEntryFillers) : g.pick(kPlainFillers));
  return s;
}

std::vector<TLine> function_lines(const FunctionShape& s, bool patched) {
  std::vector<TLine> out = {
      {"static int {fn}(struct {ty} *{obj}, const char *{src}, size_t {len})", {"obj", "src", "len"}},
      {"{", {}},
      {"\tstruct {ty}_entry *{ent};", {"ent"}},
      {"\tsize_t {i} = 0;", {"i"}},
      {"\tsize_t {total} = 0;", {"total"}},
      {"\tsize_t {count} = 0;", {"count"}},
      {"\tint {ret} = 0;", {"ret"}},
      {"", {}},
  };
  auto append = [&](const std::vector<Stmt>& stmts) {
    for (const auto& st : stmts) out.insert(out.end(), st.begin(), st.end());
  };
  append(s.pre);
  out.push_back({"\t{ent} = kzalloc(sizeof(*{ent}), GFP_KERNEL);", {"ent"}});
  out.push_back({"\tif (!{ent})", {"ent"}});
  out.push_back({"\t\treturn -ENOMEM;", {}});
  append(s.mid);
  const Variant& v = kVariants[s.variant];
  append({patched ? v.patched : v.vulnerable});
  append(s.post);
  out.push_back({"\treturn {ret};", {"ret"}});
  out.push_back({"}", {}});
  return out;
}

std::vector<TLine> noise_function(Gen& g) {
  std::vector<TLine> out = {
      {"static int {fn}(struct {ty} *{obj}, const char *{src}, size_t {len})", {}},
      {"{", {}},
      {"\tsize_t {i} = 0;", {}},
      {"\tsize_t {total} = 0;", {}},
      {"\tsize_t {count} = 0;", {}},
      {"\tint {ret} = 0;", {}},
      {"", {}},
  };
  for (int k = g.uniform(2, 6); k > 0; --k) {
    const Stmt& st = g.pick(kPlainFillers);
    out.insert(out.end(), st.begin(), st.end());
  }
  out.push_back({"\treturn {ret};", {}});
  out.push_back({"}", {}});
  return out;
}

const std::vector<TLine> kFileHeader = {{"#include <linux/slab.h>", {}}, {"#include <linux/list.h>", {}}, {"", {}}};

std::vector<TLine> with_header(const std::vector<TLine>& body) {
  std::vector<TLine> out = kFileHeader;
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

std::vector<std::string> render(const std::vector<TLine>& lines, const Names& n) {
  std::vector<std::string> out;
  for (const auto& l : lines) out.push_back(fill(l.text, n));
  return out;
}

}  // namespace

PlantedCorpus make_planted_corpus(std::uint64_t seed, const CorpusShape& shape) {
  Gen g(seed);
  PlantedCorpus corpus;
  std::vector<FunctionShape> shapes;
  std::vector<Names> names;

  for (int k = 0; k < shape.cves; ++k) {
    PlantedCve c;
    char id[32];
    std::snprintf(id, sizeof id, "CVE-2020-%05d", 10000 + k);
    c.cve_id = id;
    std::snprintf(id, sizeof id, "fix-%02d", k);
    c.stem = id;
    Names n = g.names();
    FunctionShape s = random_shape(g, k % static_cast<int>(kVariants.size()));
    c.path = "drivers/misc/" + n["ty"] + ".c";
    c.function = n["fn"];

    const auto before = with_header(function_lines(s, false));
    const auto after = with_header(function_lines(s, true));
    const auto old_text = render(before, n);
    const auto new_text = render(after, n);
    c.vulnerable = join_lines(old_text);
    c.patched = join_lines(new_text);
    const GeneratedDiff d = make_unified_diff(old_text, new_text, c.path);
    c.diff = d.text;
    for (int l : d.deleted_old) {
      for (const auto& key : before[l - 1].vars) c.deleted_vars.insert(n[key]);
    }
    for (int l : d.added_new) {
      for (const auto& key : after[l - 1].vars) c.added_vars.insert(n[key]);
    }
    c.description = fill(kVariants[s.variant].description, n);
    c.meta_json = nlohmann::json{{"cve_id", c.cve_id},
                                 {"description", c.description},
                                 {"project", "planted"},
                                 {"version", "1." + std::to_string(k)}}
                      .dump();
    corpus.cves.push_back(std::move(c));
    shapes.push_back(std::move(s));
    names.push_back(std::move(n));
  }

  auto add_clone = [&](CloneType type, int index, int cve) {
    FunctionShape s = shapes[cve];
    Names n = names[cve];
    if (type == CloneType::type2) {
      Names fresh = g.names();
      n = fresh;
    }
    if (type == CloneType::type3) {
      for (int k = g.uniform(1, 2); k > 0; --k) {
        auto& section = g.uniform(0, 1) ? s.mid : s.post;
        section.insert(section.begin() + g.uniform(0, static_cast<int>(section.size())), g.pick(kInsertions));
      }
    }
    Names noise_names = g.names();
    std::vector<TLine> body = noise_function(g);
    body.push_back({"", {}});
    const auto fn = function_lines(s, false);
    body.insert(body.end(), fn.begin(), fn.end());
    std::vector<std::string> text = render(kFileHeader, n);
    for (const auto& l : render(std::vector<TLine>(body.begin(), body.begin() + static_cast<long>(body.size() - fn.size())), noise_names)) {
      text.push_back(l);
    }
    for (const auto& l : render(fn, n)) text.push_back(l);
    char file[64];
    std::snprintf(file, sizeof file, "src/type%d/clone_%02d.c", static_cast<int>(type), index);
    corpus.target_files[file] = join_lines(text);
    corpus.clones.push_back({file, n.at("fn"), corpus.cves[cve].cve_id, type});
  };

  const int n = shape.cves;
  for (int k = 0; k < shape.type1; ++k) add_clone(CloneType::type1, k, k % n);
  for (int k = 0; k < shape.type2; ++k) add_clone(CloneType::type2, k, (shape.type1 + k) % n);
  for (int k = 0; k < shape.type3; ++k) add_clone(CloneType::type3, k, (2 * k) % n);
  for (int k = 0; k < shape.noise_files; ++k) {
    std::vector<TLine> body = noise_function(g);
    body.push_back({"", {}});
    const auto second = noise_function(g);
    const std::size_t split = body.size();
    body.insert(body.end(), second.begin(), second.end());
    std::vector<std::string> text = render(kFileHeader, {});
    for (const auto& l : render(std::vector<TLine>(body.begin(), body.begin() + static_cast<long>(split)), g.names())) {
      text.push_back(l);
    }
    for (const auto& l : render(second, g.names())) text.push_back(l);
    char file[64];
    std::snprintf(file, sizeof file, "src/other/noise_%02d.c", k);
    corpus.target_files[file] = join_lines(text);
  }
  return corpus;
}

std::string random_source_file(std::uint64_t seed) {
  Gen g(seed);
  Names n = g.names();
  const FunctionShape s = random_shape(g, g.uniform(0, static_cast<int>(kVariants.size()) - 1));
  std::vector<TLine> body = {
      {"static int {h0}(struct {ty} *{obj}, size_t {len})", {}},
      {"{", {}},
      {"\tstruct {ty} *{src} = {obj};", {}},
      {"\t{src}->count = {len};", {}},
      {"\treturn 0;", {}},
      {"}", {}},
      {"", {}},
  };
  const auto fn = function_lines(s, g.uniform(0, 1) == 1);
  body.insert(body.end(), fn.begin(), fn.end());
  std::vector<std::string> text = render(with_header(body), n);
  text.push_back("");
  for (const auto& l : render(noise_function(g), g.names())) text.push_back(l);
  return join_lines(text);
}

srcvul::VulnStore build_planted_db(const PlantedCorpus& corpus) {
  srcvul::VulnStore store;
  for (const auto& c : corpus.cves) {
    const auto doc = srcvul::parse_unified_diff(c.diff, srcvul::parse_cve_meta(c.meta_json));
    const auto vul = srcvul::analyze_sources({{c.path, c.vulnerable}});
    const auto pat = srcvul::analyze_sources({{c.path, c.patched}});
    for (auto& r : srcvul::ingest_cve(doc, vul, pat).records) store.insert(std::move(r));
  }
  return store;
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_planted_corpus(const PlantedCorpus& corpus, const fs::path& root) {
  for (const auto& c : corpus.cves) {
    write_file(root / "diffs" / (c.stem + ".diff"), c.diff);
    write_file(root / "diffs" / (c.stem + ".json"), c.meta_json);
    write_file(root / "vulnerable" / c.stem / c.path, c.vulnerable);
    write_file(root / "patched" / c.stem / c.path, c.patched);
  }
  for (const auto& [path, text] : corpus.target_files) write_file(root / "target" / path, text);
}

TempDir::TempDir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  for (;;) {
    path_ = fs::temp_directory_path() / ("srcvul-" + tag + "-" + std::to_string(rng() % 1000000000));
    if (fs::create_directories(path_)) return;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

}  // namespace testsupport
