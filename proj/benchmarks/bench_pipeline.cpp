#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "srcvul/detector.hpp"
#include "srcvul/ingest.hpp"

using namespace srcvul;

namespace {

const std::filesystem::path kCve = std::filesystem::path(SRCVUL_FIXTURE_DIR) / "cve-2019-15214";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

DiffDocument fix_diff() {
  return parse_unified_diff(slurp(kCve / "diffs/cve-2019-15214.diff"),
                            parse_cve_meta(slurp(kCve / "diffs/cve-2019-15214.json")));
}

VulnStore fix_db() {
  VulnStore db;
  for (const auto& r : ingest_cve(fix_diff(), analyze_tree(kCve / "vulnerable"), analyze_tree(kCve / "patched")).records) {
    db.insert(r);
  }
  return db;
}

void BM_ParseSource(benchmark::State& state) {
  const std::string text = slurp(kCve / "vulnerable/sound/core/info.c");
  for (auto _ : state) benchmark::DoNotOptimize(parse_source(text, "sound/core/info.c"));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseSource);

void BM_ParseDiff(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(fix_diff());
}
BENCHMARK(BM_ParseDiff);

void BM_AnalyzeAndSlice(benchmark::State& state) {
  const std::string text = slurp(kCve / "vulnerable/sound/core/info.c");
  for (auto _ : state) benchmark::DoNotOptimize(slice_all(analyze_sources({{"sound/core/info.c", text}})));
}
BENCHMARK(BM_AnalyzeAndSlice);

void BM_IngestCve(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(fix_db());
}
BENCHMARK(BM_IngestCve);

void BM_ScanTree(benchmark::State& state) {
  const VulnStore db = fix_db();
  const AnalyzedTree target = analyze_tree(std::filesystem::path(SRCVUL_FIXTURE_DIR) / "target-4.14.76");
  DetectorConfig cfg;
  cfg.brute_force = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(detect_clones(target, db, cfg));
}
BENCHMARK(BM_ScanTree)->Arg(0)->Arg(1);

}  // namespace
