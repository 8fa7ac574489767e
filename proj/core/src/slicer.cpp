#include "srcvul/slicer.hpp"

#include <algorithm>
#include <deque>

namespace srcvul {

namespace {

std::string base_name(const std::string& fn) {
  const std::size_t at = fn.find('@');
  return at == std::string::npos ? fn : fn.substr(0, at);
}

}  // namespace

ProfileSet compute_slice_profiles(const SourceUnit& unit) {
  ProfileSet out;
  for (const FunctionUnit& fn : unit.functions) {
    auto profile = [&](const std::string& var) -> SliceProfile& {
      Criterion key{unit.path, fn.name, var};
      auto [it, inserted] = out.try_emplace(key);
      if (inserted) {
        it->second.file = unit.path;
        it->second.function = fn.name;
        it->second.variable = var;
      }
      return it->second;
    };
    for (const VarOccurrence& o : fn.variable_occurrences) {
      SliceProfile& p = profile(o.name);
      switch (o.kind) {
        case OccurrenceKind::definition:
          p.def_lines.insert(o.line);
          break;
        case OccurrenceKind::use:
          p.use_lines.insert(o.line);
          break;
        case OccurrenceKind::call_argument:
          p.use_lines.insert(o.line);
          p.cfuncs.insert({o.call_target.value_or(""), o.argument_position, o.indirect});
          break;
        case OccurrenceKind::pointer_assignment:
          p.def_lines.insert(o.line);
          if (o.pointee && *o.pointee != o.name) profile(*o.pointee).ptrs.insert(o.name);
          break;
      }
    }
    for (const DataDependency& d : fn.dependencies) {
      if (d.source != d.target) profile(d.source).dvars.insert(d.target);
    }
  }
  return out;
}

nlohmann::json to_json(const SliceProfile& p) {
  nlohmann::json cf = nlohmann::json::array();
  for (const auto& c : p.cfuncs) {
    nlohmann::json e = {{"function", c.function}, {"position", c.position}};
    if (c.indirect) e["indirect"] = true;
    cf.push_back(std::move(e));
  }
  return {{"file", p.file},        {"function", p.function}, {"variable", p.variable},
          {"def", p.def_lines},    {"use", p.use_lines},     {"dvars", p.dvars},
          {"ptrs", p.ptrs},        {"cfuncs", std::move(cf)}};
}

void CallGraph::add_function(const std::string& file, const FunctionUnit& fn) {
  FunctionKey key{file, fn.name};
  auto& defs = by_name_[base_name(fn.name)];
  defs.insert(std::lower_bound(defs.begin(), defs.end(), key), key);
  params_[key] = fn.parameters;
}

std::optional<FunctionKey> CallGraph::resolve(const std::string& caller_file, const std::string& callee) const {
  auto it = by_name_.find(callee);
  if (it == by_name_.end() || it->second.empty()) return std::nullopt;
  for (const auto& k : it->second) {
    if (k.file == caller_file) return k;
  }
  return it->second.front();
}

std::optional<Criterion> CallGraph::parameter_profile(const std::string& caller_file, const CalleeArg& arg) const {
  if (arg.indirect) return std::nullopt;
  auto key = resolve(caller_file, arg.function);
  if (!key) return std::nullopt;
  const auto& params = params_.at(*key);
  if (arg.position < 1 || static_cast<std::size_t>(arg.position) > params.size()) return std::nullopt;
  return Criterion{key->file, key->function, params[arg.position - 1]};
}

std::vector<std::pair<FunctionKey, FunctionKey>> CallGraph::edges(const ProfileSet& profiles) const {
  std::set<std::pair<FunctionKey, FunctionKey>> out;
  for (const auto& [key, p] : profiles) {
    for (const auto& c : p.cfuncs) {
      if (c.indirect) continue;
      if (auto callee = resolve(p.file, c.function)) out.insert({{p.file, p.function}, *callee});
    }
  }
  return {out.begin(), out.end()};
}

FinalPassResult final_pass(ProfileSet profiles, const std::vector<const SourceUnit*>& units) {
  FinalPassResult r;
  for (const SourceUnit* u : units) {
    for (const FunctionUnit& fn : u->functions) r.call_graph.add_function(u->path, fn);
  }
  // Alias closure reads the original ptrs sets, so the merge is independent
  // of iteration order.
  std::map<Criterion, std::set<int>> extra_uses;
  for (const auto& [key, p] : profiles) {
    if (p.ptrs.empty()) continue;
    std::set<std::string> seen{p.variable};
    std::deque<std::string> work(p.ptrs.begin(), p.ptrs.end());
    while (!work.empty()) {
      std::string name = std::move(work.front());
      work.pop_front();
      if (!seen.insert(name).second) continue;
      auto it = profiles.find({p.file, p.function, name});
      if (it == profiles.end()) continue;
      extra_uses[key].insert(it->second.use_lines.begin(), it->second.use_lines.end());
      for (const auto& next : it->second.ptrs) work.push_back(next);
    }
  }
  for (auto& [key, lines] : extra_uses) profiles[key].use_lines.insert(lines.begin(), lines.end());
  r.profiles = std::move(profiles);
  return r;
}

CompleteSlice compose_complete_slice(const Criterion& criterion, const ProfileSet& profiles,
                                     const CallGraph& call_graph) {
  auto root = profiles.find(criterion);
  if (root == profiles.end()) throw NotFoundError("no slice profile for " + to_string(criterion));

  CompleteSlice s;
  s.criterion = criterion;
  std::set<Criterion> visited;
  std::deque<Criterion> work{criterion};
  while (!work.empty()) {
    Criterion key = std::move(work.front());
    work.pop_front();
    if (!visited.insert(key).second) continue;
    auto it = profiles.find(key);
    if (it == profiles.end()) continue;
    const SliceProfile& p = it->second;
    const bool local = p.file == criterion.file && p.function == criterion.function;
    for (const auto* set : {&p.def_lines, &p.use_lines}) {
      for (int line : *set) {
        if (local) {
          s.lines.insert(line);
        } else {
          s.interprocedural_lines.insert({p.file, line});
        }
      }
    }
    s.unique_identifiers.insert(p.dvars.begin(), p.dvars.end());
    s.unique_identifiers.insert(p.ptrs.begin(), p.ptrs.end());
    for (const auto& d : p.dvars) work.push_back({p.file, p.function, d});
    for (const auto& q : p.ptrs) work.push_back({p.file, p.function, q});
    for (const auto& c : p.cfuncs) {
      s.unique_identifiers.insert(c.function);
      if (auto callee = call_graph.parameter_profile(p.file, c)) work.push_back(*callee);
    }
  }
  s.contributing_profiles = 0;
  for (const auto& k : visited) s.contributing_profiles += profiles.contains(k) ? 1 : 0;

  const SliceProfile& rp = root->second;
  if (!rp.def_lines.empty()) {
    const int first_def = *rp.def_lines.begin();
    s.lines.erase(s.lines.begin(), s.lines.lower_bound(first_def));
  }
  return s;
}

}  // namespace srcvul
