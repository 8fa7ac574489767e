#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "srcvul/common.hpp"
#include "srcvul/source_model.hpp"

namespace srcvul {

/// A function receiving the slicing variable as an argument.
struct CalleeArg {
  std::string function;
  int position = 0;  // 1-based
  bool indirect = false;  // called through a pointer or member, never resolved

  friend auto operator<=>(const CalleeArg&, const CalleeArg&) = default;
  friend bool operator==(const CalleeArg&, const CalleeArg&) = default;
};

struct SliceProfile {
  std::string file;
  std::string function;
  std::string variable;
  std::set<int> def_lines;
  std::set<int> use_lines;
  std::set<std::string> dvars;  // variables computed from this one
  std::set<std::string> ptrs;   // pointers aliasing this variable
  std::set<CalleeArg> cfuncs;

  Criterion criterion() const { return {file, function, variable}; }
  friend bool operator==(const SliceProfile&, const SliceProfile&) = default;
};

using ProfileSet = std::map<Criterion, SliceProfile>;

/// One profile per (function, variable) with at least one occurrence.
ProfileSet compute_slice_profiles(const SourceUnit& unit);

nlohmann::json to_json(const SliceProfile& p);

/// Functions defined in the analyzed corpus and their parameter lists.
class CallGraph {
 public:
  void add_function(const std::string& file, const FunctionUnit& fn);

  /// Resolves a call made from `caller_file`. A definition in the same file
  /// wins; otherwise the first definition in (file, function) order.
  std::optional<FunctionKey> resolve(const std::string& caller_file, const std::string& callee) const;

  /// The callee's profile key for the parameter at `position`, if any.
  std::optional<Criterion> parameter_profile(const std::string& caller_file, const CalleeArg& arg) const;

  std::size_t function_count() const { return params_.size(); }
  /// (caller, callee) edges resolved in-corpus, for inspection.
  std::vector<std::pair<FunctionKey, FunctionKey>> edges(const ProfileSet& profiles) const;

 private:
  std::map<std::string, std::vector<FunctionKey>> by_name_;
  std::map<FunctionKey, std::vector<std::string>> params_;
};

struct FinalPassResult {
  ProfileSet profiles;
  CallGraph call_graph;
};

/// Builds the call graph over all units and merges direct pointer aliases:
/// every pointer reaching x through a chain of `p = &x` / `p = q`
/// assignments contributes its use lines to x. Lines only ever grow.
FinalPassResult final_pass(ProfileSet profiles, const std::vector<const SourceUnit*>& units);

struct CompleteSlice {
  Criterion criterion;
  /// Lines in the criterion's own function, none before its first def.
  std::set<int> lines;
  /// Lines reached in other functions through callee parameters.
  std::set<std::pair<std::string, int>> interprocedural_lines;
  int contributing_profiles = 0;
  std::set<std::string> unique_identifiers;

  std::size_t statement_count() const { return lines.size() + interprocedural_lines.size(); }
  friend bool operator==(const CompleteSlice&, const CompleteSlice&) = default;
};

/// Unions def/use lines of the criterion with the slices of its dvars, its
/// aliasing pointers and the parameters it is passed to. Each profile is
/// expanded at most once. Throws NotFoundError when the criterion has no
/// profile.
CompleteSlice compose_complete_slice(const Criterion& criterion, const ProfileSet& profiles,
                                     const CallGraph& call_graph);

}  // namespace srcvul
