#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sentmap/core.hpp"
#include "sentmap/endpoint.hpp"
#include "sentmap/skills.hpp"
#include "sentmap/world_sim.hpp"

// The planning stage: prompt assembly from scene + skill API + constraints
// + query, reply parsing with a validate-and-repair loop, and a symbolic
// oracle planner that supplies ground truth once the goal is fixed.

namespace sentmap {

struct PlannerPrompt {
  std::string scene;             // canonical Scene JSON, byte-exact
  std::string skill_api_text;
  std::string constraints_text;
  std::string query;

  bool operator==(const PlannerPrompt&) const = default;
};

// Throws EmptyQuery. The scene section equals serialize_map(map) so golden
// prompts stay byte-stable.
PlannerPrompt assemble_prompt(const SentMap& map, const SkillApi& api,
                              const std::string& query);

// Fixed system instruction sent with every planning request.
std::string planner_system_text();

// Deterministic user-message text: Scene / Skill API / Robot constraints /
// Task sections in that order.
std::string render_prompt(const PlannerPrompt& prompt);

// Extracts the first JSON array of {"skill", "args"} steps from a model
// reply (fenced or bare, prose tolerated and kept as rationale) and
// validates names and arity against the API.
// Throws NoPlanFound, UnknownSkill, ArityMismatch.
Plan parse_plan(const std::string& reply, const SkillApi& api);

// Canonical fenced block; parse_plan(render_plan(p)) == p on steps.
std::string render_plan(const Plan& plan);

// Returns a rejection message, or nullopt when the plan is acceptable.
using PlanChecker =
    std::function<std::optional<std::string>(const Plan&)>;

// Full-simulation checker: run the plan in world_sim from start.
PlanChecker make_plan_checker(const SentMap& map, const NodeId& start,
                              const SkillApi& api);

// Shape-only check: skill names, arity, and goto targets against the map's
// node set. This is all a semantically-stripped map can support — object
// and entity references cannot be checked against a map that lacks them.
std::optional<std::string> structural_plan_check(const SentMap& map,
                                                 const SkillApi& api,
                                                 const Plan& plan);
PlanChecker make_structural_checker(const SentMap& map, const SkillApi& api);

struct PlanningResult {
  Plan plan;
  Transcript transcript;
};

class PlanRejected : public Error {
 public:
  PlanRejected(std::string last_error, Transcript transcript);
  const std::string& last_error() const { return last_error_; }
  const Transcript& transcript() const { return transcript_; }

 private:
  std::string last_error_;
  Transcript transcript_;
};

class ModelRefusal : public Error {
 public:
  ModelRefusal(std::string raw, Transcript transcript);
  const std::string& raw() const { return raw_; }
  const Transcript& transcript() const { return transcript_; }

 private:
  std::string raw_;
  Transcript transcript_;
};

// Heuristic: a plan-free reply that reads as declining to answer.
bool looks_like_refusal(const std::string& reply);

inline constexpr int kDefaultRepairBudget = 2;

// Sends the prompt, parses the reply against the API, checks the plan; on
// rejection, re-prompts with the checker's message appended, up to
// repair_budget extra rounds. Never returns an unchecked plan.
// Throws TransportError, ModelRefusal, PlanRejected.
PlanningResult plan_with_endpoint(const PlannerPrompt& prompt,
                                  ChatEndpoint& endpoint,
                                  const EndpointConfig& config,
                                  const SkillApi& api,
                                  const PlanChecker& checker,
                                  int repair_budget = kDefaultRepairBudget);

class AmbiguousTargetError : public Error {
 public:
  explicit AmbiguousTargetError(std::vector<FoundObject> candidates);
  const std::vector<FoundObject>& candidates() const { return candidates_; }

 private:
  std::vector<FoundObject> candidates_;
};

// Deterministic symbolic planner: resolves the goal's object query against
// the map, walks shortest paths, opens closed containers before picking
// or placing and re-closes them after. Multiple matches are an error
// unless the query pinned an owner, in which case every match is
// delivered in turn. The returned plan always verifies in world_sim.
// Throws TargetNotFound, AmbiguousTargetError, Unreachable,
// UnresolvableGoal, EmptyQuery.
Plan oracle_plan(const SentMap& map, const GoalSpec& goal,
                 const NodeId& start, const SkillApi& api);

}  // namespace sentmap
