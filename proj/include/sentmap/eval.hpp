#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sentmap/core.hpp"
#include "sentmap/endpoint.hpp"
#include "sentmap/skills.hpp"

// Desk-scale experiment harness: runs task suites across map variants
// (baseline ablation, semantic enhancement with and without ownership
// tags) and planner backends (symbolic oracle, recorded-transcript replay,
// live endpoint), scores plans by executing them against the full
// reference world, and renders the outcome tables.

namespace sentmap {

enum class MapVariant { Baseline, Enhanced, EnhancedOwnership };
const char* to_string(MapVariant variant);
std::optional<MapVariant> map_variant_from_string(const std::string& s);

// Clears every object's owner tag; people and their locations stay.
SentMap strip_ownership(const SentMap& map);

// baseline -> strip_semantics, enhanced -> ownership tags removed,
// enhanced+ownership -> the map as given.
SentMap derive_variant(const SentMap& reference, MapVariant variant);

enum class QueryForm { Direct, Indirect };
const char* to_string(QueryForm form);
std::optional<QueryForm> query_form_from_string(const std::string& s);

enum class PlannerKind { Oracle, Fixture, Live };
const char* to_string(PlannerKind kind);

struct Condition {
  MapVariant variant = MapVariant::Enhanced;
  PlannerKind planner = PlannerKind::Oracle;
  QueryForm form = QueryForm::Direct;
  std::string label;        // row label; defaults per planner kind
  std::string fixture_dir;  // fixture planner: transcript directory
  EndpointConfig endpoint;  // live planner

  bool operator==(const Condition&) const = default;
};

// JSON array of {variant, planner, form, label?, dir?, config?}; relative
// dir/config paths resolve against base_dir. Throws ConfigError.
std::vector<Condition> parse_conditions(const std::string& doc,
                                        const std::string& base_dir);

struct TaskSpec {
  std::string name;
  std::string query_direct;
  std::optional<std::string> query_indirect;
  GoalSpec goal;
  NodeId start;

  bool operator==(const TaskSpec&) const = default;
};

// JSON array of {name, query_direct, query_indirect?, goal, start}.
// Throws ConfigError.
std::vector<TaskSpec> parse_tasks(const std::string& doc);
std::string serialize_tasks(const std::vector<TaskSpec>& tasks);

enum class Outcome { Success, Failure, Refusal, NotApplicable };
const char* to_string(Outcome outcome);
std::optional<Outcome> outcome_from_string(const std::string& s);
const char* outcome_mark(Outcome outcome);  // ✓ ✗ ∅ –

struct ConditionLabel {
  std::string planner;
  std::string variant;
  std::string form;

  bool operator==(const ConditionLabel&) const = default;

  std::string key() const { return planner + "|" + variant + "|" + form; }
};

struct EvalCell {
  std::string condition;  // ConditionLabel::key()
  std::string task;
  Outcome outcome = Outcome::Failure;
  std::string detail;

  bool operator==(const EvalCell&) const = default;
};

struct EvalReport {
  std::vector<ConditionLabel> conditions;  // row order
  std::vector<std::string> tasks;          // column order
  std::vector<EvalCell> cells;

  bool operator==(const EvalReport&) const = default;

  const EvalCell* find(const std::string& condition_key,
                       const std::string& task) const;
  // (successes, applicable cells) for one row; averages always derive
  // from cells, never from stored numbers
  std::pair<int, int> tally(const std::string& condition_key) const;
};

// "66.7%" style with one decimal from exact integer arithmetic; "-" when
// nothing is applicable.
std::string format_average(int successes, int applicable);

// The bundled desk-scale environment: 9 semantic nodes over office,
// lounge and kitchen zones joined by a hallway, 23 objects, a sponge by
// the kitchen sink, coffee powder on an office tray, one tissue box among
// three tables, two items tagged as Bob's, and people Bob and Alice.
SentMap reference_environment();

// Canonical endpoint parameters used when recording and replaying fixture
// transcripts for `label`; requests must be built identically on both
// sides or replay hash checks fail.
EndpointConfig fixture_endpoint_config(const std::string& label);

// Deterministic transcript file stem for one eval cell, e.g.
// "get_sponge__baseline__direct".
std::string task_slug(const std::string& name);
std::string transcript_stem(const TaskSpec& task, const Condition& condition);

// Runs every (condition, task) cell: derives the map variant, plans with
// the condition's backend, executes the plan against the full reference
// map, and scores the goal. Refusals are first-class outcomes; indirect
// queries under the oracle are not applicable. Throws ConfigError when a
// referenced fixture transcript is missing.
EvalReport run_suite(const std::vector<TaskSpec>& tasks,
                     const std::vector<Condition>& conditions,
                     const SentMap& reference);

enum class ReportFormat { Markdown, Json };

// Markdown: one row per condition with ✓/✗/∅/– cells and an exact average
// column. Json: full report document; report_from_json round-trips it.
std::string render_report(const EvalReport& report, ReportFormat format);
EvalReport report_from_json(const std::string& doc);  // throws ConfigError

}  // namespace sentmap
