// sentmap: build, validate, edit, plan against, simulate, and evaluate
// semantic topological maps from the command line.
//
// Exit codes: 0 success, 1 operation/validation failure, 2 usage error,
// 3 transport failure talking to a remote endpoint.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "sentmap/builder.hpp"
#include "sentmap/core.hpp"
#include "sentmap/endpoint.hpp"
#include "sentmap/eval.hpp"
#include "sentmap/map_io.hpp"
#include "sentmap/planning.hpp"
#include "sentmap/skills.hpp"
#include "sentmap/world_sim.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using namespace sentmap;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrKind::ConfigError, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrKind::ConfigError, "cannot write " + path);
  out << content;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
  } else {
    write_file(out_path, content);
  }
}

int cmd_validate(const std::string& file, bool as_json) {
  ValidationReport report = validate_map(read_file(file));
  std::cout << (as_json ? report.to_json() : report.to_text());
  return report.ok() ? 0 : 1;
}

int cmd_build(const std::string& trace_path, const std::string& fixtures_dir,
              const std::string& endpoint_cfg, const std::string& out_path,
              const std::string& audit_path) {
  WalkthroughTrace trace = parse_trace(read_file(trace_path));

  std::unique_ptr<HttpChatEndpoint> http;
  std::unique_ptr<SceneDescriber> describer;
  if (!fixtures_dir.empty()) {
    describer = std::make_unique<FixtureDescriber>(fixtures_dir);
  } else {
    EndpointConfig config = load_endpoint_config(endpoint_cfg);
    http = std::make_unique<HttpChatEndpoint>(config);
    describer = std::make_unique<RemoteDescriber>(*http, config);
  }

  BuildResult result = build_map(trace, *describer);
  for (const auto& warning : result.warnings) {
    std::cerr << "warning: " << warning << "\n";
  }
  emit(out_path, serialize_map(result.map));

  if (!audit_path.empty()) {
    json audit = json::array();
    for (const auto& dr : result.describer_results) {
      audit.push_back({{"payload", json::parse(serialize_payload(dr.payload))},
                       {"raw", dr.raw}});
    }
    write_file(audit_path, audit.dump(2) + "\n");
  }
  return 0;
}

int cmd_edit(const std::string& file, const std::string& ops_path,
             const std::string& out_path) {
  SentMap map = parse_map(read_file(file));
  auto edits = parse_edit_commands(read_file(ops_path));
  SentMap patched = review_and_patch(std::move(map), edits);
  emit(out_path, serialize_map(patched));
  return 0;
}

int cmd_strip(const std::string& file, const std::string& out_path) {
  emit(out_path, serialize_map(strip_semantics(parse_map(read_file(file)))));
  return 0;
}

int cmd_plan(const std::string& map_path, const std::string& query,
             bool oracle, const std::string& goal_path,
             const std::string& start, const std::string& endpoint_cfg,
             const std::string& out_path, const std::string& transcript_path) {
  SentMap map = parse_map(read_file(map_path));
  SkillApi api = default_skill_api();

  if (oracle) {
    if (goal_path.empty() || start.empty()) {
      std::cerr << "error: --oracle needs --goal and --start\n";
      return 2;
    }
    GoalSpec goal = parse_goal(read_file(goal_path));
    Plan plan = oracle_plan(map, goal, start, api);
    emit(out_path, serialize_plan(plan));
    return 0;
  }

  if (endpoint_cfg.empty()) {
    std::cerr << "error: need either --oracle or --endpoint\n";
    return 2;
  }
  if (query.empty()) {
    std::cerr << "error: --endpoint planning needs --query\n";
    return 2;
  }
  EndpointConfig config = load_endpoint_config(endpoint_cfg);
  HttpChatEndpoint endpoint(config);
  PlannerPrompt prompt = assemble_prompt(map, api, query);
  // with a start node the plan is fully simulated before being accepted;
  // without one only identifiers and arities can be checked
  PlanChecker checker = start.empty()
                            ? make_structural_checker(map, api)
                            : make_plan_checker(map, start, api);
  try {
    PlanningResult result =
        plan_with_endpoint(prompt, endpoint, config, api, checker);
    if (!transcript_path.empty()) {
      save_transcript(result.transcript, transcript_path);
    }
    emit(out_path, serialize_plan(result.plan));
    return 0;
  } catch (const PlanRejected& e) {
    if (!transcript_path.empty()) {
      save_transcript(e.transcript(), transcript_path);
    }
    throw;
  } catch (const ModelRefusal& e) {
    if (!transcript_path.empty()) {
      save_transcript(e.transcript(), transcript_path);
    }
    throw;
  }
}

int cmd_simulate(const std::string& map_path, const std::string& plan_path,
                 const std::string& start, const std::string& trace_path,
                 bool as_json) {
  SentMap map = parse_map(read_file(map_path));
  Plan plan = parse_plan_file(read_file(plan_path));
  VerifyResult result = verify_plan(map, start, plan, default_skill_api());

  if (!trace_path.empty()) {
    std::ostringstream lines;
    for (const auto& outcome : result.trace) {
      lines << outcome.to_json_line() << "\n";
    }
    write_file(trace_path, lines.str());
  }

  if (as_json) {
    json j;
    j["ok"] = result.ok;
    j["steps_executed"] = result.trace.size();
    if (result.ok) {
      j["failed_step"] = nullptr;
      j["error"] = nullptr;
    } else {
      j["failed_step"] = result.failed_step;
      j["error"] = result.error ? result.error->to_text() : "";
    }
    j["robot_at"] = result.final_state.robot_at;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << result.verdict_text() << "\n";
  }
  return result.ok ? 0 : 1;
}

int cmd_eval(const std::string& map_path, const std::string& tasks_path,
             const std::string& conditions_path, const std::string& report_path,
             const std::string& format) {
  SentMap reference = parse_map(read_file(map_path));
  auto tasks = parse_tasks(read_file(tasks_path));
  std::string base_dir = fs::path(conditions_path).parent_path().string();
  auto conditions = parse_conditions(read_file(conditions_path), base_dir);

  EvalReport report = run_suite(tasks, conditions, reference);
  ReportFormat fmt =
      format == "json" ? ReportFormat::Json : ReportFormat::Markdown;
  emit(report_path, render_report(report, fmt));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semantic topological maps: build, edit, plan, simulate, "
               "evaluate"};
  app.require_subcommand(1);

  // map validate/build/edit/strip
  CLI::App* map_cmd = app.add_subcommand("map", "map file operations");
  map_cmd->require_subcommand(1);

  std::string val_file;
  bool val_json = false;
  CLI::App* validate = map_cmd->add_subcommand(
      "validate", "check a map document; exit 0 only when error-free");
  validate->add_option("file", val_file, "map JSON document")->required();
  validate->add_flag("--json", val_json, "machine-readable report");

  std::string build_trace, build_fixtures, build_endpoint, build_out,
      build_audit;
  CLI::App* build = map_cmd->add_subcommand(
      "build", "construct a map from a walkthrough trace");
  build->add_option("--trace", build_trace, "walkthrough trace JSON")
      ->required();
  build->add_option("--fixtures", build_fixtures,
                    "directory of recorded describer payloads");
  build->add_option("--endpoint", build_endpoint,
                    "endpoint config for a remote scene describer");
  build->add_option("--out", build_out, "output map path")->required();
  build->add_option("--audit-out", build_audit,
                    "write raw describer outputs here for review");

  std::string edit_file, edit_ops, edit_out;
  CLI::App* edit = map_cmd->add_subcommand(
      "edit", "apply a batch of edit commands atomically");
  edit->add_option("file", edit_file, "map JSON document")->required();
  edit->add_option("--ops", edit_ops, "edit commands JSON")->required();
  edit->add_option("--out", edit_out, "output map path (default: stdout)");

  std::string strip_file, strip_out;
  CLI::App* strip = map_cmd->add_subcommand(
      "strip", "drop semantic enhancement down to the navigation skeleton");
  strip->add_option("file", strip_file, "map JSON document")->required();
  strip->add_option("--out", strip_out, "output map path (default: stdout)");

  // plan
  std::string plan_map, plan_query, plan_goal, plan_start, plan_endpoint,
      plan_out, plan_transcript;
  bool plan_oracle = false;
  CLI::App* plan = app.add_subcommand(
      "plan", "produce a skill plan with the oracle or a remote model");
  plan->add_option("--map", plan_map, "map JSON document")->required();
  plan->add_option("--query", plan_query, "natural-language task");
  plan->add_flag("--oracle", plan_oracle, "deterministic goal-driven planner");
  plan->add_option("--goal", plan_goal, "goal spec JSON (oracle mode)");
  plan->add_option("--start", plan_start, "robot start node");
  plan->add_option("--endpoint", plan_endpoint, "endpoint config JSON");
  plan->add_option("--out", plan_out, "plan output path (default: stdout)");
  plan->add_option("--transcript-out", plan_transcript,
                   "record the model exchange for later replay");

  // simulate
  std::string sim_map, sim_plan, sim_start, sim_trace;
  bool sim_json = false;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "execute a plan against the map-derived world model");
  simulate->add_option("--map", sim_map, "map JSON document")->required();
  simulate->add_option("--plan", sim_plan, "plan JSON document")->required();
  simulate->add_option("--start", sim_start, "robot start node")->required();
  simulate->add_option("--trace-out", sim_trace,
                       "write per-step outcomes as JSONL");
  simulate->add_flag("--json", sim_json, "machine-readable verdict");

  // eval
  std::string eval_map, eval_tasks, eval_conditions, eval_report;
  std::string eval_format = "markdown";
  CLI::App* eval = app.add_subcommand(
      "eval", "run a task suite across planner/map conditions");
  eval->add_option("--map", eval_map, "reference map JSON")->required();
  eval->add_option("--tasks", eval_tasks, "task suite JSON")->required();
  eval->add_option("--conditions", eval_conditions, "conditions JSON")
      ->required();
  eval->add_option("--report", eval_report,
                   "report output path (default: stdout)");
  eval->add_option("--format", eval_format, "markdown or json")
      ->check(CLI::IsMember({"markdown", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(val_file, val_json);
    if (build->parsed()) {
      if (build_fixtures.empty() == build_endpoint.empty()) {
        std::cerr << "error: map build needs exactly one of --fixtures or "
                     "--endpoint\n";
        return 2;
      }
      return cmd_build(build_trace, build_fixtures, build_endpoint, build_out,
                       build_audit);
    }
    if (edit->parsed()) return cmd_edit(edit_file, edit_ops, edit_out);
    if (strip->parsed()) return cmd_strip(strip_file, strip_out);
    if (plan->parsed()) {
      return cmd_plan(plan_map, plan_query, plan_oracle, plan_goal, plan_start,
                      plan_endpoint, plan_out, plan_transcript);
    }
    if (simulate->parsed()) {
      return cmd_simulate(sim_map, sim_plan, sim_start, sim_trace, sim_json);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_map, eval_tasks, eval_conditions, eval_report,
                      eval_format);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrKind::TransportError ? 3 : 1;
  }
  return 2;
}
