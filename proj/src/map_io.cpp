#include "sentmap/map_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

using nlohmann::json;

namespace sentmap {

namespace {

std::string idx_path(const std::string& base, size_t i) {
  return base + "/" + std::to_string(i);
}

// Walks a parsed document, building the map and collecting issues. Paths
// are JSON pointers into the document as given.
struct SceneLoader {
  ValidationReport report;

  void error(const std::string& path, const std::string& msg) {
    report.issues.push_back({Severity::Error, path, msg});
  }
  void warn(const std::string& path, const std::string& msg) {
    report.issues.push_back({Severity::Warning, path, msg});
  }

  bool expect(const json& v, json::value_t type, const std::string& path,
              const char* what) {
    if (v.type() == type) return true;
    error(path, std::string("expected ") + what);
    return false;
  }

  std::optional<std::string> req_string(const json& obj, const char* key,
                                        const std::string& path) {
    if (!obj.contains(key)) {
      error(path, std::string("missing required field '") + key + "'");
      return std::nullopt;
    }
    if (!obj.at(key).is_string()) {
      error(path + "/" + key, "expected string");
      return std::nullopt;
    }
    return obj.at(key).get<std::string>();
  }

  std::optional<std::string> opt_string(const json& obj, const char* key,
                                        const std::string& path) {
    if (!obj.contains(key)) return std::nullopt;
    if (!obj.at(key).is_string()) {
      error(path + "/" + key, "expected string");
      return std::nullopt;
    }
    return obj.at(key).get<std::string>();
  }

  // Loads the explicit "attributes" object plus any keys outside `known`,
  // which are preserved as strings (non-string values keep their compact
  // JSON text).
  Attributes collect_attributes(const json& obj,
                                const std::set<std::string>& known,
                                const std::string& path) {
    Attributes attrs;
    if (obj.contains("attributes")) {
      const json& a = obj.at("attributes");
      if (expect(a, json::value_t::object, path + "/attributes", "object")) {
        for (const auto& [k, v] : a.items()) {
          if (!v.is_string()) {
            error(path + "/attributes/" + json_path_escape(k),
                  "attribute values must be strings");
            continue;
          }
          attrs[k] = v.get<std::string>();
        }
      }
    }
    for (const auto& [k, v] : obj.items()) {
      if (known.count(k) || k == "attributes") continue;
      if (attrs.count(k)) {
        error(path + "/" + json_path_escape(k),
              "unknown field conflicts with attributes entry of the same name");
        continue;
      }
      attrs[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    return attrs;
  }

  ObjectItem load_object(const json& j, const std::string& path) {
    ObjectItem obj;
    if (!expect(j, json::value_t::object, path, "object")) return obj;
    obj.name = req_string(j, "name", path).value_or("");
    obj.category = req_string(j, "category", path).value_or("");
    obj.owner = opt_string(j, "owner", path);
    obj.attributes =
        collect_attributes(j, {"name", "category", "owner"}, path);
    return obj;
  }

  Entity load_entity(const json& j, const std::string& path) {
    Entity entity;
    if (!expect(j, json::value_t::object, path, "object")) return entity;
    entity.name = req_string(j, "name", path).value_or("");
    entity.kind = req_string(j, "kind", path).value_or("");
    if (auto state = opt_string(j, "state", path)) {
      auto parsed = entity_state_from_string(*state);
      if (!parsed) {
        error(path + "/state", "state must be \"open\" or \"closed\"");
      } else {
        entity.state = parsed;
      }
    }
    if (j.contains("affordances")) {
      const json& a = j.at("affordances");
      if (expect(a, json::value_t::array, path + "/affordances", "array")) {
        for (size_t i = 0; i < a.size(); ++i) {
          const std::string ap = idx_path(path + "/affordances", i);
          if (!a[i].is_string()) {
            error(ap, "expected string");
            continue;
          }
          auto tag = affordance_from_string(a[i].get<std::string>());
          if (!tag) {
            error(ap, "unknown affordance '" + a[i].get<std::string>() + "'");
            continue;
          }
          entity.affordances.insert(*tag);
        }
      }
    }
    if (j.contains("objects")) {
      const json& objs = j.at("objects");
      if (expect(objs, json::value_t::array, path + "/objects", "array")) {
        std::set<std::string> names;
        for (size_t i = 0; i < objs.size(); ++i) {
          const std::string op = idx_path(path + "/objects", i);
          ObjectItem obj = load_object(objs[i], op);
          if (!obj.name.empty() && !names.insert(obj.name).second) {
            error(op + "/name",
                  "duplicate object name '" + obj.name + "' within entity");
          }
          entity.objects.push_back(std::move(obj));
        }
      }
    }
    entity.attributes = collect_attributes(
        j, {"name", "kind", "state", "affordances", "objects"}, path);
    if (entity.state && (!entity.affordances.count(Affordance::Openable) ||
                         !entity.affordances.count(Affordance::Closable))) {
      error(path + "/state",
            "stateful entity must carry openable and closable affordances");
    }
    return entity;
  }

  SemanticPayload load_payload(const json& j, const std::string& path) {
    SemanticPayload payload;
    if (!expect(j, json::value_t::object, path, "object")) return payload;
    payload.label = req_string(j, "label", path).value_or("");
    payload.description = opt_string(j, "description", path);
    if (j.contains("entities")) {
      const json& ents = j.at("entities");
      if (expect(ents, json::value_t::array, path + "/entities", "array")) {
        std::set<std::string> names;
        for (size_t i = 0; i < ents.size(); ++i) {
          const std::string ep = idx_path(path + "/entities", i);
          Entity entity = load_entity(ents[i], ep);
          if (!entity.name.empty() && !names.insert(entity.name).second) {
            error(ep + "/name",
                  "duplicate entity name '" + entity.name + "' within node");
          }
          payload.entities.push_back(std::move(entity));
        }
      }
    }
    if (payload.entities.empty()) {
      warn(path + "/entities", "semantic payload has no entities");
    }
    payload.attributes =
        collect_attributes(j, {"label", "description", "entities"}, path);
    return payload;
  }

  Person load_person(const json& j, const std::string& path) {
    Person person;
    if (!expect(j, json::value_t::object, path, "object")) return person;
    person.name = req_string(j, "name", path).value_or("");
    person.location = opt_string(j, "location", path);
    person.attributes = collect_attributes(j, {"name", "location"}, path);
    return person;
  }

  SentMap load(const json& doc) {
    SentMap map;
    if (!expect(doc, json::value_t::object, "", "object at document root")) {
      return map;
    }
    if (auto version = req_string(doc, "version", "")) {
      map.version = *version;
      if (*version != "1") {
        error("/version", "unsupported format version '" + *version + "'");
      }
    }
    if (doc.contains("nodes")) {
      const json& nodes = doc.at("nodes");
      if (expect(nodes, json::value_t::object, "/nodes", "object")) {
        for (const auto& [id, jnode] : nodes.items()) {
          const std::string np = "/nodes/" + json_path_escape(id);
          if (!is_valid_node_id(id)) {
            error(np, "node id must be non-empty without whitespace");
          }
          NavNode node;
          node.id = id;
          if (!expect(jnode, json::value_t::object, np, "object")) {
            map.nodes.emplace(id, std::move(node));
            continue;
          }
          node.zone = req_string(jnode, "zone", np).value_or("");
          if (jnode.contains("neighbors")) {
            const json& nbs = jnode.at("neighbors");
            if (expect(nbs, json::value_t::array, np + "/neighbors", "array")) {
              for (size_t i = 0; i < nbs.size(); ++i) {
                if (!nbs[i].is_string()) {
                  error(idx_path(np + "/neighbors", i), "expected string");
                  continue;
                }
                node.neighbors.push_back(nbs[i].get<std::string>());
              }
            }
          }
          if (jnode.contains("semantic")) {
            node.semantic = load_payload(jnode.at("semantic"), np + "/semantic");
          }
          node.attributes = collect_attributes(
              jnode, {"zone", "neighbors", "semantic"}, np);
          map.nodes.emplace(id, std::move(node));
        }
      }
    } else {
      error("", "missing required field 'nodes'");
    }
    if (doc.contains("people")) {
      const json& people = doc.at("people");
      if (expect(people, json::value_t::array, "/people", "array")) {
        std::set<std::string> names;
        for (size_t i = 0; i < people.size(); ++i) {
          const std::string pp = idx_path("/people", i);
          Person person = load_person(people[i], pp);
          if (!person.name.empty() && !names.insert(person.name).second) {
            error(pp + "/name", "duplicate person '" + person.name + "'");
          }
          map.people.push_back(std::move(person));
        }
      }
    }
    map.attributes =
        collect_attributes(doc, {"version", "nodes", "people"}, "");

    cross_checks(map);
    return map;
  }

  // Checks that need the whole map: edge closure, ownership and location
  // resolution, reachability, object-name collisions.
  void cross_checks(const SentMap& map) {
    for (const auto& [id, node] : map.nodes) {
      const std::string np = "/nodes/" + json_path_escape(id);
      for (size_t i = 0; i < node.neighbors.size(); ++i) {
        const std::string ep = idx_path(np + "/neighbors", i);
        if (node.neighbors[i] == id) {
          error(ep, "self-loop edge");
        } else if (!map.has_node(node.neighbors[i])) {
          error(ep, "edge to missing node '" + node.neighbors[i] + "'");
        }
      }
    }

    std::map<std::string, std::string> object_paths;
    for (const auto& [id, node] : map.nodes) {
      if (!node.semantic) continue;
      const std::string np = "/nodes/" + json_path_escape(id);
      for (size_t ei = 0; ei < node.semantic->entities.size(); ++ei) {
        const Entity& entity = node.semantic->entities[ei];
        const std::string ep = idx_path(np + "/semantic/entities", ei);
        for (size_t oi = 0; oi < entity.objects.size(); ++oi) {
          const ObjectItem& obj = entity.objects[oi];
          const std::string op = idx_path(ep + "/objects", oi);
          if (obj.owner && !map.find_person(*obj.owner)) {
            error(op + "/owner",
                  "owner '" + *obj.owner + "' is not a declared person");
          }
          if (obj.name.empty()) continue;
          auto [it, inserted] = object_paths.emplace(obj.name, op);
          if (!inserted && it->second != op) {
            warn(op + "/name", "object name '" + obj.name +
                                   "' also used at " + it->second);
          }
        }
      }
    }

    for (size_t i = 0; i < map.people.size(); ++i) {
      const Person& person = map.people[i];
      if (person.location && !map.has_node(*person.location)) {
        error(idx_path("/people", i) + "/location",
              "location '" + *person.location + "' is not a node");
      }
    }

    // A node no other node can reach is almost always a trace or edit
    // mistake; flag it unless the map has a single node.
    if (map.nodes.size() > 1) {
      std::set<NodeId> reached;
      for (const auto& [start, node] : map.nodes) {
        std::deque<NodeId> frontier{start};
        std::set<NodeId> seen{start};
        while (!frontier.empty()) {
          NodeId v = frontier.front();
          frontier.pop_front();
          auto it = map.nodes.find(v);
          if (it == map.nodes.end()) continue;
          for (const auto& nb : it->second.neighbors) {
            if (nb != start && seen.insert(nb).second) {
              reached.insert(nb);
              frontier.push_back(nb);
            }
          }
        }
      }
      for (const auto& [id, node] : map.nodes) {
        if (!reached.count(id)) {
          warn("/nodes/" + json_path_escape(id),
               "unreachable: no other node has a path to '" + id + "'");
        }
      }
    }
  }
};

json attributes_to_json(const Attributes& attrs) {
  json out = json::object();
  for (const auto& [k, v] : attrs) out[k] = v;
  return out;
}

json object_to_json(const ObjectItem& obj) {
  json j;
  j["name"] = obj.name;
  j["category"] = obj.category;
  if (obj.owner) j["owner"] = *obj.owner;
  if (!obj.attributes.empty()) j["attributes"] = attributes_to_json(obj.attributes);
  return j;
}

json entity_to_json(const Entity& entity) {
  json j;
  j["name"] = entity.name;
  j["kind"] = entity.kind;
  if (entity.state) j["state"] = to_string(*entity.state);
  json affs = json::array();
  for (Affordance a : entity.affordances) affs.push_back(to_string(a));
  j["affordances"] = std::move(affs);
  json objs = json::array();
  for (const auto& obj : entity.objects) objs.push_back(object_to_json(obj));
  j["objects"] = std::move(objs);
  if (!entity.attributes.empty()) {
    j["attributes"] = attributes_to_json(entity.attributes);
  }
  return j;
}

json payload_to_json(const SemanticPayload& payload) {
  json js;
  js["label"] = payload.label;
  if (payload.description) js["description"] = *payload.description;
  json ents = json::array();
  for (const auto& entity : payload.entities) {
    ents.push_back(entity_to_json(entity));
  }
  js["entities"] = std::move(ents);
  if (!payload.attributes.empty()) {
    js["attributes"] = attributes_to_json(payload.attributes);
  }
  return js;
}

json map_to_json(const SentMap& map) {
  json j;
  j["version"] = map.version;
  json nodes = json::object();
  for (const auto& [id, node] : map.nodes) {
    json jn;
    jn["zone"] = node.zone;
    jn["neighbors"] = node.neighbors;
    if (node.semantic) {
      jn["semantic"] = payload_to_json(*node.semantic);
    }
    if (!node.attributes.empty()) {
      jn["attributes"] = attributes_to_json(node.attributes);
    }
    nodes[id] = std::move(jn);
  }
  j["nodes"] = std::move(nodes);
  json people = json::array();
  for (const auto& person : map.people) {
    json jp;
    jp["name"] = person.name;
    if (person.location) jp["location"] = *person.location;
    if (!person.attributes.empty()) {
      jp["attributes"] = attributes_to_json(person.attributes);
    }
    people.push_back(std::move(jp));
  }
  j["people"] = std::move(people);
  if (!map.attributes.empty()) {
    j["attributes"] = attributes_to_json(map.attributes);
  }
  return j;
}

}  // namespace

std::string json_path_escape(const std::string& token) {
  std::string out;
  out.reserve(token.size());
  for (char c : token) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

size_t ValidationReport::error_count() const {
  return std::count_if(issues.begin(), issues.end(), [](const Issue& i) {
    return i.severity == Severity::Error;
  });
}

size_t ValidationReport::warning_count() const {
  return issues.size() - error_count();
}

std::string ValidationReport::to_text() const {
  std::ostringstream os;
  for (const auto& issue : issues) {
    os << (issue.severity == Severity::Error ? "error" : "warning") << " at "
       << (issue.path.empty() ? "<document>" : issue.path) << ": "
       << issue.message << "\n";
  }
  os << error_count() << " errors, " << warning_count() << " warnings\n";
  return os.str();
}

std::string ValidationReport::to_json() const {
  json out;
  json items = json::array();
  for (const auto& issue : issues) {
    json ji;
    ji["severity"] = issue.severity == Severity::Error ? "error" : "warning";
    ji["path"] = issue.path;
    ji["message"] = issue.message;
    items.push_back(std::move(ji));
  }
  out["issues"] = std::move(items);
  out["errors"] = error_count();
  out["warnings"] = warning_count();
  return out.dump(2) + "\n";
}

namespace {
std::string first_error_summary(const ValidationReport& report) {
  for (const auto& issue : report.issues) {
    if (issue.severity == Severity::Error) {
      return (issue.path.empty() ? std::string("<document>") : issue.path) +
             ": " + issue.message;
    }
  }
  return "invalid document";
}
}  // namespace

SchemaViolation::SchemaViolation(ValidationReport report)
    : Error(ErrKind::SchemaViolation, first_error_summary(report)),
      report_(std::move(report)) {}

SentMap parse_map(const std::string& doc) {
  json parsed;
  try {
    parsed = json::parse(doc);
  } catch (const json::parse_error& e) {
    throw Error(ErrKind::MalformedJson,
                "byte " + std::to_string(e.byte) + ": " + e.what());
  }
  SceneLoader loader;
  SentMap map = loader.load(parsed);
  if (loader.report.error_count() > 0) {
    throw SchemaViolation(std::move(loader.report));
  }
  return map;
}

std::string serialize_map(const SentMap& map) {
  return map_to_json(map).dump(2) + "\n";
}

ValidationReport validate_map(const std::string& doc) {
  json parsed;
  try {
    parsed = json::parse(doc);
  } catch (const json::parse_error& e) {
    ValidationReport report;
    report.issues.push_back(
        {Severity::Error, "",
         "malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what()});
    return report;
  }
  SceneLoader loader;
  loader.load(parsed);
  return loader.report;
}

SemanticPayload parse_payload(const std::string& doc) {
  json parsed;
  try {
    parsed = json::parse(doc);
  } catch (const json::parse_error& e) {
    throw Error(ErrKind::MalformedJson,
                "byte " + std::to_string(e.byte) + ": " + e.what());
  }
  SceneLoader loader;
  SemanticPayload payload = loader.load_payload(parsed, "");
  if (loader.report.error_count() > 0) {
    throw SchemaViolation(std::move(loader.report));
  }
  return payload;
}

std::string serialize_payload(const SemanticPayload& payload) {
  return payload_to_json(payload).dump(2) + "\n";
}

const char* to_string(EditOp op) {
  switch (op) {
    case EditOp::AddObject: return "add-object";
    case EditOp::RemoveObject: return "remove-object";
    case EditOp::SetOwner: return "set-owner";
    case EditOp::SetEntityState: return "set-entity-state";
    case EditOp::RenameLabel: return "rename-label";
    case EditOp::AddPerson: return "add-person";
    case EditOp::SetPersonLocation: return "set-person-location";
    case EditOp::SetDescription: return "set-description";
  }
  return "?";
}

namespace {

std::optional<EditOp> edit_op_from_string(const std::string& s) {
  for (EditOp op : {EditOp::AddObject, EditOp::RemoveObject, EditOp::SetOwner,
                    EditOp::SetEntityState, EditOp::RenameLabel,
                    EditOp::AddPerson, EditOp::SetPersonLocation,
                    EditOp::SetDescription}) {
    if (s == to_string(op)) return op;
  }
  return std::nullopt;
}

NavNode& resolve_node(SentMap& map, const EditCommand& cmd) {
  auto it = map.nodes.find(cmd.node);
  if (it == map.nodes.end()) {
    throw Error(ErrKind::UnknownTarget, "node '" + cmd.node + "'");
  }
  return it->second;
}

Entity& resolve_entity(SentMap& map, const EditCommand& cmd) {
  NavNode& node = resolve_node(map, cmd);
  if (!node.semantic) {
    throw Error(ErrKind::UnknownTarget,
                "node '" + cmd.node + "' has no semantic payload");
  }
  for (auto& entity : node.semantic->entities) {
    if (entity.name == cmd.entity) return entity;
  }
  throw Error(ErrKind::UnknownTarget,
              "entity '" + cmd.entity + "' at node '" + cmd.node + "'");
}

ObjectItem& resolve_object(SentMap& map, const EditCommand& cmd) {
  Entity& entity = resolve_entity(map, cmd);
  for (auto& obj : entity.objects) {
    if (obj.name == cmd.object) return obj;
  }
  throw Error(ErrKind::UnknownTarget, "object '" + cmd.object +
                                          "' in entity '" + cmd.entity +
                                          "' at node '" + cmd.node + "'");
}

class InvariantBroken : public Error {
 public:
  explicit InvariantBroken(const ValidationReport& report)
      : Error(ErrKind::InvariantBroken, first_error_summary(report)) {}
};

json parse_value(const EditCommand& cmd) {
  if (cmd.value.empty()) return json();
  try {
    return json::parse(cmd.value);
  } catch (const json::parse_error& e) {
    throw Error(ErrKind::InvariantBroken,
                std::string("bad value for ") + to_string(cmd.op) + ": " +
                    e.what());
  }
}

std::string value_string(const EditCommand& cmd, const char* what) {
  json v = parse_value(cmd);
  if (!v.is_string()) {
    throw Error(ErrKind::InvariantBroken,
                std::string(to_string(cmd.op)) + " expects a " + what);
  }
  return v.get<std::string>();
}

std::optional<std::string> value_string_or_null(const EditCommand& cmd,
                                                const char* what) {
  json v = parse_value(cmd);
  if (v.is_null()) return std::nullopt;
  if (!v.is_string()) {
    throw Error(ErrKind::InvariantBroken,
                std::string(to_string(cmd.op)) + " expects a " + what +
                    " or null");
  }
  return v.get<std::string>();
}

}  // namespace

SentMap apply_edit(SentMap map, const EditCommand& cmd) {
  switch (cmd.op) {
    case EditOp::AddObject: {
      Entity& entity = resolve_entity(map, cmd);
      json v = parse_value(cmd);
      SceneLoader loader;
      ObjectItem obj = loader.load_object(v, "");
      if (loader.report.error_count() > 0) {
        throw InvariantBroken(loader.report);
      }
      entity.objects.push_back(std::move(obj));
      break;
    }
    case EditOp::RemoveObject: {
      Entity& entity = resolve_entity(map, cmd);
      auto it = std::find_if(entity.objects.begin(), entity.objects.end(),
                             [&](const ObjectItem& o) {
                               return o.name == cmd.object;
                             });
      if (it == entity.objects.end()) {
        throw Error(ErrKind::UnknownTarget, "object '" + cmd.object + "'");
      }
      entity.objects.erase(it);
      break;
    }
    case EditOp::SetOwner: {
      ObjectItem& obj = resolve_object(map, cmd);
      obj.owner = value_string_or_null(cmd, "person name");
      break;
    }
    case EditOp::SetEntityState: {
      Entity& entity = resolve_entity(map, cmd);
      auto state = entity_state_from_string(value_string(cmd, "state"));
      if (!state) {
        throw Error(ErrKind::InvariantBroken,
                    "set-entity-state expects \"open\" or \"closed\"");
      }
      entity.state = state;
      break;
    }
    case EditOp::RenameLabel: {
      NavNode& node = resolve_node(map, cmd);
      if (!node.semantic) {
        throw Error(ErrKind::UnknownTarget,
                    "node '" + cmd.node + "' has no semantic payload");
      }
      node.semantic->label = value_string(cmd, "label");
      break;
    }
    case EditOp::AddPerson: {
      json v = parse_value(cmd);
      Person person;
      if (v.is_string()) {
        person.name = v.get<std::string>();
      } else if (v.is_object()) {
        SceneLoader loader;
        person = loader.load_person(v, "");
        if (loader.report.error_count() > 0) {
          throw InvariantBroken(loader.report);
        }
      } else {
        throw Error(ErrKind::InvariantBroken,
                    "add-person expects a name or a person object");
      }
      map.people.push_back(std::move(person));
      break;
    }
    case EditOp::SetPersonLocation: {
      Person* person = nullptr;
      for (auto& p : map.people) {
        if (p.name == cmd.person) person = &p;
      }
      if (!person) {
        throw Error(ErrKind::UnknownTarget, "person '" + cmd.person + "'");
      }
      person->location = value_string_or_null(cmd, "node id");
      break;
    }
    case EditOp::SetDescription: {
      NavNode& node = resolve_node(map, cmd);
      if (!node.semantic) {
        throw Error(ErrKind::UnknownTarget,
                    "node '" + cmd.node + "' has no semantic payload");
      }
      node.semantic->description = value_string_or_null(cmd, "description");
      break;
    }
  }

  ValidationReport report = validate_map(serialize_map(map));
  if (report.error_count() > 0) throw InvariantBroken(report);
  return map;
}

std::vector<EditCommand> parse_edit_commands(const std::string& doc) {
  json parsed;
  try {
    parsed = json::parse(doc);
  } catch (const json::parse_error& e) {
    throw Error(ErrKind::ConfigError,
                std::string("edits file is not valid JSON: ") + e.what());
  }
  if (!parsed.is_array()) {
    throw Error(ErrKind::ConfigError, "edits file must be a JSON array");
  }
  std::vector<EditCommand> cmds;
  for (size_t i = 0; i < parsed.size(); ++i) {
    const json& j = parsed[i];
    if (!j.is_object() || !j.contains("op") || !j.at("op").is_string()) {
      throw Error(ErrKind::ConfigError,
                  "edit " + std::to_string(i) + " needs an \"op\" string");
    }
    auto op = edit_op_from_string(j.at("op").get<std::string>());
    if (!op) {
      throw Error(ErrKind::ConfigError,
                  "edit " + std::to_string(i) + ": unknown op '" +
                      j.at("op").get<std::string>() + "'");
    }
    EditCommand cmd;
    cmd.op = *op;
    auto grab = [&](const char* key, std::string& into) {
      if (j.contains(key)) {
        if (!j.at(key).is_string()) {
          throw Error(ErrKind::ConfigError, "edit " + std::to_string(i) +
                                                ": \"" + key +
                                                "\" must be a string");
        }
        into = j.at(key).get<std::string>();
      }
    };
    grab("node", cmd.node);
    grab("entity", cmd.entity);
    grab("object", cmd.object);
    grab("person", cmd.person);
    if (j.contains("value")) cmd.value = j.at("value").dump();
    cmds.push_back(std::move(cmd));
  }
  return cmds;
}

std::string serialize_edit_commands(const std::vector<EditCommand>& cmds) {
  json out = json::array();
  for (const auto& cmd : cmds) {
    json j;
    j["op"] = to_string(cmd.op);
    if (!cmd.node.empty()) j["node"] = cmd.node;
    if (!cmd.entity.empty()) j["entity"] = cmd.entity;
    if (!cmd.object.empty()) j["object"] = cmd.object;
    if (!cmd.person.empty()) j["person"] = cmd.person;
    if (!cmd.value.empty()) j["value"] = json::parse(cmd.value);
    out.push_back(std::move(j));
  }
  return out.dump(2) + "\n";
}

}  // namespace sentmap
