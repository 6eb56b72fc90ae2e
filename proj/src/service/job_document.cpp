#include "hrt/service/job_document.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace hrt::service {

using nlohmann::json;

namespace {

class Reader {
public:
    std::vector<std::string> problems;

    void fail(const std::string& path, const std::string& message) { problems.push_back(path + ": " + message); }

    const json* object(const json& parent, const std::string& key, const std::string& path, bool required) {
        if (!parent.contains(key)) {
            if (required) {
                fail(path, "missing field '" + key + "'");
            }
            return nullptr;
        }
        return &parent.at(key);
    }

    std::optional<std::string> string(const json& parent, const std::string& key, const std::string& path,
                                      bool required) {
        const json* v = object(parent, key, path, required);
        if (!v) {
            return std::nullopt;
        }
        if (!v->is_string()) {
            fail(path + "." + key, "expected a string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    std::optional<double> number(const json& value, const std::string& path) {
        if (!value.is_number()) {
            fail(path, "expected a number");
            return std::nullopt;
        }
        return value.get<double>();
    }

    std::optional<cost::Vec3> vec3(const json& value, const std::string& path) {
        if (!value.is_array() || value.size() != 3 || !value[0].is_number() || !value[1].is_number() ||
            !value[2].is_number()) {
            fail(path, "expected [x, y, z] in metres");
            return std::nullopt;
        }
        return cost::Vec3{value[0].get<double>(), value[1].get<double>(), value[2].get<double>()};
    }

    std::map<std::string, double> number_map(const json& value, const std::string& path) {
        std::map<std::string, double> out;
        if (!value.is_object()) {
            fail(path, "expected an object of numbers");
            return out;
        }
        for (const auto& [k, v] : value.items()) {
            if (auto n = number(v, path + "." + k)) {
                out[k] = *n;
            }
        }
        return out;
    }

    std::map<std::string, cost::Vec3> position_map(const json& value, const std::string& path) {
        std::map<std::string, cost::Vec3> out;
        if (!value.is_object()) {
            fail(path, "expected an object of positions");
            return out;
        }
        for (const auto& [k, v] : value.items()) {
            if (auto p = vec3(v, path + "." + k)) {
                out[k] = *p;
            }
        }
        return out;
    }

    std::optional<plan::PlanItem> structure(const json& value, const std::string& path) {
        if (value.is_string()) {
            return plan::PlanItem{value.get<std::string>()};
        }
        if (!value.is_object()) {
            fail(path, "expected an action id or a {\"sequence\"|\"parallel\": [...]} group");
            return std::nullopt;
        }
        const bool seq = value.contains("sequence");
        const bool par = value.contains("parallel");
        if (seq == par) {
            fail(path, "group needs exactly one of 'sequence' or 'parallel'");
            return std::nullopt;
        }
        plan::PlanGroup group;
        group.kind = seq ? plan::PlanGroup::Kind::Sequence : plan::PlanGroup::Kind::Parallel;
        const std::string key = seq ? "sequence" : "parallel";
        const json& children = value.at(key);
        if (!children.is_array()) {
            fail(path + "." + key, "expected an array");
            return std::nullopt;
        }
        for (std::size_t i = 0; i < children.size(); ++i) {
            if (auto child = structure(children[i], path + "." + key + "[" + std::to_string(i) + "]")) {
                group.children.push_back(std::move(*child));
            }
        }
        if (value.contains("threshold")) {
            const json& t = value.at("threshold");
            if (!t.is_number_integer() || t.get<long long>() < 1) {
                fail(path + ".threshold", "expected a positive integer");
            } else {
                group.threshold = t.get<std::size_t>();
            }
        }
        for (const auto& [k, v] : value.items()) {
            if (k != "sequence" && k != "parallel" && k != "threshold") {
                fail(path + "." + k, "unknown field");
            }
        }
        return plan::PlanItem{std::move(group)};
    }
};

const std::set<std::string> kTopFields = {"name", "workers", "actions", "structure", "collaborative_actions", "cost",
                                          "positions", "variant"};
const std::set<std::string> kActionFields = {"id",         "label",    "collaborative", "durations", "init_costs",
                                             "position",   "instruction", "primitives"};

}  // namespace

JobDocument parse_job(const json& doc) {
    Reader r;
    JobDocument out;
    if (!doc.is_object() || doc.empty()) {
        throw plan::JobError({"document: expected a non-empty JSON object"});
    }
    for (const auto& [k, v] : doc.items()) {
        if (!kTopFields.count(k)) {
            r.fail(k, "unknown field");
        }
    }
    out.plan.name = r.string(doc, "name", "document", false).value_or("job");

    if (const json* workers = r.object(doc, "workers", "document", true)) {
        if (!workers->is_array()) {
            r.fail("workers", "expected an array");
        } else {
            for (std::size_t i = 0; i < workers->size(); ++i) {
                const std::string path = "workers[" + std::to_string(i) + "]";
                const json& w = (*workers)[i];
                if (!w.is_object()) {
                    r.fail(path, "expected an object");
                    continue;
                }
                plan::WorkerSpec spec;
                spec.id = r.string(w, "id", path, true).value_or("");
                const auto type = r.string(w, "type", path, true).value_or("robot");
                if (type == "human") {
                    spec.type = plan::WorkerType::Human;
                } else if (type != "robot") {
                    r.fail(path + ".type", "expected 'human' or 'robot', got '" + type + "'");
                }
                if (w.contains("console")) {
                    if (!w.at("console").is_boolean()) {
                        r.fail(path + ".console", "expected a boolean");
                    } else {
                        spec.console = w.at("console").get<bool>();
                    }
                }
                out.plan.workers.push_back(spec);
            }
        }
    }

    std::set<std::string> collaborative;
    if (const json* list = r.object(doc, "collaborative_actions", "document", false)) {
        if (!list->is_array()) {
            r.fail("collaborative_actions", "expected an array of action ids");
        } else {
            for (const auto& a : *list) {
                if (a.is_string()) {
                    collaborative.insert(a.get<std::string>());
                } else {
                    r.fail("collaborative_actions", "expected an array of action ids");
                }
            }
        }
    }

    if (const json* actions = r.object(doc, "actions", "document", true)) {
        if (!actions->is_array()) {
            r.fail("actions", "expected an array");
        } else {
            for (std::size_t i = 0; i < actions->size(); ++i) {
                const json& a = (*actions)[i];
                std::string path = "actions[" + std::to_string(i) + "]";
                if (!a.is_object()) {
                    r.fail(path, "expected an object");
                    continue;
                }
                plan::ActionSpec spec;
                spec.id = r.string(a, "id", path, true).value_or("");
                if (!spec.id.empty()) {
                    path = "actions[" + spec.id + "]";
                }
                for (const auto& [k, v] : a.items()) {
                    if (!kActionFields.count(k)) {
                        r.fail(path + "." + k, "unknown field");
                    }
                }
                spec.label = r.string(a, "label", path, false).value_or(spec.id);
                if (a.contains("collaborative")) {
                    if (!a.at("collaborative").is_boolean()) {
                        r.fail(path + ".collaborative", "expected a boolean");
                    } else {
                        spec.collaborative = a.at("collaborative").get<bool>();
                    }
                }
                spec.collaborative = spec.collaborative || collaborative.count(spec.id) > 0;
                if (const json* d = r.object(a, "durations", path, true)) {
                    spec.durations = r.number_map(*d, path + ".durations");
                }
                if (a.contains("init_costs")) {
                    spec.init_costs = r.number_map(a.at("init_costs"), path + ".init_costs");
                }
                if (a.contains("position")) {
                    spec.position = r.vec3(a.at("position"), path + ".position");
                }
                if (a.contains("instruction")) {
                    const json& ins = a.at("instruction");
                    if (!ins.is_object()) {
                        r.fail(path + ".instruction", "expected {\"kind\": ..., \"text\": ...}");
                    } else {
                        spec.instruction_kind = r.string(ins, "kind", path + ".instruction", false).value_or("");
                        spec.instruction = r.string(ins, "text", path + ".instruction", false).value_or("");
                    }
                }
                if (a.contains("primitives")) {
                    const json& prims = a.at("primitives");
                    if (!prims.is_array()) {
                        r.fail(path + ".primitives", "expected an array of primitive names");
                    } else {
                        for (std::size_t k = 0; k < prims.size(); ++k) {
                            const std::string ppath = path + ".primitives[" + std::to_string(k) + "]";
                            auto kind = prims[k].is_string() ? plan::parse_primitive(prims[k].get<std::string>())
                                                             : std::nullopt;
                            if (!kind) {
                                r.fail(ppath, "expected one of MOVE, GRASP, RELEASE, SWITCH_CONTROLLER, WAIT");
                            } else {
                                spec.robot_primitives.push_back(*kind);
                            }
                        }
                    }
                }
                out.plan.actions.push_back(std::move(spec));
            }
        }
    }
    for (const auto& id : collaborative) {
        bool known = false;
        for (const auto& a : out.plan.actions) {
            known = known || a.id == id;
        }
        if (!known) {
            r.fail("collaborative_actions", "unknown action '" + id + "'");
        }
    }

    if (const json* s = r.object(doc, "structure", "document", true)) {
        if (auto item = r.structure(*s, "structure")) {
            out.plan.structure = std::move(*item);
        }
    }

    if (const json* c = r.object(doc, "cost", "document", false)) {
        if (!c->is_object()) {
            r.fail("cost", "expected an object");
        } else {
            for (const auto& [k, v] : c->items()) {
                const std::string path = "cost." + k;
                if (k == "metric") {
                    auto m = v.is_string() ? nodes::parse_metric(v.get<std::string>()) : std::nullopt;
                    if (!m) {
                        r.fail(path, "expected 'duration' or 'distance'");
                    } else {
                        out.cost.metric = *m;
                    }
                } else if (k == "availability") {
                    const std::string mode = v.is_string() ? v.get<std::string>() : "";
                    if (mode == "binary") {
                        out.cost.availability = cost::AvailabilityMode::Binary;
                    } else if (mode == "remaining_time") {
                        out.cost.availability = cost::AvailabilityMode::RemainingTime;
                    } else {
                        r.fail(path, "expected 'binary' or 'remaining_time'");
                    }
                } else if (k == "beta" || k == "gamma" || k == "epsilon") {
                    if (auto n = r.number(v, path)) {
                        if (!(*n > 0.0)) {
                            r.fail(path, "must be > 0");
                        }
                        (k == "beta" ? out.cost.distance.beta
                                     : k == "gamma" ? out.cost.distance.gamma : out.cost.distance.epsilon) = *n;
                    }
                } else if (k == "counting") {
                    auto rule = v.is_string() ? alloc::parse_counting_rule(v.get<std::string>()) : std::nullopt;
                    if (!rule) {
                        r.fail(path, "expected 'epsilon' or 'scaled'");
                    } else {
                        out.cost.counting = *rule;
                    }
                } else if (k == "alpha") {
                    out.cost.alpha = r.number_map(v, path);
                } else if (k == "psi") {
                    out.cost.psi = r.number_map(v, path);
                } else {
                    r.fail(path, "unknown field");
                }
            }
        }
    }

    if (const json* p = r.object(doc, "positions", "document", false)) {
        if (!p->is_object()) {
            r.fail("positions", "expected an object");
        } else {
            for (const auto& [k, v] : p->items()) {
                if (k == "humans") {
                    out.cost.human_positions = r.position_map(v, "positions.humans");
                } else if (k == "robots") {
                    out.cost.robot_positions = r.position_map(v, "positions.robots");
                } else {
                    r.fail("positions." + k, "unknown field");
                }
            }
        }
    }

    if (auto v = r.string(doc, "variant", "document", false)) {
        out.variant = nodes::parse_variant(*v);
        if (!out.variant) {
            r.fail("variant", "expected collab-mt, coop-mt or coop-st");
        }
    }

    if (r.problems.empty()) {
        for (auto& p : out.plan.problems()) {
            r.problems.push_back(std::move(p));
        }
        auto known = [&](const std::string& id, plan::WorkerType type) {
            for (const auto& w : out.plan.workers) {
                if (w.id == id) {
                    return w.type == type;
                }
            }
            return false;
        };
        for (const auto& [id, pos] : out.cost.human_positions) {
            if (!known(id, plan::WorkerType::Human)) {
                r.fail("positions.humans." + id, "not a human worker of the roster");
            }
        }
        for (const auto& [id, pos] : out.cost.robot_positions) {
            if (!known(id, plan::WorkerType::Robot)) {
                r.fail("positions.robots." + id, "not a robot worker of the roster");
            }
        }
        for (const auto& [id, value] : out.cost.alpha) {
            if (!out.plan.worker_index(id)) {
                r.fail("cost.alpha." + id, "unknown worker");
            }
        }
        for (const auto& [id, value] : out.cost.psi) {
            if (!plan::canonical_candidate(out.plan.workers, id)) {
                r.fail("cost.psi." + id, "unknown worker or candidate");
            }
        }
    }
    if (!r.problems.empty()) {
        throw plan::JobError(std::move(r.problems));
    }
    return out;
}

JobDocument parse_job_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& ex) {
        throw plan::JobError({std::string("document: not valid JSON (") + ex.what() + ")"});
    }
    return parse_job(doc);
}

JobDocument load_job(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open job file '" + path.string() + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_job_text(buffer.str());
}

namespace {

json structure_json(const plan::PlanItem& item) {
    if (const auto* id = std::get_if<std::string>(&item)) {
        return *id;
    }
    const auto& g = std::get<plan::PlanGroup>(item);
    json children = json::array();
    for (const auto& c : g.children) {
        children.push_back(structure_json(c));
    }
    json out{{g.kind == plan::PlanGroup::Kind::Sequence ? "sequence" : "parallel", children}};
    if (g.threshold) {
        out["threshold"] = *g.threshold;
    }
    return out;
}

json vec(const cost::Vec3& v) { return json::array({v.x, v.y, v.z}); }

}  // namespace

json to_json(const JobDocument& job) {
    json workers = json::array();
    for (const auto& w : job.plan.workers) {
        workers.push_back({{"id", w.id}, {"type", plan::to_string(w.type)}, {"console", w.console}});
    }
    json actions = json::array();
    for (const auto& a : job.plan.actions) {
        json entry{{"id", a.id}, {"label", a.label}, {"collaborative", a.collaborative}, {"durations", a.durations}};
        if (!a.init_costs.empty()) {
            entry["init_costs"] = a.init_costs;
        }
        if (a.position) {
            entry["position"] = vec(*a.position);
        }
        if (!a.instruction.empty() || !a.instruction_kind.empty()) {
            entry["instruction"] = {{"kind", a.instruction_kind}, {"text", a.instruction}};
        }
        if (!a.robot_primitives.empty()) {
            json prims = json::array();
            for (auto p : a.robot_primitives) {
                prims.push_back(plan::to_string(p));
            }
            entry["primitives"] = prims;
        }
        actions.push_back(entry);
    }
    json cost{{"metric", nodes::to_string(job.cost.metric)},
              {"availability",
               job.cost.availability == cost::AvailabilityMode::Binary ? "binary" : "remaining_time"},
              {"beta", job.cost.distance.beta},
              {"gamma", job.cost.distance.gamma},
              {"epsilon", job.cost.distance.epsilon},
              {"counting", alloc::to_string(job.cost.counting)}};
    if (!job.cost.alpha.empty()) {
        cost["alpha"] = job.cost.alpha;
    }
    if (!job.cost.psi.empty()) {
        cost["psi"] = job.cost.psi;
    }
    json out{{"name", job.plan.name},
             {"workers", workers},
             {"actions", actions},
             {"structure", structure_json(job.plan.structure)},
             {"cost", cost}};
    if (!job.cost.human_positions.empty() || !job.cost.robot_positions.empty()) {
        json humans = json::object();
        for (const auto& [k, v] : job.cost.human_positions) {
            humans[k] = vec(v);
        }
        json robots = json::object();
        for (const auto& [k, v] : job.cost.robot_positions) {
            robots[k] = vec(v);
        }
        out["positions"] = {{"humans", humans}, {"robots", robots}};
    }
    if (job.variant) {
        out["variant"] = nodes::to_string(*job.variant);
    }
    return out;
}

}  // namespace hrt::service
