#include "triad/scenario.hpp"

#include "json.hpp"

#include <fstream>
#include <set>

namespace triad {

using nlohmann::json;

const PageElement* Page::find_element(const std::string& name) const {
    for (const auto& el : elements) {
        if (el.name == name) return &el;
    }
    return nullptr;
}

const Page* PageGraph::find(const std::string& id) const {
    auto it = pages.find(id);
    return it == pages.end() ? nullptr : &it->second;
}

const TaskSpec* Scenario::find_task(const std::string& id) const {
    for (const auto& t : tasks) {
        if (t.id == id) return &t;
    }
    return nullptr;
}

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
    throw ScenarioError("scenario " + origin + ": " + what);
}

const json& require(const json& j, const char* field, const std::string& origin) {
    if (!j.contains(field)) fail(origin, std::string("missing required field '") + field + "'");
    return j.at(field);
}

std::string require_string(const json& j, const char* field, const std::string& origin) {
    const json& v = require(j, field, origin);
    if (!v.is_string() || v.get<std::string>().empty())
        fail(origin, std::string("field '") + field + "' must be a non-empty string");
    return v.get<std::string>();
}

ElementKind parse_element_kind(const std::string& s, const std::string& origin) {
    if (s == "button") return ElementKind::button;
    if (s == "link") return ElementKind::link;
    if (s == "input") return ElementKind::input;
    if (s == "text") return ElementKind::text;
    fail(origin, "unknown element kind '" + s + "'");
}

Predicate parse_predicate(const json& j, const std::string& origin) {
    Predicate p;
    const std::string kind = require_string(j, "kind", origin);
    if (kind == "page_visited") {
        p.kind = Predicate::Kind::page_visited;
        p.page = require_string(j, "page", origin);
    } else if (kind == "element_clicked") {
        p.kind = Predicate::Kind::element_clicked;
        p.page = require_string(j, "page", origin);
        p.element = require_string(j, "element", origin);
    } else if (kind == "activity_for") {
        p.kind = Predicate::Kind::activity_for;
        p.page = require_string(j, "page", origin);
        p.element = require_string(j, "element", origin);
        p.seconds = require(j, "seconds", origin).get<Seconds>();
        if (p.seconds <= 0) fail(origin, "predicate field 'seconds' must be > 0");
    } else if (kind == "note_contains") {
        p.kind = Predicate::Kind::note_contains;
        p.text = require_string(j, "text", origin);
    } else if (kind == "extracted") {
        p.kind = Predicate::Kind::extracted;
        p.page = require_string(j, "page", origin);
        p.element = require_string(j, "element", origin);
    } else if (kind == "all_of") {
        p.kind = Predicate::Kind::all_of;
        const json& kids = require(j, "children", origin);
        if (!kids.is_array() || kids.empty()) fail(origin, "'all_of' needs a non-empty 'children' array");
        for (const auto& k : kids) p.children.push_back(parse_predicate(k, origin));
    } else {
        fail(origin, "unknown predicate kind '" + kind + "'");
    }
    return p;
}

void check_predicate_refs(const Predicate& p, const PageGraph& pages, const std::string& task_id,
                          const std::string& origin) {
    if (!p.page.empty()) {
        const Page* page = pages.find(p.page);
        if (!page) fail(origin, "task '" + task_id + "' predicate references unknown page '" + p.page + "'");
        if (!p.element.empty() && !page->find_element(p.element))
            fail(origin, "task '" + task_id + "' predicate references unknown element '" + p.element +
                             "' on page '" + p.page + "'");
    }
    for (const auto& c : p.children) check_predicate_refs(c, pages, task_id, origin);
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, const std::string& origin) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(origin, std::string("not valid JSON: ") + e.what());
    }

    Scenario scn;
    scn.name = require_string(j, "name", origin);
    scn.duration_minutes = require(j, "duration_minutes", origin).get<Minutes>();
    if (scn.duration_minutes <= 0) fail(origin, "field 'duration_minutes' must be > 0");
    scn.initial_page = require_string(j, "initial_page", origin);
    scn.initial_beta = j.value("initial_beta", 0.5);
    if (scn.initial_beta < 0.0 || scn.initial_beta > 1.0)
        fail(origin, "field 'initial_beta' must be within [0,1]");

    const json& creed = require(j, "creed", origin);
    if (!creed.is_array() || creed.size() != 5)
        fail(origin, "field 'creed' must list exactly 5 sentences");
    for (std::size_t i = 0; i < 5; ++i) {
        if (!creed[i].is_string() || creed[i].get<std::string>().empty())
            fail(origin, "field 'creed[" + std::to_string(i) + "]' must be a non-empty sentence");
        scn.creed[i] = creed[i].get<std::string>();
    }

    const json& pages = require(j, "pages", origin);
    if (!pages.is_array() || pages.empty()) fail(origin, "field 'pages' must be a non-empty array");
    for (const auto& pj : pages) {
        Page p;
        p.id = require_string(pj, "id", origin);
        if (scn.pages.pages.count(p.id)) fail(origin, "duplicate page id '" + p.id + "'");
        p.title = pj.value("title", p.id);
        p.text = pj.value("text", "");
        for (const auto& ej : pj.value("elements", json::array())) {
            PageElement el;
            el.name = require_string(ej, "name", origin);
            el.kind = parse_element_kind(ej.value("kind", "text"), origin);
            el.target = ej.value("target", "");
            el.content = ej.value("content", "");
            if (p.find_element(el.name)) fail(origin, "duplicate element '" + el.name + "' on page '" + p.id + "'");
            p.elements.push_back(std::move(el));
        }
        scn.pages.pages.emplace(p.id, std::move(p));
    }
    if (!scn.pages.find(scn.initial_page))
        fail(origin, "initial_page '" + scn.initial_page + "' is not in 'pages'");
    for (const auto& [id, page] : scn.pages.pages) {
        for (const auto& el : page.elements) {
            if (!el.target.empty() && !scn.pages.find(el.target))
                fail(origin, "element '" + el.name + "' on page '" + id + "' targets unknown page '" +
                                 el.target + "'");
        }
    }

    const json search_index = j.value("search_index", json::object());
    for (const auto& [query, results] : search_index.items()) {
        std::vector<std::string> ids;
        for (const auto& r : results) {
            const std::string page = r.get<std::string>();
            if (!scn.pages.find(page))
                fail(origin, "search_index entry '" + query + "' references unknown page '" + page + "'");
            ids.push_back(page);
        }
        scn.search_index.emplace(query, std::move(ids));
    }

    std::set<std::string> task_ids;
    for (const auto& tj : j.value("tasks", json::array())) {
        TaskSpec t;
        t.id = require_string(tj, "id", origin);
        if (!task_ids.insert(t.id).second) fail(origin, "duplicate task id '" + t.id + "'");
        t.description = require_string(tj, "description", origin);
        t.min_steps = require(tj, "min_steps", origin).get<int>();
        if (t.min_steps < 1) fail(origin, "task '" + t.id + "' field 'min_steps' must be >= 1");
        t.skill = tj.value("skill", "");
        t.plan_template = tj.value("plan_template", t.id);
        t.grants_capability = tj.value("grants_capability", "");
        if (tj.contains("tier")) {
            const auto declared = parse_difficulty(tj.at("tier").get<std::string>());
            if (!declared) fail(origin, "task '" + t.id + "' has unknown tier");
            if (*declared != tier_for_steps(t.min_steps))
                fail(origin, "task '" + t.id + "' declared tier '" + to_string(*declared) +
                                 "' conflicts with min_steps banding '" +
                                 to_string(tier_for_steps(t.min_steps)) + "'");
        }
        t.predicate = parse_predicate(require(tj, "predicate", origin), origin);
        check_predicate_refs(t.predicate, scn.pages, t.id, origin);

        const json& trj = require(tj, "trigger", origin);
        const std::string kind = require_string(trj, "kind", origin);
        if (kind == "schedule") {
            t.trigger.kind = TaskTrigger::Kind::schedule;
            t.trigger.at = require(trj, "at", origin).get<Minutes>();
            if (t.trigger.at < 0) fail(origin, "task '" + t.id + "' trigger field 'at' must be >= 0");
        } else if (kind == "feed_rule") {
            t.trigger.kind = TaskTrigger::Kind::feed_rule;
            t.trigger.rule = require_string(trj, "rule", origin);
            if (t.trigger.rule != "stress_over_45" && t.trigger.rule != "reading_docs")
                fail(origin, "task '" + t.id + "' has unknown feed rule '" + t.trigger.rule + "'");
        } else if (kind == "generated") {
            t.trigger.kind = TaskTrigger::Kind::generated;
        } else {
            fail(origin, "task '" + t.id + "' has unknown trigger kind '" + kind + "'");
        }
        scn.tasks.push_back(std::move(t));
    }

    for (const auto& fj : j.value("feed_tracks", json::array())) {
        FeedTrackEntry e;
        if (fj.contains("at")) e.at = fj.at("at").get<Minutes>();
        if (fj.contains("from")) e.from = fj.at("from").get<Minutes>();
        if (fj.contains("to")) e.to = fj.at("to").get<Minutes>();
        if (e.at.has_value() == (e.from.has_value() && e.to.has_value()))
            fail(origin, "feed track entries need either 'at' or a 'from'/'to' interval");
        if (e.from && e.to && *e.from > *e.to) fail(origin, "feed track interval has 'from' > 'to'");
        if (fj.contains("emotion")) {
            e.emotion = parse_emotion(fj.at("emotion").get<std::string>());
            if (!e.emotion) fail(origin, "feed track has unknown emotion");
        }
        if (fj.contains("activity")) {
            e.activity = parse_activity(fj.at("activity").get<std::string>());
            if (!e.activity) fail(origin, "feed track has unknown activity");
        }
        if (fj.contains("idle_minutes")) e.idle_minutes = fj.at("idle_minutes").get<int>();
        if (fj.contains("idle_minutes_start")) e.idle_minutes_start = fj.at("idle_minutes_start").get<int>();
        scn.feed_tracks.push_back(e);
    }

    for (const auto& cj : j.value("curiosity_targets", json::array())) {
        CuriosityTarget c;
        c.page = require_string(cj, "page", origin);
        c.task_id = require_string(cj, "task", origin);
        if (!scn.pages.find(c.page)) fail(origin, "curiosity target references unknown page '" + c.page + "'");
        if (!task_ids.count(c.task_id))
            fail(origin, "curiosity target references unknown task '" + c.task_id + "'");
        scn.curiosity_targets.push_back(std::move(c));
    }

    return scn;
}

Scenario load_scenario(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ScenarioError("scenario " + file.string() + ": cannot open file");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_scenario(text, file.filename().string());
}

}  // namespace triad
