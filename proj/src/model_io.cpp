#include "branchrl/model_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace branchrl {

using nlohmann::json;

namespace {

const json& field(const json& obj, const char* name) {
    if (!obj.is_object() || !obj.contains(name)) throw ParseError(std::string("missing field '") + name + "'");
    return obj.at(name);
}

std::size_t as_count(const json& obj, const char* name) {
    const json& v = field(obj, name);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw ParseError(std::string("field '") + name + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

std::vector<double> matrix(const json& obj, const char* name, std::size_t rows, std::size_t cols) {
    const json& v = field(obj, name);
    std::vector<double> out;
    out.reserve(rows * cols);
    if (!v.is_array() || v.size() != rows)
        throw ParseError(std::string("field '") + name + "' must have " + std::to_string(rows) + " rows");
    for (std::size_t i = 0; i < rows; ++i) {
        const json& row = v[i];
        if (!row.is_array() || row.size() != cols)
            throw ParseError(std::string("field '") + name + "' row " + std::to_string(i) + " must have " +
                             std::to_string(cols) + " entries");
        for (std::size_t j = 0; j < cols; ++j) {
            if (!row[j].is_number())
                throw ParseError(std::string("field '") + name + "' [" + std::to_string(i) + "][" +
                                 std::to_string(j) + "] is not a number");
            out.push_back(row[j].get<double>());
        }
    }
    return out;
}

SuperAction super_action_from(const json& v, const std::string& where) {
    if (!v.is_array()) throw ParseError(where + " must be an array of base-action indices");
    std::vector<BaseActionId> members;
    for (const auto& x : v) {
        if (!x.is_number_integer() || x.get<long long>() < 0) throw ParseError(where + " has a non-index entry");
        members.push_back(x.get<BaseActionId>());
    }
    std::sort(members.begin(), members.end());
    return SuperAction(std::move(members));
}

std::vector<SuperAction> action_list(const json& v, const std::string& where) {
    if (!v.is_array()) throw ParseError(where + " must be an array");
    std::vector<SuperAction> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(super_action_from(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

json to_json(const std::vector<SuperAction>& actions) {
    json arr = json::array();
    for (const auto& a : actions) arr.push_back(a.members);
    return arr;
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
}

}  // namespace

BranchingMdp parse_model(const std::string& text) {
    const json doc = parse_json(text);
    try {
        BranchingMdp mdp;
        mdp.S = as_count(doc, "S");
        mdp.N = as_count(doc, "N");
        mdp.m = as_count(doc, "m");
        mdp.H = as_count(doc, "H");
        mdp.ending = as_count(doc, "ending");
        mdp.initial = as_count(doc, "initial");
        mdp.q = matrix(doc, "q", mdp.S, mdp.N);
        mdp.r = matrix(doc, "r", mdp.S, mdp.N);

        const json& p = field(doc, "p");
        if (!p.is_array() || p.size() != mdp.S) throw ParseError("field 'p' must have S entries");
        mdp.p.reserve(mdp.S * mdp.N * mdp.S);
        for (std::size_t s = 0; s < mdp.S; ++s) {
            json wrapper = {{"p", p[s]}};
            auto rows = matrix(wrapper, "p", mdp.N, mdp.S);
            mdp.p.insert(mdp.p.end(), rows.begin(), rows.end());
        }

        const json& cls = field(doc, "action_class");
        const std::string kind = field(cls, "kind").get<std::string>();
        if (kind == "top_m")
            mdp.actions = ActionClass::top_m(mdp.N, mdp.m);
        else if (kind == "partition")
            mdp.actions = ActionClass::partition(mdp.N, action_list(field(cls, "blocks"), "action_class.blocks"));
        else if (kind == "explicit")
            mdp.actions = ActionClass::explicit_list(mdp.N, action_list(field(cls, "actions"), "action_class.actions"));
        else
            throw ParseError("unknown action_class kind '" + kind + "'");

        const json& flag = field(doc, "assumption1_enforced");
        if (!flag.is_boolean()) throw ParseError("field 'assumption1_enforced' must be a boolean");
        mdp.assumption1_enforced = flag.get<bool>();
        return mdp;
    } catch (const json::exception& e) {
        throw ParseError(std::string("type error: ") + e.what());
    }
}

std::string dump_model(const BranchingMdp& mdp) {
    json doc;
    doc["S"] = mdp.S;
    doc["N"] = mdp.N;
    doc["m"] = mdp.m;
    doc["H"] = mdp.H;
    doc["ending"] = mdp.ending;
    doc["initial"] = mdp.initial;
    json q = json::array(), r = json::array(), p = json::array();
    for (StateId s = 0; s < mdp.S; ++s) {
        json qrow = json::array(), rrow = json::array(), prows = json::array();
        for (BaseActionId a = 0; a < mdp.N; ++a) {
            qrow.push_back(mdp.trigger(s, a));
            rrow.push_back(mdp.reward(s, a));
            auto row = mdp.transition_row(s, a);
            prows.push_back(std::vector<double>(row.begin(), row.end()));
        }
        q.push_back(qrow);
        r.push_back(rrow);
        p.push_back(prows);
    }
    doc["q"] = q;
    doc["p"] = p;
    doc["r"] = r;
    switch (mdp.actions.kind()) {
        case ActionClass::Kind::TopM:
            doc["action_class"] = {{"kind", "top_m"}};
            break;
        case ActionClass::Kind::Partition:
            doc["action_class"] = {{"kind", "partition"}, {"blocks", to_json(mdp.actions.listed())}};
            break;
        case ActionClass::Kind::Explicit:
            doc["action_class"] = {{"kind", "explicit"}, {"actions", to_json(mdp.actions.listed())}};
            break;
    }
    doc["assumption1_enforced"] = mdp.assumption1_enforced;
    return doc.dump(1) + "\n";
}

PolicyTable parse_policy(const std::string& text) {
    const json doc = parse_json(text);
    try {
        const std::size_t H = as_count(doc, "H");
        const std::size_t S = as_count(doc, "S");
        const json& rows = field(doc, "policy");
        if (!rows.is_array() || rows.size() != H) throw ParseError("field 'policy' must have H rows");
        PolicyTable table(H, S);
        for (std::size_t h = 1; h <= H; ++h) {
            const json& row = rows[h - 1];
            if (!row.is_array() || row.size() != S) throw ParseError("policy row " + std::to_string(h) + " must have S entries");
            for (StateId s = 0; s < S; ++s)
                table.at(h, s) = super_action_from(row[s], "policy[" + std::to_string(h) + "][" + std::to_string(s) + "]");
        }
        return table;
    } catch (const json::exception& e) {
        throw ParseError(std::string("type error: ") + e.what());
    }
}

std::string dump_policy(const PolicyTable& policy) {
    json doc;
    doc["H"] = policy.horizon();
    doc["S"] = policy.n_states();
    json rows = json::array();
    for (std::size_t h = 1; h <= policy.horizon(); ++h) {
        json row = json::array();
        for (StateId s = 0; s < policy.n_states(); ++s) row.push_back(policy.at(h, s).members);
        rows.push_back(row);
    }
    doc["policy"] = rows;
    return doc.dump(1) + "\n";
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

BranchingMdp load_model(const std::filesystem::path& path) { return parse_model(read_text(path)); }
void save_model(const std::filesystem::path& path, const BranchingMdp& mdp) { write_text(path, dump_model(mdp)); }
PolicyTable load_policy(const std::filesystem::path& path) { return parse_policy(read_text(path)); }
void save_policy(const std::filesystem::path& path, const PolicyTable& policy) { write_text(path, dump_policy(policy)); }

std::vector<double> load_rewards(const std::filesystem::path& path, std::size_t S, std::size_t N) {
    const json doc = parse_json(read_text(path));
    try {
        return matrix(doc, "r", S, N);
    } catch (const json::exception& e) {
        throw ParseError(std::string("type error: ") + e.what());
    }
}

}  // namespace branchrl
