#include "rrlab/descriptors.hpp"

#include <fstream>
#include <map>
#include <tuple>

namespace rrlab {

using nlohmann::json;

namespace {

Rational rational_field(const json& v, const char* what) {
    if (v.is_number_integer()) return Rational(v.get<long>());
    if (v.is_string()) return parse_rational(v.get<std::string>());
    throw InvalidInput(std::string(what) + " must be an integer or a \"p/q\" string");
}

long int_field(const json& v, const char* what) {
    if (!v.is_number_integer()) throw InvalidInput(std::string(what) + " must be an integer");
    return v.get<long>();
}

std::pair<std::string, std::string> split_rule(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) return {text, ""};
    return {text.substr(0, colon), text.substr(colon + 1)};
}

long parse_long(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        long v = std::stol(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw InvalidInput(std::string("malformed ") + what + ": " + s);
}

std::function<long(int)> parse_cuts(const json& spec) {
    if (spec.is_array()) {
        if (spec.empty()) throw InvalidInput("cuts list is empty");
        std::vector<long> list;
        for (const auto& v : spec) {
            long r = int_field(v, "cuts entry");
            if (r < 2) throw InvalidInput("every stage needs at least 2 columns");
            list.push_back(r);
        }
        return [list](int k) { return list[std::min<std::size_t>(static_cast<std::size_t>(k), list.size() - 1)]; };
    }
    if (!spec.is_object() || !spec.contains("formula")) throw InvalidInput("cuts must be a list or a formula object");
    auto [kind, args] = split_rule(spec.at("formula").get<std::string>());
    long a = 0, b = 0;
    if (kind == "const") {
        b = parse_long(args, "cuts formula");
    } else if (kind == "affine") {
        const auto comma = args.find(',');
        if (comma == std::string::npos) throw InvalidInput("affine cuts need \"a,b\"");
        a = parse_long(args.substr(0, comma), "cuts formula");
        b = parse_long(args.substr(comma + 1), "cuts formula");
    } else {
        throw InvalidInput("unknown cuts formula: " + kind);
    }
    if (a < 0 || b < 2) throw InvalidInput("cuts formula must give at least 2 columns at every stage");
    std::map<int, long> overrides;
    if (spec.contains("overrides")) {
        for (const auto& [key, v] : spec.at("overrides").items()) {
            long r = int_field(v, "cuts override");
            if (r < 2) throw InvalidInput("every stage needs at least 2 columns");
            overrides[static_cast<int>(parse_long(key, "override stage"))] = r;
        }
    }
    return [a, b, overrides](int k) {
        auto it = overrides.find(k);
        return it != overrides.end() ? it->second : a * k + b;
    };
}

}  // namespace

ConstructionDescriptor parse_system(const json& doc) {
    if (!doc.is_object()) throw InvalidInput("system descriptor must be a JSON object");
    const int max_stage = doc.contains("max_stage") ? static_cast<int>(int_field(doc.at("max_stage"), "max_stage")) : 6;
    if (max_stage < 0) throw InvalidInput("max_stage must be non-negative");
    if (doc.contains("builtin")) return ConstructionDescriptor::builtin(doc.at("builtin").get<std::string>(), max_stage);
    if (!doc.contains("cuts")) throw InvalidInput("system descriptor needs \"cuts\"");

    ConstructionDescriptor d;
    d.name = doc.value("name", std::string("custom"));
    d.max_stage = max_stage;
    d.cuts = parse_cuts(doc.at("cuts"));

    std::map<std::pair<int, long>, long> listed;
    int last_listed = -1;
    if (doc.contains("spacers")) {
        for (const auto& entry : doc.at("spacers")) {
            if (!entry.is_array() || entry.size() != 3) throw InvalidInput("spacer entries are [stage, column, count]");
            const int k = static_cast<int>(int_field(entry[0], "spacer stage"));
            const long c = int_field(entry[1], "spacer column");
            const long n = int_field(entry[2], "spacer count");
            if (k < 0 || n < 0) throw InvalidInput("spacer stage and count must be non-negative");
            if (c < 0 || c >= d.cuts(k)) throw InvalidInput("spacer column outside the stage's columns");
            listed[{k, c}] = n;
            if (n > 0) last_listed = std::max(last_listed, k);
        }
    }
    std::string rule_kind = "none";
    long rule_count = 0;
    if (doc.contains("spacer_rule")) {
        auto [kind, args] = split_rule(doc.at("spacer_rule").get<std::string>());
        rule_kind = kind;
        if (kind != "none") {
            if (kind != "last" && kind != "middle") throw InvalidInput("unknown spacer_rule: " + kind);
            rule_count = parse_long(args, "spacer_rule count");
            if (rule_count < 0) throw InvalidInput("spacer_rule count must be non-negative");
        }
    }
    auto cuts = d.cuts;
    d.spacers = [listed, rule_kind, rule_count, cuts](int k, long c) -> long {
        if (auto it = listed.find({k, c}); it != listed.end()) return it->second;
        if (rule_kind == "last" && c == cuts(k) - 1) return rule_count;
        if (rule_kind == "middle" && c == cuts(k) / 2) return rule_count;
        return 0;
    };
    if (rule_kind == "none" || rule_count == 0) {
        d.spacer_free_from = last_listed + 1;
    }
    return d;
}

Joining parse_joining(const json& doc) {
    if (!doc.is_object()) throw InvalidInput("joining descriptor must be a JSON object");
    if (doc.contains("builtin")) return builtin_joining(doc.at("builtin").get<std::string>());
    const std::string type = doc.value("type", std::string());
    auto terms = [&]() {
        OffDiagonalCombo combo;
        if (!doc.contains("terms") || !doc.at("terms").is_array()) throw InvalidInput("joining needs a \"terms\" list");
        for (const auto& t : doc.at("terms")) {
            combo.terms.push_back({int_field(t.at("shift"), "shift"), rational_field(t.at("weight"), "weight")});
        }
        return combo;
    };
    if (type == "offdiag") return Joining(terms());
    if (type == "productmix") return Joining(ProductMix{rational_field(doc.at("alpha"), "alpha"), terms()});
    if (type == "product") return Joining::product();
    if (type == "twoadic") return Joining(TwoAdicGraph{rational_field(doc.at("gamma"), "gamma")});
    throw InvalidInput("unknown joining type: " + type);
}

namespace {

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidInput("malformed JSON in " + path + ": " + e.what());
    }
}

constexpr std::string_view kBuiltinPrefix = "builtin:";

}  // namespace

ConstructionDescriptor load_system(const std::string& source, std::optional<int> max_stage) {
    ConstructionDescriptor d;
    if (source.starts_with(kBuiltinPrefix)) {
        d = ConstructionDescriptor::builtin(source.substr(kBuiltinPrefix.size()), max_stage.value_or(6));
    } else {
        try {
            d = parse_system(read_json(source));
        } catch (const json::exception& e) {
            throw InvalidInput(std::string("invalid system descriptor: ") + e.what());
        }
    }
    if (max_stage) d.max_stage = *max_stage;
    return d;
}

Joining load_joining(const std::string& source) {
    if (source.starts_with(kBuiltinPrefix)) return builtin_joining(source.substr(kBuiltinPrefix.size()));
    try {
        return parse_joining(read_json(source));
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("invalid joining descriptor: ") + e.what());
    }
}

}  // namespace rrlab
