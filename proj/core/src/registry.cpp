#include "webverbs/registry.hpp"

#include <algorithm>
#include <cmath>

namespace webverbs {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            cur += c;
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

namespace {

std::string spec_location(const idl::VerbSpec& s) {
    std::string loc = s.source_file.empty() ? "<memory>" : s.source_file;
    if (s.pos.valid())
        loc += ":" + std::to_string(s.pos.line) + ":" + std::to_string(s.pos.col);
    return loc;
}

}  // namespace

void Registry::index_verb(const idl::VerbSpec& spec) {
    std::map<std::string, int> counts;
    for (const auto& tok : tokenize(spec.doc + " " + spec.qname())) counts[tok]++;
    for (const auto& [tok, n] : counts) doc_freq_[tok]++;
    term_counts_[spec.qname()] = std::move(counts);
}

void Registry::ingest(const std::vector<idl::VerbSpec>& specs) {
    // Validate the whole batch before touching state.
    for (size_t i = 0; i < specs.size(); ++i) {
        const std::string qn = specs[i].qname();
        auto existing = verbs_.find(qn);
        if (existing != verbs_.end())
            throw DuplicateQname(qn, spec_location(existing->second), spec_location(specs[i]));
        for (size_t j = i + 1; j < specs.size(); ++j)
            if (specs[j].qname() == qn)
                throw DuplicateQname(qn, spec_location(specs[i]), spec_location(specs[j]));
    }
    for (const auto& spec : specs) {
        if (!sites_.count(spec.site_id))
            sites_[spec.site_id] = {spec.site_id, "other", spec.site_id};
        index_verb(spec);
        verbs_[spec.qname()] = spec;
    }
}

void Registry::ingest_manifest(const idl::ManifestParseResult& manifest) {
    if (!manifest.ok())
        throw std::invalid_argument("refusing to ingest a manifest with errors");
    if (!manifest.site.site_id.empty()) sites_[manifest.site.site_id] = manifest.site;
    for (const auto& [qname, t] : manifest.types) types_[qname] = t;
    ingest(manifest.verbs);
}

const idl::VerbSpec& Registry::lookup(const std::string& qname) const {
    auto it = verbs_.find(qname);
    if (it == verbs_.end()) throw UnknownVerb(qname);
    return it->second;
}

const idl::VerbSpec* Registry::try_lookup(const std::string& qname) const {
    auto it = verbs_.find(qname);
    return it == verbs_.end() ? nullptr : &it->second;
}

TypePtr Registry::find_type(const std::string& qname) const {
    auto it = types_.find(qname);
    return it == types_.end() ? nullptr : it->second;
}

std::vector<SearchHit> Registry::search(const std::string& query, int k) const {
    std::vector<SearchHit> hits;
    if (k < 1 || verbs_.empty()) return hits;

    const double n_verbs = static_cast<double>(verbs_.size());
    std::map<std::string, double> scores;  // qname -> score, keyed for determinism
    for (const auto& tok : tokenize(query)) {
        auto df = doc_freq_.find(tok);
        if (df == doc_freq_.end()) continue;
        double weight = std::log(1.0 + n_verbs / static_cast<double>(df->second));
        for (const auto& [qname, counts] : term_counts_) {
            auto tf = counts.find(tok);
            if (tf != counts.end()) scores[qname] += tf->second * weight;
        }
    }

    for (const auto& [qname, score] : scores)
        if (score > 0.0) hits.push_back({qname, score});
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.qname < b.qname;
    });
    if (hits.size() > static_cast<size_t>(k)) hits.resize(static_cast<size_t>(k));
    return hits;
}

}  // namespace webverbs
