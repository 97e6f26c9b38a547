#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "webverbs/manifest.hpp"

namespace webverbs {

class UnknownVerb : public std::runtime_error {
public:
    explicit UnknownVerb(const std::string& qname)
        : std::runtime_error("unknown verb: '" + qname + "'") {}
};

class DuplicateQname : public std::runtime_error {
public:
    DuplicateQname(const std::string& qname, const std::string& first_loc,
                   const std::string& second_loc)
        : std::runtime_error("duplicate verb '" + qname + "' (first declared at " + first_loc +
                             ", again at " + second_loc + ")") {}
};

struct SearchHit {
    std::string qname;
    double score;
};

// Lowercase maximal runs of [a-z0-9].
std::vector<std::string> tokenize(const std::string& text);

// The global verb namespace plus a deterministic lexical index over verb
// documentation. Reads are safe from any number of threads as long as no
// ingest is running (single-writer discipline; ingestion is not synchronized
// internally).
class Registry {
public:
    // Adds validated specs. Transactional: on DuplicateQname nothing is added.
    // Sites not previously registered get a SiteMeta with category "other".
    void ingest(const std::vector<idl::VerbSpec>& specs);

    // Adds a parsed manifest: site meta, declared types, verbs.
    void ingest_manifest(const idl::ManifestParseResult& manifest);

    const idl::VerbSpec& lookup(const std::string& qname) const;  // throws UnknownVerb
    const idl::VerbSpec* try_lookup(const std::string& qname) const;

    // Declared record/enum type by qualified name, or nullptr.
    TypePtr find_type(const std::string& qname) const;

    // TF-IDF over doc + qname tokens: score(v) = sum over query token
    // occurrences t of tf(t, v) * ln(1 + N / df(t)). Top-k positive scores,
    // ties by ascending qname.
    std::vector<SearchHit> search(const std::string& query, int k) const;

    std::size_t verb_count() const { return verbs_.size(); }
    const std::map<std::string, idl::VerbSpec>& verbs() const { return verbs_; }
    const std::map<std::string, idl::SiteMeta>& sites() const { return sites_; }

private:
    void index_verb(const idl::VerbSpec& spec);

    std::map<std::string, idl::VerbSpec> verbs_;       // qname -> spec
    std::map<std::string, idl::SiteMeta> sites_;       // site_id -> meta
    std::map<std::string, TypePtr> types_;             // qualified type name -> type
    std::map<std::string, std::map<std::string, int>> term_counts_;  // qname -> token -> tf
    std::map<std::string, int> doc_freq_;              // token -> #verbs containing it
};

}  // namespace webverbs
