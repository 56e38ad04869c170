#include "kbqa/ground/snapshot.hpp"

#include <algorithm>

#include "kbqa/util.hpp"

namespace kbqa::ground {

using sparql::Query;
using sparql::QueryForm;
using sparql::Term;
using util::ValidationError;

TripleStoreSnapshot TripleStoreSnapshot::load(const std::filesystem::path& triples_path,
                                              const std::filesystem::path& labels_path) {
    TripleStoreSnapshot snap;
    for (const auto& row : util::read_tsv(triples_path)) {
        if (row.fields.size() != 3)
            throw ValidationError(triples_path.string() + ":" + std::to_string(row.line_number) +
                                  ": expected subject<TAB>property<TAB>object");
        snap.add(Triple{row.fields[0], row.fields[1], row.fields[2]});
    }
    for (const auto& row : util::read_tsv(labels_path)) {
        if (row.fields.size() != 3)
            throw ValidationError(labels_path.string() + ":" + std::to_string(row.line_number) +
                                  ": expected qcode<TAB>lang<TAB>label");
        snap.add_label(row.fields[0], row.fields[1], row.fields[2]);
    }
    return snap;
}

void TripleStoreSnapshot::add(Triple t) {
    if (!sparql::is_qcode(t.subject) || !sparql::is_pcode(t.property) ||
        !sparql::is_qcode(t.object))
        throw ValidationError("snapshot triple must be Q P Q codes, got " + t.subject + " " +
                              t.property + " " + t.object);
    if (!triples_.insert(std::move(t)).second)
        throw ValidationError("duplicate snapshot triple");
}

void TripleStoreSnapshot::add_label(const std::string& qcode, const std::string& lang,
                                    std::string text) {
    if (!sparql::is_qcode(qcode)) throw ValidationError("label for non-entity " + qcode);
    if (lang.empty()) throw ValidationError("label with empty language tag");
    auto& slot = labels_[qcode][lang];
    if (!slot.empty() && slot != text)
        throw ValidationError("conflicting " + lang + " labels for " + qcode);
    slot = std::move(text);
}

std::optional<std::string> TripleStoreSnapshot::label(const std::string& qcode,
                                                      const std::string& lang) const {
    auto by_entity = labels_.find(qcode);
    if (by_entity == labels_.end()) return std::nullopt;
    auto by_lang = by_entity->second.find(lang);
    if (by_lang == by_entity->second.end()) return std::nullopt;
    return by_lang->second;
}

std::vector<std::string> TripleStoreSnapshot::entities() const {
    std::set<std::string> seen;
    for (const auto& t : triples_) {
        seen.insert(t.subject);
        seen.insert(t.object);
    }
    return {seen.begin(), seen.end()};
}

namespace {

/// Backtracking join over the pattern's triples; filters prune as soon as
/// both operands resolve.
class Evaluator {
  public:
    Evaluator(const TripleStoreSnapshot& snapshot, const Query& q, std::size_t max_steps)
        : snapshot_(snapshot), q_(q), max_steps_(max_steps) {}

    QueryResult run() {
        sparql::check_query(q_);
        if (!sparql::placeholders_in(q_).empty())
            throw ValidationError("cannot evaluate a query that still contains placeholders");
        if (q_.form == QueryForm::SelectCount)
            throw ValidationError("count queries are not executable locally");

        std::set<std::string> triple_vars;
        for (const auto& t : q_.triples) {
            if (t.subject.kind == Term::Kind::Variable) triple_vars.insert(t.subject.text);
            if (t.object && t.object->kind == Term::Kind::Variable)
                triple_vars.insert(t.object->text);
        }
        for (const auto& v : q_.projected)
            if (!triple_vars.count(v.text))
                throw ValidationError("projected variable ?" + v.text +
                                      " is not bound by any triple");
        for (const auto& v : q_.order_by)
            if (!triple_vars.count(v.text))
                throw ValidationError("ORDER BY variable ?" + v.text +
                                      " is not bound by any triple");

        solve(0);

        QueryResult result;
        if (q_.form == QueryForm::Ask) {
            result.is_boolean = true;
            result.boolean = found_;
            return result;
        }
        if (!q_.order_by.empty()) {
            std::stable_sort(rows_.begin(), rows_.end(),
                             [this](const auto& a, const auto& b) { return row_less(a, b); });
        }
        if (q_.limit && rows_.size() > static_cast<std::size_t>(*q_.limit))
            rows_.resize(static_cast<std::size_t>(*q_.limit));
        result.rows = std::move(rows_);
        return result;
    }

  private:
    bool row_less(const std::map<std::string, std::string>& a,
                  const std::map<std::string, std::string>& b) const {
        for (const auto& v : q_.order_by) {
            const auto& av = a.at(v.text);
            const auto& bv = b.at(v.text);
            if (av != bv) return av < bv;
        }
        return false;
    }

    /// Value of a term under the current assignment; nullopt for an unbound
    /// variable.
    std::optional<std::string> resolve(const Term& t) const {
        if (t.kind == Term::Kind::WikidataEntity) return t.text;
        auto it = bound_.find(t.text);
        if (it == bound_.end()) return std::nullopt;
        return it->second;
    }

    bool filters_hold() const {
        for (const auto& f : q_.filters) {
            auto l = resolve(f.left);
            auto r = resolve(f.right);
            if (l && r && *l == *r) return false;
        }
        return true;
    }

    /// True when enough rows are collected to stop early.
    bool done() const {
        if (q_.form == QueryForm::Ask) return found_;
        if (!q_.order_by.empty() || !q_.limit) return false;
        return rows_.size() >= static_cast<std::size_t>(*q_.limit);
    }

    /// Binds a term to a value; returns false on mismatch, records an undo
    /// entry when a fresh variable binding was made.
    bool unify(const Term& t, const std::string& value, std::vector<std::string>& undo) {
        if (t.kind == Term::Kind::WikidataEntity) return t.text == value;
        auto it = bound_.find(t.text);
        if (it != bound_.end()) return it->second == value;
        bound_.emplace(t.text, value);
        undo.push_back(t.text);
        return true;
    }

    void emit() {
        if (q_.form == QueryForm::Ask) {
            found_ = true;
            return;
        }
        std::map<std::string, std::string> row;
        for (const auto& v : q_.projected) row.emplace(v.text, bound_.at(v.text));
        if (q_.distinct) {
            if (!seen_.insert(row).second) return;
        }
        rows_.push_back(std::move(row));
    }

    void solve(std::size_t i) {
        if (done()) return;
        if (i == q_.triples.size()) {
            if (filters_hold()) emit();
            return;
        }
        const auto& pattern = q_.triples[i];
        const auto& path = std::get<sparql::PropertyPath>(pattern.predicate);
        const std::string& pcode = path.steps[0].property.text;
        for (const auto& fact : snapshot_.triples()) {
            if (++steps_ > max_steps_)
                throw CapacityError("local evaluation exceeded " + std::to_string(max_steps_) +
                                    " steps");
            if (fact.property != pcode) continue;
            std::vector<std::string> undo;
            if (unify(pattern.subject, fact.subject, undo) &&
                unify(*pattern.object, fact.object, undo) && filters_hold()) {
                solve(i + 1);
            }
            for (const auto& name : undo) bound_.erase(name);
            if (done()) return;
        }
    }

    const TripleStoreSnapshot& snapshot_;
    const Query& q_;
    std::size_t max_steps_;
    std::size_t steps_ = 0;
    std::map<std::string, std::string> bound_;
    std::vector<std::map<std::string, std::string>> rows_;
    std::set<std::map<std::string, std::string>> seen_;
    bool found_ = false;
};

}  // namespace

QueryResult evaluate_local(const TripleStoreSnapshot& snapshot, const Query& q,
                           std::size_t max_steps) {
    return Evaluator(snapshot, q, max_steps).run();
}

}  // namespace kbqa::ground
