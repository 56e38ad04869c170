#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "kbqa/sparql/ast.hpp"

namespace kbqa::sparql {

/// Raised by parse_query. Syntax errors cover malformed input; Dialect
/// errors cover constructs that are well-formed but belong to the other
/// dialect (a wd: token under Freebase, a reverse mark under Wikidata).
class ParseError : public std::runtime_error {
  public:
    enum class Kind { Syntax, Dialect };

    ParseError(Kind kind, std::size_t offset, const std::string& message)
        : std::runtime_error((kind == Kind::Dialect ? "dialect error at byte "
                                                    : "syntax error at byte ") +
                             std::to_string(offset) + ": " + message),
          kind_(kind),
          offset_(offset) {}

    Kind kind() const { return kind_; }
    std::size_t offset() const { return offset_; }

  private:
    Kind kind_;
    std::size_t offset_;
};

/// Parses one query in the declared dialect. Triple and filter order is
/// preserved as written. The grammar covers ASK, SELECT count(*),
/// SELECT [DISTINCT] over variables, triple patterns with property paths and
/// unary type assertions, inequality FILTERs, ORDER BY, and LIMIT.
Query parse_query(std::string_view text, Dialect dialect);

}  // namespace kbqa::sparql
