#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "neuroquery/ast.hpp"
#include "neuroquery/term.hpp"

namespace neuroquery {

/// Most general unifier of `a` and `b` extending `frame`, or nullopt when none exists.
///
/// Variables may appear on both sides. Bindings are only ever added, and a
/// variable is never bound to a term containing itself (occurs check).
std::optional<Frame> unify(const Term& a, const Term& b, const Frame& frame);

/// Follows the binding chain of an outermost variable; does not descend into tuples.
Term resolve(const Term& term, const Frame& frame);

/// Replaces every bound variable, recursively. Unbound variables stay.
Term substitute(const Term& term, const Frame& frame);

/// Source of variable names that cannot collide with user-written ones.
///
/// Issued names have the form `base~N`; `~` never appears in source variables.
class FreshNames {
 public:
  std::string fresh(std::string_view base);

 private:
  std::uint64_t next_ = 0;
};

/// Alpha-renames every variable of `rule` to names not issued before.
Rule standardize_apart(const Rule& rule, FreshNames& names);

}  // namespace neuroquery
