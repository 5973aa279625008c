#include "neuroquery/unify.hpp"

#include <unordered_map>

namespace neuroquery {

namespace {

bool occurs(const std::string& name, const Term& term, const Frame& frame) {
  const Term t = resolve(term, frame);
  if (t.is_variable()) return t.str() == name;
  if (t.is_tuple()) {
    for (const auto& e : t.elements())
      if (occurs(name, e, frame)) return true;
  }
  return false;
}

bool unify_into(const Term& x, const Term& y, Frame& frame) {
  const Term a = resolve(x, frame);
  const Term b = resolve(y, frame);
  if (a.is_variable() && b.is_variable() && a.str() == b.str()) return true;
  if (a.is_variable()) {
    if (occurs(a.str(), b, frame)) return false;
    frame = frame.extend(a.str(), b);
    return true;
  }
  if (b.is_variable()) {
    if (occurs(b.str(), a, frame)) return false;
    frame = frame.extend(b.str(), a);
    return true;
  }
  if (a.is_tuple() && b.is_tuple()) {
    if (a.arity() != b.arity()) return false;
    const auto& xs = a.elements();
    const auto& ys = b.elements();
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (!unify_into(xs[i], ys[i], frame)) return false;
    return true;
  }
  return a == b;
}

}  // namespace

std::optional<Frame> unify(const Term& a, const Term& b, const Frame& frame) {
  Frame out = frame;
  if (!unify_into(a, b, out)) return std::nullopt;
  return out;
}

Term resolve(const Term& term, const Frame& frame) {
  Term t = term;
  while (t.is_variable()) {
    const Term* bound = frame.lookup(t.str());
    if (bound == nullptr) break;
    t = *bound;
  }
  return t;
}

Term substitute(const Term& term, const Frame& frame) {
  const Term t = resolve(term, frame);
  if (!t.is_tuple() || t.is_ground()) return t;
  TermList out;
  out.reserve(t.arity());
  for (const auto& e : t.elements()) out.push_back(substitute(e, frame));
  return Term::tuple(std::move(out));
}

std::string FreshNames::fresh(std::string_view base) {
  const auto cut = base.find('~');
  if (cut != std::string_view::npos) base = base.substr(0, cut);
  return std::string(base) + "~" + std::to_string(next_++);
}

Rule standardize_apart(const Rule& rule, FreshNames& names) {
  std::unordered_map<std::string, std::string> renamed;
  auto rename = [&](const std::string& name) -> std::string {
    auto it = renamed.find(name);
    if (it != renamed.end()) return it->second;
    return renamed.emplace(name, names.fresh(name)).first->second;
  };
  Rule out;
  out.head = rename_variables(rule.head, rename);
  out.body.reserve(rule.body.size());
  for (const auto& clause : rule.body) out.body.push_back(rename_variables(clause, rename));
  if (renamed.empty()) return rule;
  return out;
}

}  // namespace neuroquery
