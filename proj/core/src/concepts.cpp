#include "contro/concepts.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <stdexcept>

namespace contro {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::vector<std::string> parse_list(std::string_view field) {
  std::vector<std::string> out;
  for (std::string_view item : split_on(field, ';')) {
    item = trim(item);
    if (!item.empty()) out.emplace_back(item);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int parse_small_int(std::string_view s, const std::string& what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::runtime_error(what + ": not an integer: '" + std::string(s) +
                             "'");
  return value;
}

}  // namespace

bool Concept::has_category(std::string_view name) const {
  return std::find(categories.begin(), categories.end(), name) !=
         categories.end();
}

std::vector<std::string> Concept::mention_strings() const {
  std::vector<std::string> out;
  out.reserve(surface_forms.size() + 1);
  out.push_back(title);
  out.insert(out.end(), surface_forms.begin(), surface_forms.end());
  return out;
}

void ConceptSet::add(Concept c) {
  if (c.id.empty()) throw std::runtime_error("concept id must be non-empty");
  if (index_.contains(c.id))
    throw std::runtime_error("duplicate concept id: '" + c.id + "'");
  if (c.label && *c.label != 0 && *c.label != 1)
    throw std::runtime_error("concept '" + c.id + "': label must be 0 or 1");
  if (c.grade && (*c.grade < 0 || *c.grade > 10))
    throw std::runtime_error("concept '" + c.id +
                             "': grade must lie in [0, 10]");
  index_.emplace(c.id, concepts_.size());
  concepts_.push_back(std::move(c));
}

const Concept* ConceptSet::find(std::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &concepts_[it->second];
}

const Concept& ConceptSet::at(std::string_view id) const {
  const Concept* c = find(id);
  if (!c) throw std::runtime_error("unknown concept id: '" + std::string(id) + "'");
  return *c;
}

std::vector<std::string> ConceptSet::labeled_ids(int label) const {
  std::vector<std::string> out;
  for (const Concept& c : concepts_)
    if (c.label && *c.label == label) out.push_back(c.id);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> ConceptSet::category_names() const {
  std::vector<std::string> out;
  for (const Concept& c : concepts_)
    out.insert(out.end(), c.categories.begin(), c.categories.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ConceptSet parse_concepts(std::istream& in, const std::string& stream_name) {
  ConceptSet set;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    const std::string where = stream_name + ":" + std::to_string(lineno);
    auto fields = split_on(line, '\t');
    if (fields.size() < 2)
      throw std::runtime_error(where + ": expected at least id and title");
    if (fields.size() > 6)
      throw std::runtime_error(where + ": too many columns (" +
                               std::to_string(fields.size()) + ")");
    Concept c;
    c.id = std::string(trim(fields[0]));
    c.title = std::string(trim(fields[1]));
    try {
      if (fields.size() > 2 && !trim(fields[2]).empty())
        c.label = parse_small_int(trim(fields[2]), "label");
      if (fields.size() > 3 && !trim(fields[3]).empty())
        c.grade = parse_small_int(trim(fields[3]), "grade");
      if (fields.size() > 4) c.categories = parse_list(fields[4]);
      if (fields.size() > 5) c.surface_forms = parse_list(fields[5]);
      set.add(std::move(c));
    } catch (const std::exception& e) {
      throw std::runtime_error(where + ": " + e.what());
    }
  }
  return set;
}

}  // namespace contro
