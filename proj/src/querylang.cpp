#include "synsearch/querylang.hpp"

#include <algorithm>
#include <istream>
#include <set>

#include <json.hpp>

#include "synsearch/error.hpp"
#include "synsearch/text.hpp"

namespace synsearch {

char constraint_key_char(ConstraintKey key) {
  switch (key) {
    case ConstraintKey::kWord: return 'w';
    case ConstraintKey::kLemma: return 'l';
    case ConstraintKey::kPos: return 't';
    case ConstraintKey::kEntity: return 'e';
  }
  return '?';
}

std::string_view role_name(ElementRole role) {
  switch (role) {
    case ElementRole::kContext: return "context";
    case ElementRole::kAnchor: return "anchor";
    case ElementRole::kCapture: return "capture";
  }
  return "?";
}

const Constraint* QueryElement::find(ConstraintKey key) const {
  for (const auto& c : constraints)
    if (c.key == key) return &c;
  return nullptr;
}

int QueryExample::capture_index(std::string_view name) const {
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (elements[i].role == ElementRole::kCapture &&
        elements[i].capture_name == name)
      return static_cast<int>(i);
  }
  return -1;
}

namespace {

constexpr std::string_view kReserved = "[]<>$";

[[noreturn]] void syntax_error(const std::string& message, long position) {
  throw Error(ErrorCode::kQuerySyntax,
              message + " (at offset " + std::to_string(position) + ")")
      .with_position(position);
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = s.front();
  if (!(std::isalpha(static_cast<unsigned char>(head)) || head == '_'))
    return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::vector<Constraint> parse_constraints(std::string_view body, long pos) {
  std::vector<Constraint> out;
  std::set<ConstraintKey> seen;
  for (auto part : split(body, ',')) {
    part = trim(part);
    if (part.empty()) syntax_error("empty constraint", pos);
    auto eq = part.find('=');
    auto key_text = trim(part.substr(0, eq));
    Constraint c;
    if (key_text == "w") c.key = ConstraintKey::kWord;
    else if (key_text == "l") c.key = ConstraintKey::kLemma;
    else if (key_text == "t") c.key = ConstraintKey::kPos;
    else if (key_text == "e") c.key = ConstraintKey::kEntity;
    else syntax_error("unknown constraint key " + std::string(key_text), pos);
    if (!seen.insert(c.key).second)
      syntax_error("duplicate constraint key " + std::string(key_text), pos);
    if (eq == std::string_view::npos) {
      c.bare = true;
    } else {
      for (auto v : split(part.substr(eq + 1), '|')) {
        v = trim(v);
        if (v.empty()) syntax_error("empty disjunction", pos);
        c.values.emplace_back(v);
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

void check_surface(std::string_view surface, long pos) {
  if (surface.empty()) syntax_error("missing surface word", pos);
  if (surface.find_first_of("[]") != std::string_view::npos)
    syntax_error("unbalanced brackets", pos);
  if (surface.find_first_of(kReserved) != std::string_view::npos)
    syntax_error("reserved character in surface '" + std::string(surface) + "'",
                 pos);
}

QueryElement parse_element(std::string_view unit, long pos) {
  QueryElement el;
  if (unit.front() == '$') {
    el.role = ElementRole::kAnchor;
    el.surface = std::string(unit.substr(1));
    check_surface(el.surface, pos);
    return el;
  }
  std::string_view rest = unit;
  if (rest.substr(0, 2) == "<>") {
    el.expand = true;
    rest.remove_prefix(2);
  }
  auto colon = rest.find(':');
  auto bracket = rest.find('[');
  if (colon != std::string_view::npos && colon < bracket &&
      is_identifier(rest.substr(0, colon)) && colon + 1 < rest.size()) {
    el.role = ElementRole::kCapture;
    el.capture_name = std::string(rest.substr(0, colon));
    rest.remove_prefix(colon + 1);
  }
  if (!rest.empty() && rest.front() == '[') {
    auto close = rest.find(']');
    if (close == std::string_view::npos) syntax_error("unbalanced brackets", pos);
    auto body = rest.substr(1, close - 1);
    if (body.find('[') != std::string_view::npos)
      syntax_error("unbalanced brackets", pos);
    el.constraints = parse_constraints(body, pos);
    rest.remove_prefix(close + 1);
  }
  check_surface(rest, pos);
  el.surface = std::string(rest);
  if (el.expand && el.role != ElementRole::kCapture)
    syntax_error("'<>' requires a capture name", pos);
  if (!el.constraints.empty() && el.role != ElementRole::kCapture)
    syntax_error("constraint list requires a capture name", pos);
  return el;
}

}  // namespace

QueryExample parse_query(std::string_view text, std::string id) {
  QueryExample q;
  q.id = std::move(id);
  q.raw = std::string(text);
  std::size_t i = 0;
  std::set<std::string> names;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])))
      ++j;
    auto pos = static_cast<long>(i);
    QueryElement el = parse_element(text.substr(i, j - i), pos);
    if (el.role == ElementRole::kCapture &&
        !names.insert(el.capture_name).second)
      syntax_error("duplicate capture name " + el.capture_name, pos);
    q.elements.push_back(std::move(el));
    i = j;
  }
  const bool has_e1 = names.count("e1") > 0;
  const bool has_e2 = names.count("e2") > 0;
  if (!has_e1 || !has_e2) {
    syntax_error(!has_e1 && !has_e2 ? "missing e1/e2"
                 : !has_e1          ? "missing e1"
                                    : "missing e2",
                 static_cast<long>(text.size()));
  }
  return q;
}

std::string render(const QueryExample& query) {
  std::string out;
  for (const auto& el : query.elements) {
    if (!out.empty()) out += ' ';
    if (el.role == ElementRole::kAnchor) {
      out += '$';
      out += el.surface;
      continue;
    }
    if (el.expand) out += "<>";
    if (el.role == ElementRole::kCapture) {
      out += el.capture_name;
      out += ':';
    }
    if (!el.constraints.empty()) {
      out += '[';
      for (std::size_t k = 0; k < el.constraints.size(); ++k) {
        const auto& c = el.constraints[k];
        if (k) out += ',';
        out += constraint_key_char(c.key);
        if (c.bare) continue;
        out += '=';
        for (std::size_t v = 0; v < c.values.size(); ++v) {
          if (v) out += '|';
          out += c.values[v];
        }
      }
      out += ']';
    }
    out += el.surface;
  }
  return out;
}

std::string strip(const QueryExample& query) {
  std::string out;
  for (const auto& el : query.elements) {
    if (!out.empty()) out += ' ';
    out += el.surface;
  }
  return out;
}

QueryExample expand_triggers(const QueryExample& query,
                             const TriggerMap& triggers,
                             std::vector<std::string>* warnings) {
  QueryExample out = query;
  for (const auto& [word, alternatives] : triggers) {
    bool used = false;
    for (auto& el : out.elements) {
      if (el.role != ElementRole::kCapture || !iequals(el.surface, word))
        continue;
      for (auto& c : el.constraints) {
        if (c.key != ConstraintKey::kWord && c.key != ConstraintKey::kLemma)
          continue;
        if (alternatives.empty()) continue;
        c.bare = false;
        c.values = alternatives;
        used = true;
      }
    }
    if (!used && warnings)
      warnings->push_back("trigger '" + word + "' matches no w/l capture in query " +
                          query.id);
  }
  return out;
}

std::vector<QueryExample> read_query_file(std::istream& in) {
  std::vector<QueryExample> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    std::string id = "q" + std::to_string(line_no);
    if (auto tab = view.find('\t'); tab != std::string_view::npos) {
      id = std::string(trim(view.substr(0, tab)));
      view = trim(view.substr(tab + 1));
    }
    try {
      out.push_back(parse_query(view, id));
    } catch (const Error& e) {
      throw Error(ErrorCode::kQuerySyntax,
                  "query " + id + " (line " + std::to_string(line_no) +
                      "): " + e.what(),
                  id, line_no)
          .with_position(e.position());
    }
  }
  return out;
}

TriggerMap parse_trigger_map(std::string_view json_text) {
  auto j = nlohmann::json::parse(json_text, nullptr, false);
  if (!j.is_object())
    throw Error(ErrorCode::kInvalidArgument, "trigger map must be a JSON object");
  TriggerMap out;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_array())
      throw Error(ErrorCode::kInvalidArgument,
                  "trigger map entry '" + key + "' must be an array");
    auto& list = out[key];
    for (const auto& w : value) {
      if (!w.is_string())
        throw Error(ErrorCode::kInvalidArgument,
                    "trigger map entry '" + key + "' must contain strings");
      list.push_back(w.get<std::string>());
    }
  }
  return out;
}

}  // namespace synsearch
