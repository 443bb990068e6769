#include "contro/io.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <system_error>

namespace contro {

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, p);
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  int n = std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  if (n < 0 || n >= static_cast<int>(sizeof(buf)))
    throw std::runtime_error("format_fixed failed");
  return std::string(buf, static_cast<std::size_t>(n));
}

double parse_double(std::string_view s, const std::string& what) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw std::runtime_error(what + ": invalid number '" + std::string(s) +
                             "'");
  return v;
}

long long parse_ll(std::string_view s, const std::string& what) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw std::runtime_error(what + ": invalid integer '" + std::string(s) +
                             "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

namespace {

void check_field(std::string_view value, const char* what) {
  if (value.find('\t') != std::string_view::npos ||
      value.find('\n') != std::string_view::npos)
    throw std::invalid_argument(std::string(what) +
                                " must not contain tabs or newlines");
}

struct HeaderReader {
  std::istream& in;
  const std::string& name;
  std::size_t lineno = 0;
  std::string line;
  bool have_line = false;

  // Reads the next line, dropping a trailing carriage return.
  bool advance() {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    have_line = true;
    return true;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw std::runtime_error(name + ":" + std::to_string(lineno) + ": " +
                             message);
  }
};

// Splits a "# key=value" comment; returns false for anything else.
bool parse_header_entry(std::string_view line, std::string_view& key,
                        std::string_view& value) {
  if (line.rfind("# ", 0) != 0) return false;
  std::string_view body = line.substr(2);
  std::size_t eq = body.find('=');
  if (eq == std::string_view::npos) return false;
  key = body.substr(0, eq);
  value = body.substr(eq + 1);
  return true;
}

}  // namespace

void write_contexts_file(std::ostream& out, const ContextsFile& file) {
  check_field(file.mask_token, "mask token");
  out << "# contro-contexts v1\n";
  out << "# mask_token=" << file.mask_token << "\n";
  out << "# min_len=" << file.min_len << "\n";
  out << "# max_len=" << file.max_len << "\n";
  for (const auto& [key, value] : file.config) {
    check_field(key, "config key");
    check_field(value, "config value");
    out << "# " << key << "=" << value << "\n";
  }
  for (const auto& [concept_id, contexts] : file.contexts) {
    check_field(concept_id, "concept id");
    for (const MaskedContext& ctx : contexts) {
      check_field(ctx.source_ref, "source ref");
      out << concept_id << "\t" << ctx.source_ref << "\t";
      for (std::size_t i = 0; i < ctx.tokens.size(); ++i) {
        if (i) out << ' ';
        out << ctx.tokens[i];
      }
      out << "\n";
    }
  }
}

ContextsFile read_contexts_file(std::istream& in,
                                const std::string& stream_name) {
  HeaderReader reader{in, stream_name};
  if (!reader.advance() || reader.line != "# contro-contexts v1")
    throw std::runtime_error(stream_name + ": not a contro-contexts v1 file");
  ContextsFile file;
  while (reader.advance()) {
    if (reader.line.empty()) continue;
    std::string_view key, value;
    if (parse_header_entry(reader.line, key, value)) {
      if (key == "mask_token")
        file.mask_token = std::string(value);
      else if (key == "min_len")
        file.min_len = static_cast<int>(parse_ll(value, "min_len"));
      else if (key == "max_len")
        file.max_len = static_cast<int>(parse_ll(value, "max_len"));
      else
        file.config.emplace_back(std::string(key), std::string(value));
      continue;
    }
    auto fields = split(reader.line, '\t');
    if (fields.size() != 3)
      reader.fail("expected concept id, source ref, tokens");
    if (fields[0].empty()) reader.fail("empty concept id");
    MaskedContext ctx;
    ctx.concept_id = std::string(fields[0]);
    ctx.source_ref = std::string(fields[1]);
    for (std::string_view tok : split(fields[2], ' ')) {
      if (tok.empty()) reader.fail("empty token");
      ctx.tokens.emplace_back(tok);
    }
    file.contexts[ctx.concept_id].push_back(std::move(ctx));
  }
  return file;
}

void write_scores_file(std::ostream& out, const ScoresFile& file) {
  out << "# contro-scores v1\n";
  out << "# estimator=" << file.estimator << "\n";
  out << "# aux=" << file.aux_column << "\n";
  for (const auto& [key, value] : file.config) {
    check_field(key, "config key");
    check_field(value, "config value");
    out << "# " << key << "=" << value << "\n";
  }
  for (const ScoreRow& row : file.rows) {
    check_field(row.concept_id, "concept id");
    out << row.concept_id << "\t" << format_double(row.score) << "\t"
        << row.aux << "\n";
  }
  for (const UnscorableRow& row : file.unscorable) {
    check_field(row.concept_id, "concept id");
    check_field(row.reason, "reason");
    out << row.concept_id << "\t" << row.reason << "\n";
  }
}

ScoresFile read_scores_file(std::istream& in, const std::string& stream_name) {
  HeaderReader reader{in, stream_name};
  if (!reader.advance() || reader.line != "# contro-scores v1")
    throw std::runtime_error(stream_name + ": not a contro-scores v1 file");
  ScoresFile file;
  while (reader.advance()) {
    if (reader.line.empty()) continue;
    std::string_view key, value;
    if (parse_header_entry(reader.line, key, value)) {
      if (key == "estimator")
        file.estimator = std::string(value);
      else if (key == "aux")
        file.aux_column = std::string(value);
      else
        file.config.emplace_back(std::string(key), std::string(value));
      continue;
    }
    auto fields = split(reader.line, '\t');
    if (fields.size() == 3) {
      ScoreRow row;
      row.concept_id = std::string(fields[0]);
      row.score = parse_double(fields[1], "score");
      row.aux = parse_ll(fields[2], "aux count");
      file.rows.push_back(std::move(row));
    } else if (fields.size() == 2) {
      file.unscorable.push_back(
          {std::string(fields[0]), std::string(fields[1])});
    } else {
      reader.fail("expected a score row (3 fields) or unscorable row (2)");
    }
  }
  if (file.estimator != "nb" && file.estimator != "nn" &&
      file.estimator != "nn-weighted")
    throw std::runtime_error(stream_name + ": unknown estimator '" +
                             file.estimator + "'");
  return file;
}

}  // namespace contro
