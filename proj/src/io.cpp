#include "nestdiag/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "nestdiag/error.hpp"
#include "nestdiag/report.hpp"

namespace nestdiag {

namespace {

constexpr std::string_view kNativeMagic = "# nestdiag-run v";

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const auto start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

// Splits into lines, dropping a trailing '\r'.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    start = end + 1;
  }
  return out;
}

double parse_number(std::string_view tok, std::size_t line) {
  auto s = tok;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc::result_out_of_range) {
    // from_chars leaves v untouched on overflow and underflow.
    v = std::strtod(std::string(s).c_str(), nullptr);
  } else if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(line, "not a number: '" + std::string(tok) + "'");
  }
  return v;
}

long long parse_integer(std::string_view tok, std::size_t line) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(line, "not an integer: '" + std::string(tok) + "'");
  return v;
}

bool blank_or_comment(std::string_view line) {
  const auto pos = line.find_first_not_of(" \t");
  return pos == std::string_view::npos || line[pos] == '#';
}

}  // namespace

std::string write_native(const NSRun& run) {
  if (run.size() == 0) throw Error("write_native: empty runs cannot be written");
  if (const auto problems = validate_run(run); !problems.empty())
    throw Error("write_native: invalid run: " + problems.front());
  std::ostringstream out;
  out << kNativeMagic << kNativeFormatVersion << '\n';
  out << "dim " << run.dim() << '\n';
  out << "points " << run.size() << '\n';
  for (const auto& [key, value] : run.meta) {
    if (key.empty() || std::any_of(key.begin(), key.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); }))
      throw Error("write_native: meta key '" + key + "' is empty or contains whitespace");
    if (value.find_first_of("\r\n") != std::string::npos)
      throw Error("write_native: meta value for '" + key + "' contains a line break");
    out << "meta " << key << ' ' << value << '\n';
  }
  for (std::size_t i = 0; i < run.size(); ++i) {
    const auto& p = run.points[i];
    for (double x : p.params) out << format_double(x) << ' ';
    out << format_double(p.loglike) << ' ' << format_double(p.birth_loglike) << ' ' << run.nlive[i] << ' '
        << run.thread_labels[i] << '\n';
  }
  return out.str();
}

NSRun read_native(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0].substr(0, kNativeMagic.size()) != kNativeMagic)
    throw ParseError(1, "missing native header '" + std::string(kNativeMagic) + std::to_string(kNativeFormatVersion) + "'");
  const auto version = parse_integer(lines[0].substr(kNativeMagic.size()), 1);
  if (version != kNativeFormatVersion)
    throw ParseError(1, "unsupported native format version " + std::to_string(version) + " (this build reads version " +
                            std::to_string(kNativeFormatVersion) + ")");

  std::optional<std::size_t> dim, count;
  NSRun run;
  std::size_t ln = 1;
  for (; ln < lines.size(); ++ln) {
    const auto line = lines[ln];
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] == "dim" && toks.size() == 2) {
      dim = static_cast<std::size_t>(parse_integer(toks[1], ln + 1));
    } else if (toks[0] == "points" && toks.size() == 2) {
      count = static_cast<std::size_t>(parse_integer(toks[1], ln + 1));
    } else if (toks[0] == "meta" && toks.size() >= 2) {
      // Value is everything after the single space following the key.
      const auto key_end = static_cast<std::size_t>(toks[1].data() - line.data()) + toks[1].size();
      run.meta[std::string(toks[1])] = key_end < line.size() ? std::string(line.substr(key_end + 1)) : std::string();
    } else {
      break;
    }
  }
  if (!dim || !count) throw ParseError(ln + 1, "header must give 'dim' and 'points'");
  if (*count == 0) throw ParseError(ln + 1, "empty runs are not representable");

  const auto columns = *dim + 4;
  for (; ln < lines.size(); ++ln) {
    const auto toks = split_ws(lines[ln]);
    if (toks.empty()) continue;
    if (toks.size() != columns)
      throw ParseError(ln + 1, "expected " + std::to_string(columns) + " columns, found " + std::to_string(toks.size()));
    SamplePoint p;
    p.params.resize(*dim);
    for (std::size_t k = 0; k < *dim; ++k) p.params[k] = parse_number(toks[k], ln + 1);
    p.loglike = parse_number(toks[*dim], ln + 1);
    p.birth_loglike = parse_number(toks[*dim + 1], ln + 1);
    run.points.push_back(std::move(p));
    run.nlive.push_back(static_cast<int>(parse_integer(toks[*dim + 2], ln + 1)));
    run.thread_labels.push_back(static_cast<int>(parse_integer(toks[*dim + 3], ln + 1)));
  }
  if (run.size() != *count)
    throw ParseError(0, "header declares " + std::to_string(*count) + " points, found " + std::to_string(run.size()));
  if (const auto problems = validate_run(run); !problems.empty()) throw ParseError(0, "invalid run: " + problems.front());
  return run;
}

NSRun parse_dead_birth(std::string_view text, std::optional<double> prior_birth_sentinel) {
  std::vector<SamplePoint> points;
  std::vector<std::size_t> line_of;
  std::optional<std::size_t> columns;
  const auto lines = split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (blank_or_comment(lines[ln])) continue;
    const auto toks = split_ws(lines[ln]);
    if (!columns) {
      if (toks.size() < 3)
        throw ParseError(ln + 1, "need at least 3 columns (params, loglike, birth), found " + std::to_string(toks.size()));
      columns = toks.size();
    } else if (toks.size() != *columns) {
      throw ParseError(ln + 1, "ragged row: expected " + std::to_string(*columns) + " columns, found " +
                                   std::to_string(toks.size()));
    }
    const auto d = *columns - 2;
    SamplePoint p;
    p.params.resize(d);
    for (std::size_t k = 0; k < d; ++k) p.params[k] = parse_number(toks[k], ln + 1);
    p.loglike = parse_number(toks[d], ln + 1);
    p.birth_loglike = parse_number(toks[d + 1], ln + 1);
    if (!std::isfinite(p.loglike)) throw ParseError(ln + 1, "non-finite loglike");
    if (std::isnan(p.birth_loglike) || !(p.birth_loglike < p.loglike))
      throw ParseError(ln + 1, "birth loglike must be below loglike");
    points.push_back(std::move(p));
    line_of.push_back(ln + 1);
  }
  if (points.empty()) throw ParseError(0, "no dead points");

  double sentinel = kNegInf;
  if (prior_birth_sentinel) {
    sentinel = *prior_birth_sentinel;
  } else {
    double min_birth = INFINITY, min_loglike = INFINITY;
    for (const auto& p : points) {
      min_birth = std::min(min_birth, p.birth_loglike);
      min_loglike = std::min(min_loglike, p.loglike);
    }
    if (min_birth < min_loglike) sentinel = min_birth;
  }
  for (auto& p : points) {
    if (p.birth_loglike <= sentinel) p.birth_loglike = kNegInf;
  }

  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a].loglike < points[b].loglike; });
  std::vector<SamplePoint> sorted;
  sorted.reserve(points.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k > 0 && points[order[k]].loglike == points[order[k - 1]].loglike)
      throw ParseError(line_of[order[k]], "loglike ties with line " + std::to_string(line_of[order[k - 1]]));
    sorted.push_back(points[order[k]]);
  }
  try {
    chain_threads(sorted);
  } catch (const BirthContourMissing& e) {
    throw ParseError(line_of[order[e.index()]], "birth loglike " + format_double(sorted[e.index()].birth_loglike) +
                                                    " matches no dead point's loglike");
  } catch (const BirthChainAmbiguous& e) {
    throw ParseError(line_of[order[e.index()]], "birth loglike " + format_double(sorted[e.index()].birth_loglike) +
                                                    " has no unclaimed predecessor");
  }
  return make_run(std::move(sorted));
}

std::string write_dead_birth(const NSRun& run) {
  if (run.size() == 0) throw Error("write_dead_birth: empty run");
  std::ostringstream out;
  for (const auto& p : run.points) {
    if (!(p.loglike > kDeadBirthPriorValue))
      throw Error("write_dead_birth: loglike " + format_double(p.loglike) + " is not above the prior-birth marker");
    for (double x : p.params) out << format_double(x) << ' ';
    out << format_double(p.loglike) << ' '
        << format_double(p.birth_loglike == kNegInf ? kDeadBirthPriorValue : p.birth_loglike) << '\n';
  }
  return out.str();
}

InputFormat parse_input_format(std::string_view name) {
  if (name == "auto") return InputFormat::automatic;
  if (name == "native") return InputFormat::native;
  if (name == "dead-birth") return InputFormat::dead_birth;
  throw Error("unknown input format '" + std::string(name) + "' (expected auto, native or dead-birth)");
}

InputFormat detect_format(std::string_view text) {
  return text.substr(0, kNativeMagic.size()) == kNativeMagic ? InputFormat::native : InputFormat::dead_birth;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
  }
}

NSRun read_run_file(const std::filesystem::path& path, InputFormat format, std::optional<double> prior_birth_sentinel) {
  const auto text = read_text_file(path);
  if (format == InputFormat::automatic) format = detect_format(text);
  try {
    return format == InputFormat::native ? read_native(text) : parse_dead_birth(text, prior_birth_sentinel);
  } catch (const ParseError& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
}

}  // namespace nestdiag
