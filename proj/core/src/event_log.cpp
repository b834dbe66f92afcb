#include <algorithm>
#include <charconv>
#include <sstream>

#include "m2m/event.hpp"

namespace m2m {

const char* to_string(Role role) noexcept {
  return role == Role::Operator ? "operator" : "vehicle";
}

const char* to_string(EventSource source) noexcept {
  switch (source) {
    case EventSource::HallEdge: return "hall";
    case EventSource::SharedPulse: return "pulse";
    case EventSource::Synthetic: return "synthetic";
  }
  return "hall";
}

std::optional<EventSource> parse_source(std::string_view text) noexcept {
  if (text == "hall") return EventSource::HallEdge;
  if (text == "pulse") return EventSource::SharedPulse;
  if (text == "synthetic") return EventSource::Synthetic;
  return std::nullopt;
}

void EventLog::validate() const {
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.node != node) {
      throw Error(ErrorCode::UnparseableLine, "record node differs from log node", i + 1);
    }
    if (r.t_wall_ns <= 0) {
      throw Error(ErrorCode::UnparseableLine, "t_wall_ns must be positive", i + 1);
    }
    if (i > 0) {
      if (r.seq <= records[i - 1].seq) {
        throw Error(ErrorCode::NonMonotonicSeq, "seq not strictly increasing", i + 1);
      }
      if (r.t_wall_ns < records[i - 1].t_wall_ns) {
        throw Error(ErrorCode::NonMonotonicTime, "t_wall_ns decreasing", i + 1);
      }
    }
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(s.substr(start)));
      return out;
    }
    out.push_back(trim(s.substr(start, pos - start)));
    start = pos + 1;
  }
}

template <typename Int>
std::optional<Int> to_int(std::string_view s) {
  Int value{};
  if (s.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

bool looks_numeric(std::string_view s) {
  return s.empty() || to_int<Nanos>(s).has_value();
}

std::optional<Role> role_from_id(std::string_view id) {
  if (id == "operator") return Role::Operator;
  if (id == "vehicle") return Role::Vehicle;
  return std::nullopt;
}

struct Columns {
  int node = 0;
  int seq = 1;
  int t_wall = 2;
  int t_mono = -1;
  int source = -1;
  std::size_t count = 3;
};

// Raised for a single bad line; converted to Error or counted in lenient mode.
struct LineFault {
  ErrorCode code;
  std::string what;
};

class LogBuilder {
 public:
  LogBuilder(const ParseOptions& options) : options_(options) {}

  void add(EventRecord rec, std::size_t line_no, ParseResult& result) {
    try {
      accept(rec);
      result.log.records.push_back(std::move(rec));
    } catch (const LineFault& fault) {
      if (!options_.lenient) throw Error(fault.code, fault.what, line_no);
      result.rejected.push_back({line_no, fault.code});
    }
  }

  NodeId resolve_node(std::string_view id) const {
    NodeId node;
    node.id = std::string(id);
    if (options_.role) {
      node.role = *options_.role;
    } else if (auto r = role_from_id(id)) {
      node.role = *r;
    } else {
      throw LineFault{ErrorCode::UnparseableLine,
                      "cannot infer role for node '" + std::string(id) + "'"};
    }
    return node;
  }

 private:
  void accept(const EventRecord& rec) {
    if (rec.t_wall_ns <= 0) throw LineFault{ErrorCode::UnparseableLine, "t_wall_ns must be positive"};
    if (node_ && rec.node != *node_) throw LineFault{ErrorCode::UnparseableLine, "mixed nodes in one log"};
    if (last_) {
      if (rec.seq <= last_->seq) throw LineFault{ErrorCode::NonMonotonicSeq, "seq not strictly increasing"};
      if (rec.t_wall_ns < last_->t_wall_ns) {
        throw LineFault{ErrorCode::NonMonotonicTime, "t_wall_ns decreasing"};
      }
    }
    if (!node_) node_ = rec.node;
    last_ = rec;
  }

  const ParseOptions& options_;
  std::optional<NodeId> node_;
  std::optional<EventRecord> last_;
};

template <typename LineFn>
void for_each_line(std::string_view text, LineFn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    fn(trim(text.substr(start, end - start)), line_no);
    start = end + 1;
  }
}

Columns header_columns(const std::vector<std::string_view>& fields) {
  Columns c;
  c.node = c.seq = c.t_wall = -1;
  c.count = fields.size();
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto f = fields[i];
    const int idx = static_cast<int>(i);
    if (f == "node") c.node = idx;
    else if (f == "seq") c.seq = idx;
    else if (f == "t_wall_ns") c.t_wall = idx;
    else if (f == "t_mono_ns") c.t_mono = idx;
    else if (f == "source") c.source = idx;
    else throw LineFault{ErrorCode::UnparseableLine, "unknown column '" + std::string(f) + "'"};
  }
  if (c.node < 0 || c.seq < 0 || c.t_wall < 0) {
    throw LineFault{ErrorCode::UnparseableLine, "header lacks node,seq,t_wall_ns"};
  }
  return c;
}

Columns positional_columns(const std::vector<std::string_view>& fields) {
  Columns c;
  c.count = fields.size();
  if (fields.size() == 4) {
    if (looks_numeric(fields[3])) c.t_mono = 3;
    else c.source = 3;
  } else if (fields.size() == 5) {
    c.t_mono = 3;
    c.source = 4;
  } else if (fields.size() != 3) {
    throw LineFault{ErrorCode::UnparseableLine, "expected 3 to 5 fields"};
  }
  return c;
}

EventRecord csv_record(const std::vector<std::string_view>& fields, const Columns& c,
                       const LogBuilder& builder) {
  if (fields.size() != c.count) throw LineFault{ErrorCode::UnparseableLine, "field count mismatch"};
  EventRecord rec;
  if (fields[c.node].empty()) throw LineFault{ErrorCode::UnparseableLine, "empty node id"};
  rec.node = builder.resolve_node(fields[c.node]);
  auto seq = to_int<std::uint64_t>(fields[c.seq]);
  auto wall = to_int<Nanos>(fields[c.t_wall]);
  if (!seq || !wall) throw LineFault{ErrorCode::UnparseableLine, "bad seq or t_wall_ns"};
  rec.seq = *seq;
  rec.t_wall_ns = *wall;
  if (c.t_mono >= 0 && !fields[c.t_mono].empty()) {
    auto mono = to_int<Nanos>(fields[c.t_mono]);
    if (!mono) throw LineFault{ErrorCode::UnparseableLine, "bad t_mono_ns"};
    rec.t_mono_ns = *mono;
  }
  if (c.source >= 0 && !fields[c.source].empty()) {
    auto src = parse_source(fields[c.source]);
    if (!src) throw LineFault{ErrorCode::UnparseableLine, "bad source"};
    rec.source = *src;
  }
  return rec;
}

void parse_csv(std::string_view text, const ParseOptions& options, ParseResult& result) {
  LogBuilder builder(options);
  std::optional<Columns> columns;
  bool first_data_line = true;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (line.empty()) return;
    if (line.front() == '#') {
      constexpr std::string_view kMeta = "#meta ";
      if (line.substr(0, kMeta.size()) == kMeta) {
        auto kv = line.substr(kMeta.size());
        auto eq = kv.find('=');
        if (eq != std::string_view::npos) {
          result.log.meta[std::string(trim(kv.substr(0, eq)))] = std::string(kv.substr(eq + 1));
        }
      }
      return;
    }
    try {
      auto fields = split(line, ',');
      if (first_data_line) {
        first_data_line = false;
        if (fields[0] == "node") {
          columns = header_columns(fields);
          return;
        }
      }
      const Columns c = columns ? *columns : positional_columns(fields);
      builder.add(csv_record(fields, c, builder), line_no, result);
    } catch (const LineFault& fault) {
      if (!options.lenient) throw Error(fault.code, fault.what, line_no);
      result.rejected.push_back({line_no, fault.code});
    }
  });
}

void parse_kernel_ring(std::string_view text, const ParseOptions& options, ParseResult& result) {
  LogBuilder builder(options);
  constexpr std::string_view kTag = "m2m_irq:";
  std::string id = options.node_id;
  if (id.empty()) id = options.role ? to_string(*options.role) : "operator";
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    auto tag = line.find(kTag);
    if (tag == std::string_view::npos) return;
    try {
      EventRecord rec;
      rec.node = builder.resolve_node(id);
      bool have_seq = false, have_ts = false, have_src = false;
      for (auto token : split(trim(line.substr(tag + kTag.size())), ' ')) {
        if (token.empty()) continue;
        auto eq = token.find('=');
        if (eq == std::string_view::npos) throw LineFault{ErrorCode::UnparseableLine, "bad token"};
        auto key = token.substr(0, eq);
        auto value = token.substr(eq + 1);
        if (key == "seq" && !have_seq) {
          auto v = to_int<std::uint64_t>(value);
          if (!v) throw LineFault{ErrorCode::UnparseableLine, "bad seq"};
          rec.seq = *v;
          have_seq = true;
        } else if (key == "ts" && !have_ts) {
          auto v = to_int<std::uint64_t>(value);
          if (!v || *v > static_cast<std::uint64_t>(INT64_MAX)) {
            throw LineFault{ErrorCode::UnparseableLine, "bad ts"};
          }
          rec.t_wall_ns = static_cast<Nanos>(*v);
          have_ts = true;
        } else if (key == "src" && !have_src) {
          if (value == "hall") rec.source = EventSource::HallEdge;
          else if (value == "pulse") rec.source = EventSource::SharedPulse;
          else throw LineFault{ErrorCode::UnparseableLine, "bad src"};
          have_src = true;
        } else {
          throw LineFault{ErrorCode::UnparseableLine, "unexpected token"};
        }
      }
      if (!have_seq || !have_ts || !have_src) {
        throw LineFault{ErrorCode::UnparseableLine, "missing seq/ts/src"};
      }
      builder.add(std::move(rec), line_no, result);
    } catch (const LineFault& fault) {
      if (!options.lenient) throw Error(fault.code, fault.what, line_no);
      result.rejected.push_back({line_no, fault.code});
    }
  });
}

}  // namespace

ParseResult parse_log_detailed(std::string_view text, LogFormat format, const ParseOptions& options) {
  ParseResult result;
  if (format == LogFormat::Csv) parse_csv(text, options, result);
  else parse_kernel_ring(text, options, result);

  if (result.log.records.empty()) {
    if (!options.allow_empty) throw Error(ErrorCode::EmptyLog, "log contains no events");
    if (options.role) {
      result.log.node.role = *options.role;
      result.log.node.id = options.node_id.empty() ? to_string(*options.role) : options.node_id;
    }
  } else {
    result.log.node = result.log.records.front().node;
  }
  if (options.lenient && !result.rejected.empty()) {
    result.log.meta["rejected_lines"] = std::to_string(result.rejected.size());
  }
  return result;
}

EventLog parse_log(std::string_view text, LogFormat format, const ParseOptions& options) {
  return parse_log_detailed(text, format, options).log;
}

std::string write_log(const EventLog& log) {
  const bool with_mono = std::any_of(log.records.begin(), log.records.end(),
                                     [](const EventRecord& r) { return r.t_mono_ns.has_value(); });
  std::ostringstream out;
  for (const auto& [key, value] : log.meta) out << "#meta " << key << '=' << value << '\n';
  out << (with_mono ? "node,seq,t_wall_ns,t_mono_ns,source\n" : "node,seq,t_wall_ns,source\n");
  for (const auto& r : log.records) {
    out << r.node.id << ',' << r.seq << ',' << r.t_wall_ns << ',';
    if (with_mono) {
      if (r.t_mono_ns) out << *r.t_mono_ns;
      out << ',';
    }
    out << to_string(r.source) << '\n';
  }
  return out.str();
}

}  // namespace m2m
