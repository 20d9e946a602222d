#include "diraccbd/trace_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "diraccbd/error.hpp"

namespace diraccbd {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trace(std::ostream& out, const Trace& trace, TraceFormat format) {
  if (format == TraceFormat::Csv) {
    out << "time,signal,left,right\n";
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
      for (std::size_t s = 0; s < trace.signals.size(); ++s) {
        const auto& x = trace.samples[s][k];
        out << format_double(trace.times[k]) << ',' << trace.signals[s] << ',' << format_double(x.left) << ','
            << format_double(x.right) << '\n';
      }
    }
    return;
  }
  json rows = json::array();
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    for (std::size_t s = 0; s < trace.signals.size(); ++s) {
      const auto& x = trace.samples[s][k];
      rows.push_back({{"time", trace.times[k]}, {"signal", trace.signals[s]}, {"left", x.left}, {"right", x.right}});
    }
  }
  out << rows.dump(1) << '\n';
}

void write_impulses(std::ostream& out, const std::vector<ImpulseEvent>& events, TraceFormat format) {
  if (format == TraceFormat::Csv) {
    out << "time,signal,order,coefficient\n";
    for (const auto& e : events) {
      out << format_double(e.time) << ',' << e.signal << ',' << e.order << ',' << format_double(e.coefficient) << '\n';
    }
    return;
  }
  json rows = json::array();
  for (const auto& e : events) {
    rows.push_back({{"time", e.time}, {"signal", e.signal}, {"order", e.order}, {"coefficient", e.coefficient}});
  }
  out << rows.dump(1) << '\n';
}

namespace {

[[noreturn]] void malformed(const std::string& why) { throw CbdError(ErrorCode::InvalidArgument, why); }

double parse_double(const std::string& field, std::size_t line) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) malformed("line " + std::to_string(line) + ": bad number '" + field + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool looks_like_json(std::istream& in) {
  in >> std::ws;
  return in.peek() == '[' || in.peek() == '{';
}

std::vector<std::vector<std::string>> csv_rows(std::istream& in, const std::string& header) {
  std::string line;
  if (!std::getline(in, line)) malformed("empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) malformed("expected header '" + header + "', found '" + line + "'");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != 4) malformed("line " + std::to_string(rows.size() + 2) + ": expected 4 fields");
    rows.push_back(std::move(fields));
  }
  return rows;
}

json parse_json(std::istream& in) {
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    malformed(std::string("invalid JSON: ") + e.what());
  }
}

struct Row {
  double time;
  std::string signal;
  double left;
  double right;
};

Trace assemble(const std::vector<Row>& rows) {
  Trace trace;
  std::map<std::string, std::size_t> index;
  for (const auto& r : rows) {
    if (index.emplace(r.signal, trace.signals.size()).second) trace.signals.push_back(r.signal);
  }
  trace.samples.resize(trace.signals.size());
  const std::size_t width = trace.signals.size();
  if (width == 0) return trace;
  if (rows.size() % width != 0) malformed("rows do not cover every signal at every time");
  for (std::size_t k = 0; k * width < rows.size(); ++k) {
    const double t = rows[k * width].time;
    if (!trace.times.empty() && !(t > trace.times.back())) malformed("times must strictly increase");
    trace.times.push_back(t);
    for (std::size_t s = 0; s < width; ++s) {
      const Row& r = rows[k * width + s];
      if (r.time != t || r.signal != trace.signals[s]) {
        malformed("row for time " + format_double(t) + " is out of order or missing");
      }
      trace.samples[s].emplace_back(r.left, r.right);
    }
  }
  return trace;
}

}  // namespace

Trace read_trace(std::istream& in) {
  std::vector<Row> rows;
  if (looks_like_json(in)) {
    const json doc = parse_json(in);
    if (!doc.is_array()) malformed("trace JSON must be an array");
    try {
      for (const auto& r : doc) {
        rows.push_back({r.at("time").get<double>(), r.at("signal").get<std::string>(), r.at("left").get<double>(),
                        r.at("right").get<double>()});
      }
    } catch (const json::exception& e) {
      malformed(std::string("bad trace row: ") + e.what());
    }
  } else {
    std::size_t line = 1;
    for (const auto& f : csv_rows(in, "time,signal,left,right")) {
      ++line;
      rows.push_back({parse_double(f[0], line), f[1], parse_double(f[2], line), parse_double(f[3], line)});
    }
  }
  return assemble(rows);
}

std::vector<ImpulseEvent> read_impulses(std::istream& in) {
  std::vector<ImpulseEvent> events;
  if (looks_like_json(in)) {
    const json doc = parse_json(in);
    if (!doc.is_array()) malformed("impulse JSON must be an array");
    try {
      for (const auto& r : doc) {
        events.push_back({r.at("time").get<double>(), r.at("signal").get<std::string>(), r.at("order").get<unsigned>(),
                          r.at("coefficient").get<double>()});
      }
    } catch (const json::exception& e) {
      malformed(std::string("bad impulse row: ") + e.what());
    }
    return events;
  }
  std::size_t line = 1;
  for (const auto& f : csv_rows(in, "time,signal,order,coefficient")) {
    ++line;
    unsigned order = 0;
    auto [ptr, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), order);
    if (ec != std::errc() || ptr != f[2].data() + f[2].size()) {
      malformed("line " + std::to_string(line) + ": bad order '" + f[2] + "'");
    }
    events.push_back({parse_double(f[0], line), f[1], order, parse_double(f[3], line)});
  }
  return events;
}

namespace {

std::ifstream open(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CbdError(ErrorCode::IoError, "cannot read '" + path + "'");
  return in;
}

}  // namespace

Trace read_trace_file(const std::string& path) {
  auto in = open(path);
  return read_trace(in);
}

std::vector<ImpulseEvent> read_impulses_file(const std::string& path) {
  auto in = open(path);
  return read_impulses(in);
}

void attach_impulses(Trace& trace, const std::vector<ImpulseEvent>& events) {
  std::map<double, std::size_t> step_of;
  for (std::size_t k = 0; k < trace.times.size(); ++k) step_of[trace.times[k]] = k;
  for (const auto& e : events) {
    const std::size_t s = trace.signal_index(e.signal);
    auto it = step_of.find(e.time);
    if (it == step_of.end()) malformed("impulse at " + format_double(e.time) + " matches no committed time");
    if (e.coefficient == 0.0) malformed("impulse coefficient must be nonzero");
    trace.samples[s][it->second].impulses.accumulate(e.order, e.coefficient);
    trace.impulses.push_back(e);
  }
}

std::string plot_data(const Trace& trace) {
  json signals = json::array();
  for (std::size_t s = 0; s < trace.signals.size(); ++s) {
    json segments = json::array();
    json current = json::array();
    json arrows = json::array();
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
      const double t = trace.times[k];
      const auto& x = trace.samples[s][k];
      current.push_back({t, x.left});
      if (x.left != x.right) {
        segments.push_back(std::move(current));
        current = json::array({json::array({t, x.right})});
      }
      for (const auto& [order, coefficient] : x.impulses) {
        arrows.push_back({{"t", t}, {"order", order}, {"coefficient", coefficient}});
      }
    }
    if (!current.empty()) segments.push_back(std::move(current));
    signals.push_back({{"name", trace.signals[s]}, {"segments", std::move(segments)}, {"arrows", std::move(arrows)}});
  }
  return json{{"signals", std::move(signals)}}.dump(1) + "\n";
}

}  // namespace diraccbd
