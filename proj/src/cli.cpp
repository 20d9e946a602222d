#include "diraccbd/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "diraccbd/analysis.hpp"
#include "diraccbd/dsl.hpp"
#include "diraccbd/engine.hpp"
#include "diraccbd/error.hpp"
#include "diraccbd/trace_io.hpp"

namespace diraccbd::cli {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

namespace {

struct RunArgs {
  std::string file;
  std::string top;
  std::string mode = "symbolic";
  double step = 0.0;
  double end = 0.0;
  double zc_tol = 1e-9;
  double min_step = 1e-12;
  std::vector<std::string> watch;
  std::string format = "csv";
  std::string out;
  std::string impulses;
};

struct TableArgs {
  unsigned order = 0;
  double step = 0.0;
  double amplitude = 1.0;
};

struct CompareArgs {
  std::string a, b;
  double rel_tol = 1e-12;
  std::string impulses_a, impulses_b;
};

struct PlotArgs {
  std::string trace, impulses, out;
};

json error_json(const CbdError& e) {
  json j{{"code", std::string(to_string(e.code()))}, {"message", e.detail()}};
  if (!e.block_path().empty()) j["block"] = e.block_path();
  return j;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw CbdError(ErrorCode::IoError, "cannot write '" + path + "'");
  f << content;
  if (!f) throw CbdError(ErrorCode::IoError, "write to '" + path + "' failed");
}

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  json manifest{{"command", "run"}, {"source", a.file}, {"top", a.top},    {"mode", a.mode},
                {"h", a.step},      {"t_end", a.end},   {"zc_tol", a.zc_tol}, {"h_min", a.min_step},
                {"format", a.format}};
  auto finish = [&](int status, const CbdError* e) {
    manifest["status"] = status == 0 ? "ok" : "error";
    if (!manifest.contains("warnings")) manifest["warnings"] = json::array();
    if (e) {
      manifest["error"] = error_json(*e);
      err << e->what() << '\n';
    }
    out << manifest.dump() << '\n';
    return status;
  };

  SimConfig config;
  FlatGraph flat;
  try {
    std::ifstream in(a.file, std::ios::binary);
    if (!in) throw CbdError(ErrorCode::IoError, "cannot read '" + a.file + "'");
    std::ostringstream text;
    text << in.rdbuf();
    manifest["source_fnv1a64"] = hex64(fnv1a64(text.str()));
    auto mode = parse_mode(a.mode);
    if (!mode) throw CbdError(ErrorCode::InvalidConfig, "mode must be symbolic or numerical");
    config.mode = *mode;
    config.step = a.step;
    config.end = a.end;
    config.zc_tol = a.zc_tol;
    config.min_step = a.min_step;
    config.watch = a.watch;
    config.validate();
    const Model model = dsl::load_model(text.str());
    flat = flatten(model, a.top);
    std::vector<std::string> watched = config.watch;
    if (watched.empty()) watched = flat.top_outputs;
    if (watched.empty()) {
      for (const auto& b : flat.blocks) watched.push_back(b.path);
    }
    for (const auto& w : watched) {
      if (!flat.find_signal(w)) throw CbdError(ErrorCode::UnknownSignal, "no signal named '" + w + "'");
    }
    manifest["watch"] = watched;
  } catch (const CbdError& e) {
    return finish(1, &e);
  }

  try {
    const Trace trace = simulate(flat, config);
    const auto format = a.format == "json" ? TraceFormat::Json : TraceFormat::Csv;
    std::ostringstream trace_text;
    write_trace(trace_text, trace, format);
    write_file(a.out, trace_text.str());
    if (!a.impulses.empty()) {
      std::ostringstream imp_text;
      write_impulses(imp_text, trace.impulses, format);
      write_file(a.impulses, imp_text.str());
    }
    manifest["steps"] = trace.times.size();
    manifest["impulse_events"] = trace.impulses.size();
    json warnings = json::array();
    for (const auto& w : trace.warnings) {
      warnings.push_back({{"kind", w.kind}, {"time", w.time}, {"message", w.message}});
    }
    manifest["warnings"] = warnings;
  } catch (const CbdError& e) {
    return finish(2, &e);
  }
  return finish(0, nullptr);
}

int cmd_table(const TableArgs& a, std::ostream& out, std::ostream& err) {
  try {
    if (a.order > 1000) throw CbdError(ErrorCode::InvalidArgument, "order above 1000 is not supported");
    if (!(std::isfinite(a.amplitude) && a.amplitude >= 0.0)) {
      throw CbdError(ErrorCode::InvalidArgument, "amplitude must be non-negative");
    }
    const DiffTable table = finite_difference_table(a.order, a.step);
    out << "offset";
    for (unsigned k = 0; k <= a.order; ++k) out << ",order_" << k;
    out << '\n';
    for (int m = table.first_offset(); m <= table.last_offset(); ++m) {
      out << m;
      for (unsigned k = 0; k <= a.order; ++k) out << ',' << format_double(table.at(m, k));
      out << '\n';
    }
    const MagnitudeEstimate cascade =
        a.order == 0 ? MagnitudeEstimate{a.amplitude, false} : max_magnitude(a.order, a.step, a.amplitude);
    out << "# max_magnitude_table=" << format_double(cascade.value) << '\n';
    out << "# max_magnitude_printed_formula=" << format_double(printed_max_magnitude(a.order, a.step, a.amplitude))
        << '\n';
    if (cascade.overflow_risk) out << "# overflow_risk=true\n";
  } catch (const CbdError& e) {
    err << e.what() << '\n';
    return 1;
  }
  return 0;
}

int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream& err) {
  Trace ta, tb;
  try {
    if (!(a.rel_tol >= 0.0)) throw CbdError(ErrorCode::InvalidArgument, "relative tolerance must be non-negative");
    ta = read_trace_file(a.a);
    tb = read_trace_file(a.b);
    if (!a.impulses_a.empty()) attach_impulses(ta, read_impulses_file(a.impulses_a));
    if (!a.impulses_b.empty()) attach_impulses(tb, read_impulses_file(a.impulses_b));
  } catch (const CbdError& e) {
    err << e.what() << '\n';
    out << json{{"status", "error"}, {"error", error_json(e)}}.dump() << '\n';
    return 1;
  }
  ComparisonReport report;
  try {
    report = compare_traces(ta, tb, a.rel_tol);
  } catch (const CbdError& e) {
    err << e.what() << '\n';
    out << json{{"status", "error"}, {"error", error_json(e)}}.dump() << '\n';
    return e.code() == ErrorCode::TimeGridMismatch ? 3 : 1;
  }
  json signals = json::array();
  for (const auto& s : report.signals) {
    signals.push_back({{"signal", s.signal}, {"left", s.left}, {"right", s.right}, {"worst_time", s.worst_time}});
  }
  json impulses = json::array();
  for (const auto& m : report.impulses) {
    impulses.push_back({{"time", m.time},
                        {"signal", m.signal},
                        {"coefficient", m.coefficient},
                        {"step", m.step},
                        {"expected", m.expected},
                        {"observed", m.observed},
                        {"relative_error", m.relative_error},
                        {"matched", m.matched}});
  }
  json delays = json::array();
  for (const auto& d : report.delays) {
    delays.push_back({{"time", d.time}, {"signal", d.signal}, {"order", d.order}, {"delay", d.delay}});
  }
  out << json{{"status", report.pass ? "pass" : "fail"},
              {"rel_tol", report.rel_tol},
              {"max_deviation", report.max_deviation},
              {"steps", ta.times.size()},
              {"signals", signals},
              {"impulses", impulses},
              {"delays", delays}}
             .dump()
      << '\n';
  return report.pass ? 0 : 2;
}

int cmd_plotdata(const PlotArgs& a, std::ostream& out, std::ostream& err) {
  try {
    Trace trace = read_trace_file(a.trace);
    if (!a.impulses.empty()) attach_impulses(trace, read_impulses_file(a.impulses));
    write_file(a.out, plot_data(trace));
    std::size_t discontinuities = 0;
    for (const auto& samples : trace.samples) {
      for (const auto& x : samples) discontinuities += x.left != x.right;
    }
    out << json{{"status", "ok"}, {"out", a.out}, {"discontinuities", discontinuities},
                {"arrows", trace.impulses.size()}}
               .dump()
        << '\n';
  } catch (const CbdError& e) {
    err << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Causal block diagram simulator with first-class Dirac impulses", "diraccbd"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "simulate a model and write its trace");
  run_cmd->add_option("file", run_args.file, "model file (.cbd)")->required();
  run_cmd->add_option("--top", run_args.top, "definition to simulate")->required();
  run_cmd->add_option("--mode", run_args.mode, "symbolic or numerical")
      ->check(CLI::IsMember({"symbolic", "numerical"}))
      ->capture_default_str();
  run_cmd->add_option("--step", run_args.step, "nominal step h")->required();
  run_cmd->add_option("--end", run_args.end, "end time")->required();
  run_cmd->add_option("--zc-tol", run_args.zc_tol, "zero-crossing tolerance")->capture_default_str();
  run_cmd->add_option("--min-step", run_args.min_step, "smallest bisected step")->capture_default_str();
  run_cmd->add_option("--watch", run_args.watch, "signals to record")->delimiter(',');
  run_cmd->add_option("--format", run_args.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  run_cmd->add_option("--out", run_args.out, "trace output path")->required();
  run_cmd->add_option("--impulses", run_args.impulses, "impulse log output path");

  TableArgs table_args;
  auto* table_cmd = app.add_subcommand("table", "print the finite-difference table of a unit step");
  table_cmd->add_option("--order", table_args.order, "highest derivative order n")->required();
  table_cmd->add_option("--step", table_args.step, "step h")->required();
  table_cmd->add_option("--amplitude", table_args.amplitude, "discontinuity amplitude D")->capture_default_str();

  CompareArgs compare_args;
  auto* compare_cmd = app.add_subcommand("compare", "compare two traces step by step");
  compare_cmd->add_option("a", compare_args.a, "first trace")->required();
  compare_cmd->add_option("b", compare_args.b, "second trace")->required();
  compare_cmd->add_option("--rel-tol", compare_args.rel_tol, "relative tolerance")->capture_default_str();
  compare_cmd->add_option("--impulses-a", compare_args.impulses_a, "impulse log of the first trace");
  compare_cmd->add_option("--impulses-b", compare_args.impulses_b, "impulse log of the second trace");

  PlotArgs plot_args;
  auto* plot_cmd = app.add_subcommand("plotdata", "emit polyline segments and impulse arrows");
  plot_cmd->add_option("--trace", plot_args.trace, "trace file")->required();
  plot_cmd->add_option("--impulses", plot_args.impulses, "impulse log");
  plot_cmd->add_option("--out", plot_args.out, "output JSON path")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return 1;
  }

  if (run_cmd->parsed()) return cmd_run(run_args, out, err);
  if (table_cmd->parsed()) return cmd_table(table_args, out, err);
  if (compare_cmd->parsed()) return cmd_compare(compare_args, out, err);
  return cmd_plotdata(plot_args, out, err);
}

}  // namespace diraccbd::cli
