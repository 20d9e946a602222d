#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "diraccbd/analysis.hpp"
#include "diraccbd/dsl.hpp"
#include "diraccbd/engine.hpp"
#include "diraccbd/signal.hpp"
#include "diraccbd/trace_io.hpp"

namespace py = pybind11;
using namespace diraccbd;

namespace {

ImpulseVector to_impulses(const std::map<unsigned, double>& coefficients) {
  ImpulseVector v;
  for (const auto& [order, c] : coefficients) v.set(order, c);
  return v;
}

std::map<unsigned, double> from_impulses(const ImpulseVector& v) {
  std::map<unsigned, double> out;
  for (const auto& [order, c] : v) out[order] = c;
  return out;
}

py::dict report_dict(const ComparisonReport& r) {
  py::list signals, impulses, delays;
  for (const auto& s : r.signals) {
    signals.append(py::dict(py::arg("signal") = s.signal, py::arg("left") = s.left, py::arg("right") = s.right,
                            py::arg("worst_time") = s.worst_time));
  }
  for (const auto& m : r.impulses) {
    impulses.append(py::dict(py::arg("time") = m.time, py::arg("signal") = m.signal,
                             py::arg("coefficient") = m.coefficient, py::arg("step") = m.step,
                             py::arg("expected") = m.expected, py::arg("observed") = m.observed,
                             py::arg("relative_error") = m.relative_error, py::arg("matched") = m.matched));
  }
  for (const auto& d : r.delays) {
    delays.append(py::dict(py::arg("time") = d.time, py::arg("signal") = d.signal, py::arg("order") = d.order,
                           py::arg("delay") = d.delay));
  }
  return py::dict(py::arg("pass") = r.pass, py::arg("rel_tol") = r.rel_tol,
                  py::arg("max_deviation") = r.max_deviation, py::arg("signals") = signals,
                  py::arg("impulses") = impulses, py::arg("delays") = delays);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Causal block diagram simulation with Dirac impulses";

  static py::handle error_type =
      py::exception<CbdError>(m, "CbdError", PyExc_RuntimeError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const CbdError& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      exc.attr("block") = e.block_path();
      exc.attr("detail") = e.detail();
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<StepSample>(m, "StepSample")
      .def(py::init([](double left, double right, const std::map<unsigned, double>& impulses) {
             return StepSample{left, right, to_impulses(impulses)};
           }),
           py::arg("left") = 0.0, py::arg("right") = 0.0, py::arg("impulses") = std::map<unsigned, double>{})
      .def_readwrite("left", &StepSample::left)
      .def_readwrite("right", &StepSample::right)
      .def_property(
          "impulses", [](const StepSample& s) { return from_impulses(s.impulses); },
          [](StepSample& s, const std::map<unsigned, double>& v) { s.impulses = to_impulses(v); })
      .def("__eq__", [](const StepSample& a, const StepSample& b) { return a == b; })
      .def("__repr__", [](const StepSample& s) {
        std::ostringstream out;
        out << "StepSample(left=" << format_double(s.left) << ", right=" << format_double(s.right)
            << ", impulses={";
        bool first = true;
        for (const auto& [order, c] : s.impulses) {
          out << (first ? "" : ", ") << order << ": " << format_double(c);
          first = false;
        }
        out << "})";
        return out.str();
      });

  m.def("add_samples", &add_samples, py::arg("a"), py::arg("b"));
  m.def("negate_sample", &negate_sample, py::arg("x"));
  m.def(
      "leibniz_product",
      [](const std::vector<double>& u, const std::map<unsigned, double>& a) {
        return from_impulses(leibniz_product(u, to_impulses(a)));
      },
      py::arg("u_derivatives"), py::arg("coefficients"));

  py::class_<Model>(m, "Model")
      .def_property_readonly("definitions", [](const Model& model) {
        std::vector<std::string> names;
        for (const auto& d : model.definitions) names.push_back(d.name);
        return names;
      });

  m.def(
      "check_model",
      [](const std::string& text) {
        std::vector<py::dict> out;
        const auto parsed = dsl::parse(text);
        auto diags = parsed.diagnostics;
        if (parsed.ok()) diags = dsl::validate(parsed.model).diagnostics;
        for (const auto& d : diags) {
          out.push_back(py::dict(py::arg("code") = std::string(to_string(d.code)), py::arg("line") = d.span.line,
                                 py::arg("column") = d.span.column, py::arg("message") = d.str()));
        }
        return out;
      },
      py::arg("text"), "Every diagnostic for a model source; empty when it is valid.");
  m.def("load_model", &dsl::load_model, py::arg("text"));
  m.def("load_model_file", &dsl::load_model_file, py::arg("path"));

  py::class_<Trace>(m, "Trace")
      .def_readonly("signals", &Trace::signals)
      .def_readonly("times", &Trace::times)
      .def("samples", &Trace::of, py::arg("signal"), py::return_value_policy::copy)
      .def_property_readonly("impulses",
                             [](const Trace& t) {
                               std::vector<py::tuple> out;
                               for (const auto& e : t.impulses) {
                                 out.push_back(py::make_tuple(e.time, e.signal, e.order, e.coefficient));
                               }
                               return out;
                             })
      .def_property_readonly("warnings",
                             [](const Trace& t) {
                               std::vector<py::tuple> out;
                               for (const auto& w : t.warnings) out.push_back(py::make_tuple(w.kind, w.time, w.message));
                               return out;
                             })
      .def(
          "to_csv",
          [](const Trace& t) {
            std::ostringstream out;
            write_trace(out, t, TraceFormat::Csv);
            return out.str();
          })
      .def("plot_data", &plot_data);

  m.def(
      "simulate",
      [](const Model& model, const std::string& top, const std::string& mode, double step, double end, double zc_tol,
         double min_step, const std::vector<std::string>& watch, unsigned max_order) {
        SimConfig c;
        const auto parsed = parse_mode(mode);
        if (!parsed) throw CbdError(ErrorCode::InvalidConfig, "mode must be symbolic or numerical");
        c.mode = *parsed;
        c.step = step;
        c.end = end;
        c.zc_tol = zc_tol;
        c.min_step = min_step;
        c.watch = watch;
        c.max_order = max_order;
        py::gil_scoped_release release;
        return simulate(model, top, c);
      },
      py::arg("model"), py::arg("top"), py::arg("mode") = "symbolic", py::arg("step") = 1e-3, py::arg("end") = 1.0,
      py::arg("zc_tol") = 1e-9, py::arg("min_step") = 1e-12, py::arg("watch") = std::vector<std::string>{},
      py::arg("max_order") = 16);

  m.def(
      "compare",
      [](const Trace& a, const Trace& b, double rel_tol) { return report_dict(compare_traces(a, b, rel_tol)); },
      py::arg("a"), py::arg("b"), py::arg("rel_tol") = 1e-12);

  m.def(
      "finite_difference_table",
      [](unsigned n, double h) { return finite_difference_table(n, h).rows; }, py::arg("n"), py::arg("h"),
      "Rows for offsets -1..n, columns for orders 0..n.");
  m.def(
      "max_magnitude",
      [](unsigned n, double h, double amplitude) {
        const auto e = max_magnitude(n, h, amplitude);
        return py::make_tuple(e.value, e.overflow_risk);
      },
      py::arg("n"), py::arg("h"), py::arg("amplitude") = 1.0);
  m.def("printed_max_magnitude", &printed_max_magnitude, py::arg("n"), py::arg("h"), py::arg("amplitude") = 1.0);

  m.def(
      "analytic_bouncing_ball",
      [](double y0, double v0, double g, double restitution, double t) {
        const auto s = analytic_bouncing_ball(y0, v0, g, restitution, t);
        return py::dict(py::arg("y") = s.y, py::arg("v") = s.v, py::arg("bounces") = s.bounces);
      },
      py::arg("y0"), py::arg("v0"), py::arg("g"), py::arg("restitution") = 1.0, py::arg("t") = 0.0);
}
