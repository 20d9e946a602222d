#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "diraccbd/engine.hpp"

namespace diraccbd {

enum class TraceFormat { Csv, Json };

/// `time,signal,left,right`, one row per step and watched signal, 17 significant digits.
void write_trace(std::ostream& out, const Trace& trace, TraceFormat format);
/// `time,signal,order,coefficient`.
void write_impulses(std::ostream& out, const std::vector<ImpulseEvent>& events, TraceFormat format);

/// Format detected from the first non-blank character. Impulse vectors in the
/// returned trace stay empty; attach them with `attach_impulses`.
/// Errors: IoError, InvalidArgument for malformed content.
Trace read_trace(std::istream& in);
std::vector<ImpulseEvent> read_impulses(std::istream& in);
Trace read_trace_file(const std::string& path);
std::vector<ImpulseEvent> read_impulses_file(const std::string& path);

/// Puts logged events back into the samples they came from.
/// Errors: InvalidArgument when an event names an unknown signal or time.
void attach_impulses(Trace& trace, const std::vector<ImpulseEvent>& events);

/// Per signal: polylines split at every left != right step, plus impulse arrows.
/// Output: {"signals": [{"name", "segments": [[[t, v], ...], ...], "arrows": [{"t", "order", "coefficient"}]}]}
std::string plot_data(const Trace& trace);

std::string format_double(double v);

}  // namespace diraccbd
