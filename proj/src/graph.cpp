#include "diraccbd/graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>

#include "diraccbd/error.hpp"

namespace diraccbd {

std::optional<std::size_t> FlatGraph::find_signal(const std::string& name) const {
  if (auto it = aliases.find(name); it != aliases.end()) return it->second;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].path == name) return i;
  }
  return std::nullopt;
}

namespace {

using Kind = ResolvedEndpoint::Kind;

struct ResolvedLink {
  ResolvedEndpoint from;
  ResolvedEndpoint to;
};

struct Frame {
  const Definition* def = nullptr;
  std::string path;  ///< empty for the top definition
  std::optional<std::size_t> parent;
  std::size_t index_in_parent = 0;
  std::vector<ResolvedLink> links;
  std::map<std::size_t, std::size_t> primitive;  ///< def block index -> flat block index
  std::map<std::size_t, std::size_t> child;      ///< def block index -> frame index
};

bool same_target(const ResolvedEndpoint& a, const ResolvedEndpoint& b) {
  if (a.kind != b.kind || a.port != b.port) return false;
  return a.kind == Kind::DefinitionOutput || a.kind == Kind::DefinitionInput || a.block == b.block;
}

class Flattener {
 public:
  Flattener(const Model& model, FlatGraph& out) : model_(model), out_(out) {}

  void run(const std::string& top) {
    check_references(model_, top);
    instantiate(*model_.find(top), "", std::nullopt, 0);
    for (std::size_t f = 0; f < frames_.size(); ++f) {
      const Frame& frame = frames_[f];
      for (const auto& [def_index, flat_index] : frame.primitive) {
        const auto ports = out_.blocks[flat_index].spec.input_ports();
        auto& inputs = out_.blocks[flat_index].inputs;
        for (const auto& port : ports) {
          inputs.push_back(resolve_input(f, {Kind::BlockInput, def_index, port}, 0));
        }
      }
      for (const auto& port : frame.def->outputs) {
        const auto signal = resolve_input(f, {Kind::DefinitionOutput, 0, port}, 0);
        if (frame.parent) {
          out_.aliases[frame.path + "." + port] = signal;
        } else {
          out_.aliases[port] = signal;
          out_.top_outputs.push_back(port);
        }
      }
    }
  }

 private:
  std::size_t instantiate(const Definition& def, const std::string& path, std::optional<std::size_t> parent,
                          std::size_t index_in_parent) {
    const std::size_t f = frames_.size();
    frames_.push_back(Frame{&def, path, parent, index_in_parent, {}, {}, {}});
    std::vector<ResolvedLink> links;
    for (const auto& link : def.links) {
      links.push_back({resolve_endpoint(model_, def, link.from, true), resolve_endpoint(model_, def, link.to, false)});
    }
    frames_[f].links = std::move(links);
    for (std::size_t b = 0; b < def.blocks.size(); ++b) {
      const auto& block = def.blocks[b];
      const std::string block_path = path.empty() ? block.name : path + "/" + block.name;
      if (auto kind = parse_block_kind(block.kind)) {
        BlockSpec spec;
        try {
          spec = primitive_spec(block, *kind);
        } catch (const CbdError& e) {
          throw e.at_block(block_path);
        }
        frames_[f].primitive[b] = out_.blocks.size();
        out_.blocks.push_back({block_path, spec, {}});
      } else {
        const std::size_t child = instantiate(*model_.find(block.kind), block_path, f, b);
        frames_[f].child[b] = child;
      }
    }
    return f;
  }

  std::size_t resolve_input(std::size_t f, const ResolvedEndpoint& target, int depth) {
    if (depth > 4096) {
      throw CbdError(ErrorCode::UnconnectedInput, "port chain does not end at a block", frames_[f].path);
    }
    const Frame& frame = frames_[f];
    const ResolvedLink* driver = nullptr;
    for (const auto& link : frame.links) {
      if (!same_target(link.to, target)) continue;
      if (driver) {
        throw CbdError(ErrorCode::MultipleDrivers, describe(frame, target) + " has more than one incoming link");
      }
      driver = &link;
    }
    if (!driver) throw CbdError(ErrorCode::UnconnectedInput, describe(frame, target) + " has no incoming link");
    return resolve_source(f, driver->from, depth + 1);
  }

  std::size_t resolve_source(std::size_t f, const ResolvedEndpoint& source, int depth) {
    const Frame& frame = frames_[f];
    if (source.kind == Kind::BlockOutput) {
      if (auto it = frame.primitive.find(source.block); it != frame.primitive.end()) return it->second;
      return resolve_input(frame.child.at(source.block), {Kind::DefinitionOutput, 0, source.port}, depth);
    }
    if (!frame.parent) {
      throw CbdError(ErrorCode::UnconnectedInput,
                     "input port '" + source.port + "' of top definition '" + frame.def->name + "' has no driver");
    }
    return resolve_input(*frame.parent, {Kind::BlockInput, frame.index_in_parent, source.port}, depth);
  }

  static std::string describe(const Frame& frame, const ResolvedEndpoint& target) {
    const std::string where = frame.path.empty() ? frame.def->name : frame.path;
    if (target.kind == Kind::DefinitionOutput) return "output port '" + target.port + "' of '" + where + "'";
    return "input '" + frame.def->blocks[target.block].name + "." + target.port + "' in '" + where + "'";
  }

  const Model& model_;
  FlatGraph& out_;
  std::vector<Frame> frames_;
};

}  // namespace

FlatGraph flatten(const Model& model, const std::string& top) {
  FlatGraph flat;
  Flattener(model, flat).run(top);
  flat.schedule = dependency_sort(flat);
  return flat;
}

std::vector<std::vector<std::size_t>> current_step_dependencies(const FlatGraph& flat) {
  std::vector<std::vector<std::size_t>> deps(flat.blocks.size());
  for (std::size_t b = 0; b < flat.blocks.size(); ++b) {
    if (flat.blocks[b].spec.consumes_previous_step()) continue;
    deps[b] = flat.blocks[b].inputs;
    std::sort(deps[b].begin(), deps[b].end());
    deps[b].erase(std::unique(deps[b].begin(), deps[b].end()), deps[b].end());
  }
  return deps;
}

Schedule dependency_sort(const FlatGraph& flat) {
  const std::size_t n = flat.blocks.size();
  const auto deps = current_step_dependencies(flat);

  // Tarjan's algorithm, iterative.
  std::vector<int> index(n, -1), low(n, 0), component(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  int counter = 0, components = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<std::pair<std::size_t, std::size_t>> work{{root, 0}};
    while (!work.empty()) {
      auto& [v, next] = work.back();
      if (next == 0) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
      }
      if (next < deps[v].size()) {
        const std::size_t w = deps[v][next++];
        if (index[w] == -1) {
          work.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          component[w] = components;
        } while (w != v);
        ++components;
      }
      const std::size_t done = v;
      work.pop_back();
      if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[done]);
    }
  }

  std::vector<ScheduleGroup> groups(static_cast<std::size_t>(components));
  for (std::size_t b = 0; b < n; ++b) groups[static_cast<std::size_t>(component[b])].blocks.push_back(b);

  // Kahn over the condensation; ready groups are taken lowest-first-block first.
  std::vector<std::vector<std::size_t>> successors(groups.size());
  std::vector<std::size_t> pending(groups.size(), 0);
  for (std::size_t b = 0; b < n; ++b) {
    const auto cb = static_cast<std::size_t>(component[b]);
    for (std::size_t d : deps[b]) {
      const auto cd = static_cast<std::size_t>(component[d]);
      if (cd == cb) {
        groups[cb].algebraic_loop = true;
        continue;
      }
      successors[cd].push_back(cb);
      ++pending[cb];
    }
  }
  using Entry = std::pair<std::size_t, std::size_t>;  // (first block, group)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> ready;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (pending[g] == 0) ready.emplace(groups[g].blocks.front(), g);
  }
  Schedule schedule;
  while (!ready.empty()) {
    const std::size_t g = ready.top().second;
    ready.pop();
    schedule.push_back(groups[g]);
    for (std::size_t s : successors[g]) {
      if (--pending[s] == 0) ready.emplace(groups[s].blocks.front(), s);
    }
  }
  return schedule;
}

std::vector<double> solve_linear_loop(const FlatGraph& flat, const ScheduleGroup& group,
                                      std::span<const double> values) {
  const std::size_t n = group.blocks.size();
  std::map<std::size_t, std::size_t> unknown;
  for (std::size_t i = 0; i < n; ++i) unknown[group.blocks[i]] = i;

  // Augmented matrix [A | rhs].
  std::vector<std::vector<double>> m(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t row = 0; row < n; ++row) {
    const FlatBlock& block = flat.blocks[group.blocks[row]];
    auto& eq = m[row];
    eq[row] = 1.0;
    switch (block.spec.kind) {
      case BlockKind::Adder:
        for (std::size_t in : block.inputs) {
          if (auto it = unknown.find(in); it != unknown.end()) {
            eq[it->second] -= 1.0;
          } else {
            eq[n] += values[in];
          }
        }
        break;
      case BlockKind::Negator: {
        const std::size_t in = block.inputs[0];
        if (auto it = unknown.find(in); it != unknown.end()) {
          eq[it->second] += 1.0;
        } else {
          eq[n] = -values[in];
        }
        break;
      }
      case BlockKind::Multiplier: {
        double gain = 1.0;
        std::optional<std::size_t> looped;
        for (std::size_t in : block.inputs) {
          if (auto it = unknown.find(in); it != unknown.end()) {
            if (looped) {
              throw CbdError(ErrorCode::NonlinearLoop, "multiplier with two inputs inside the loop", block.path);
            }
            looped = it->second;
          } else {
            gain *= values[in];
          }
        }
        if (looped) {
          eq[*looped] -= gain;
        } else {
          eq[n] = gain;
        }
        break;
      }
      default:
        throw CbdError(ErrorCode::NonlinearLoop,
                       std::string(to_string(block.spec.kind)) + " cannot be part of an algebraic loop", block.path);
    }
  }

  // Gauss-Jordan elimination with partial pivoting.
  double determinant = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    if (pivot != col) {
      std::swap(m[pivot], m[col]);
      determinant = -determinant;
    }
    determinant *= m[col][col];
    if (m[col][col] == 0.0) break;
    const double inv = 1.0 / m[col][col];
    for (std::size_t c = col; c <= n; ++c) m[col][c] *= inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || m[r][col] == 0.0) continue;
      const double factor = m[r][col];
      for (std::size_t c = col; c <= n; ++c) m[r][c] -= factor * m[col][c];
    }
  }
  if (std::abs(determinant) < 1e-12) {
    throw CbdError(ErrorCode::SingularLoop, "algebraic loop has no unique solution (determinant " +
                                                std::to_string(determinant) + ")",
                   flat.blocks[group.blocks.front()].path);
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = m[i][n];
  return out;
}

}  // namespace diraccbd
