#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "f4ms/graph.hpp"
#include "f4ms/tree.hpp"

namespace f4ms {

// One implementation kind per component; must cover the whole model and
// respect each component's allowed kinds.
struct Mapping {
  std::map<std::string, Kind> assignment;
  auto operator<=>(const Mapping&) const = default;
};

Mapping all_software(const SystemModel& model);            // sw where allowed, else hw
Mapping all_hardware_where_allowed(const SystemModel& model);

struct SimConfig {
  std::uint64_t seed = 0;
  int step_limit = 10000;  // bound for cyclic graphs
  Mapping mapping;
};

enum class EventKind {
  ComponentStart,
  ComponentEnd,
  TokenMove,
  MessageTransfer,
  ChoiceTaken,
  SyncComplete,
};

std::string to_string(EventKind k);
std::optional<EventKind> event_kind_from_string(std::string_view s);

// subject is a component id for Start/End, the originating component for
// MessageTransfer, and a connector id for the routing kinds.
struct Event {
  micros_t time = 0;
  EventKind kind = EventKind::ComponentStart;
  std::string subject;
  tree::Value detail;  // canonical object, rendered inline in `lines` format
};

// Message left at an output port that no edge drains, kept when the owning
// component is final.
struct TerminalOutput {
  std::string component;
  std::string port;
  DataTag tag;
  Bytes payload;
  micros_t time = 0;
};

struct Trace {
  std::vector<Event> events;  // sorted by time, emission order as tiebreak
  std::map<std::string, int> final_state;  // tokens still held per component
  std::vector<TerminalOutput> outputs;
  micros_t sim_time = 0;  // max event time
};

struct EngineError : std::runtime_error {
  enum class Code {
    GuardNoMatch,
    StepLimitExceeded,
    MissingInput,
    KindNotAllowed,
    UnknownPort,
    InvalidInput,
  };
  Code code;
  std::string subject;
  EngineError(Code c, std::string subj, const std::string& msg)
      : std::runtime_error(msg), code(c), subject(std::move(subj)) {}
};

std::string to_string(EngineError::Code c);

using InitialInputs = std::map<std::pair<std::string, std::string>, Message>;

// Deterministic discrete-event executor. Semantics:
//   - one token at the initial component at t = 0; initial inputs arrive at 0
//   - a component is eligible when it holds a token and every input its
//     behavior currently needs holds a message; ready time is the max of the
//     consumed token's arrival, those messages' arrivals, and the
//     component's previous end (no self-overlap)
//   - each step fires the eligible component with minimal (ready, id)
//   - firing consumes the earliest token, the needed messages, and any
//     present optional messages that already arrived; the behavior then runs
//     with a per-firing seeded rng
//   - completion at start + cost time of the mapped kind; outputs transfer
//     along every matching edge at completion with zero delay
//   - fan-in: a port keeps the message latest by (arrival, sender); the
//     displaced transfer is noted on the event detail
//   - token routing per connector: seq/par move tokens, xor matches the
//     payload emitted on the guard port against branch labels (falling back
//     to the default target), sync collects one token per source before
//     releasing its target
class Engine {
 public:
  Engine(const SystemModel& model, const BehaviorRegistry& registry,
         SimConfig config, InitialInputs inputs);

  // Fires one component; false when quiescent. Errors throw EngineError.
  bool step();
  bool quiescent() const;
  int steps_taken() const { return steps_; }

  // Sorts events, snapshots token counts and terminal outputs. The engine
  // may not be stepped afterwards.
  Trace finish();

 private:
  struct PendingMessage {
    Message message;
    micros_t arrival = 0;
    std::string sender;  // empty for initial inputs
  };
  struct ComponentState {
    std::vector<micros_t> tokens;  // arrival times, kept sorted
    std::map<std::string, PendingMessage> inbox;
    Bytes state;
    std::uint64_t firings = 0;
    micros_t last_end = 0;
  };

  const SystemModel& model_;
  const BehaviorRegistry& registry_;
  SimConfig config_;
  std::map<std::string, ComponentState> comps_;
  // connector -> source -> queued token arrival times (sorted)
  std::map<std::string, std::map<std::string, std::vector<micros_t>>> sync_arms_;
  std::vector<Event> events_;
  std::map<std::pair<std::string, std::string>, TerminalOutput> terminals_;
  int steps_ = 0;
  bool finished_ = false;

  std::optional<std::pair<micros_t, std::string>> next_firing() const;
  micros_t ready_time(const std::string& id, const ComponentState& cs) const;
  void deliver(const std::string& sender, const std::string& from_port,
               const std::string& to_comp, const std::string& to_port,
               const DataTag& tag, const Bytes& payload, micros_t time);
  void route_tokens(const std::string& id,
                    const std::map<std::string, Bytes>& outputs, micros_t time);
};

Trace run(const SystemModel& model, const BehaviorRegistry& registry,
          const SimConfig& config, const InitialInputs& inputs = {});

enum class TraceFormat { Lines, Structured };

// `lines`: `<time.6>\t<kind>\t<subject>\t<inline detail>` per event, one
// trailing newline each; empty trace renders empty. `structured`: canonical
// tree with sim_time/events/final_state/outputs, payloads hex-encoded.
std::string trace_export(const Trace& trace, TraceFormat format);

// Re-reads a structured export; diagnostics on malformed input.
struct TraceParseOutcome {
  std::optional<Trace> trace;
  std::vector<tree::Diagnostic> diagnostics;
};
TraceParseOutcome trace_import(std::string_view text, std::string_view file_name);

}  // namespace f4ms
