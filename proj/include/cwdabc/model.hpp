#pragma once

#include <string>

#include "cwdabc/errors.hpp"

namespace cwdabc {

/// The five latent transmission processes.
enum class ProcessKind {
  DirectOde,
  DirectCtmc,
  DirectSde,
  IndirectOde,
  IndirectSde,
};

/// The two observation-error layers on cumulative deaths.
enum class DataKind { Binomial, Poisson };

inline bool is_indirect(ProcessKind k) {
  return k == ProcessKind::IndirectOde || k == ProcessKind::IndirectSde;
}

inline bool is_deterministic(ProcessKind k) {
  return k == ProcessKind::DirectOde || k == ProcessKind::IndirectOde;
}

/// 3 for (S, I, C), 4 for (S, I, E, C).
inline int state_dim(ProcessKind k) { return is_indirect(k) ? 4 : 3; }

struct ModelSpec {
  ProcessKind process = ProcessKind::DirectOde;
  DataKind data = DataKind::Binomial;
  int index = 0;  // 1-based position in the run's model menu

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

inline std::string process_name(ProcessKind k) {
  switch (k) {
    case ProcessKind::DirectOde: return "direct-ode";
    case ProcessKind::DirectCtmc: return "direct-ctmc";
    case ProcessKind::DirectSde: return "direct-sde";
    case ProcessKind::IndirectOde: return "indirect-ode";
    case ProcessKind::IndirectSde: return "indirect-sde";
  }
  return "?";
}

inline std::string data_name(DataKind k) {
  return k == DataKind::Binomial ? "binom" : "pois";
}

inline std::string model_name(const ModelSpec& m) {
  return process_name(m.process) + "-" + data_name(m.data);
}

/// Parses names like "indirect-sde-binom". Throws ValidationError on junk.
inline ModelSpec parse_model_name(const std::string& name) {
  const auto cut = name.rfind('-');
  if (cut == std::string::npos)
    throw ValidationError("bad model name: " + name);
  const std::string proc = name.substr(0, cut);
  const std::string data = name.substr(cut + 1);
  ModelSpec m;
  if (proc == "direct-ode") m.process = ProcessKind::DirectOde;
  else if (proc == "direct-ctmc") m.process = ProcessKind::DirectCtmc;
  else if (proc == "direct-sde") m.process = ProcessKind::DirectSde;
  else if (proc == "indirect-ode") m.process = ProcessKind::IndirectOde;
  else if (proc == "indirect-sde") m.process = ProcessKind::IndirectSde;
  else throw ValidationError("unknown process model: " + proc);
  if (data == "binom") m.data = DataKind::Binomial;
  else if (data == "pois") m.data = DataKind::Poisson;
  else throw ValidationError("unknown data model: " + data);
  return m;
}

}  // namespace cwdabc
