#pragma once

#include <iosfwd>
#include <string>

#include "ddsdp/outer.hpp"

namespace ddsdp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitBudget = 2;
inline constexpr int kExitInput = 3;
inline constexpr int kExitNumerical = 4;

inline constexpr const char* kTraceHeader = "phase,kind,inner_iter,cost,lambda0,tau,t_lo,t_hi,gap,millis";

/// Entry point of the `ddsdp` tool: subcommands solve, generate and check.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// One CSV row of the trace (no newline).
std::string trace_row(const TraceRecord& record);

}  // namespace ddsdp::cli
