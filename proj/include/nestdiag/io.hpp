#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "nestdiag/run.hpp"

namespace nestdiag {

inline constexpr int kNativeFormatVersion = 1;

/// Native text format:
///
///   # nestdiag-run v1
///   dim <d>
///   points <n>
///   meta <key> <value>          (zero or more)
///   <params...> <loglike> <birth> <nlive> <thread>
///
/// Doubles use the shortest decimal form that reads back to the same value,
/// so read_native(write_native(run)) == run exactly. Throws for an empty run
/// or meta entries that would not survive the line format.
std::string write_native(const NSRun& run);

/// Throws ParseError (with the line number) on malformed input, a version
/// other than kNativeFormatVersion, or a run failing validate_run.
NSRun read_native(std::string_view text);

/// Whitespace-separated columns theta_1 ... theta_d loglike birth, one dead
/// point per line. Blank lines and lines starting with '#' are skipped.
///
/// Births at or below the sentinel become -inf. Without a sentinel, the
/// smallest birth in the file is used when it lies strictly below every
/// loglike; otherwise no birth is treated as a prior draw. Ragged rows, ties,
/// birth >= loglike and broken birth chains are reported with line numbers.
NSRun parse_dead_birth(std::string_view text, std::optional<double> prior_birth_sentinel = std::nullopt);

/// Prior-born points are written with this birth value.
inline constexpr double kDeadBirthPriorValue = -1e30;

/// Inverse of parse_dead_birth. Throws if some loglike is not above
/// kDeadBirthPriorValue.
std::string write_dead_birth(const NSRun& run);

enum class InputFormat { automatic, native, dead_birth };

InputFormat parse_input_format(std::string_view name);

/// Native when the text starts with the native header, dead-birth otherwise.
InputFormat detect_format(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);

/// Writes to "<path>.tmp" and renames over path.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Reads a run file; ParseErrors are re-thrown prefixed with the path.
NSRun read_run_file(const std::filesystem::path& path, InputFormat format = InputFormat::automatic,
                    std::optional<double> prior_birth_sentinel = std::nullopt);

}  // namespace nestdiag
