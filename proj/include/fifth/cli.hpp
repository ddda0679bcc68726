#pragma once

// The `fifth` command line: solve, optimize, train, measure, check.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fifth {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitUnsatisfiable = 2,
    kExitIncomplete = 3,
    kExitGuidanceMismatch = 4,
};

/// Runs one command. `args` excludes the program name. Reports go to `out`
/// (or the --out file), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Corpus root: $FIFTH_CORPUS when set, else ./corpus.
std::filesystem::path corpus_root();

/// Every `.5th` file below `dir`, sorted by path.
std::vector<std::filesystem::path> program_files(const std::filesystem::path& dir);

}  // namespace fifth
