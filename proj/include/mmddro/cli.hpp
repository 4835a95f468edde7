#pragma once
// Command-line entry point. Subcommands: mmd, adversary, bound, fit,
// experiment. Returns 0 on success, 1 on usage or input errors, 2 on
// numerical failures inside the solvers.

namespace mmddro {

int cli_main(int argc, const char* const* argv);

}  // namespace mmddro
