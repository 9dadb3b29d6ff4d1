#pragma once

namespace sensegen {

// Full command-line surface (train-gen, train-disc, alternate, generate,
// evaluate, synth-data). Returns the process exit code:
//   0 success, 2 config/validation, 3 data/parse, 4 checkpoint format.
int run_cli(int argc, const char* const* argv);

}  // namespace sensegen
