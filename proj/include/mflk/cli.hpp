#pragma once

namespace mflk {

// Exit codes: 0 every verdict passed, 1 some verdict failed, 2 bad arguments
// or configuration.
int cli_main(int argc, char** argv);

}  // namespace mflk
