#pragma once

// Exit codes: 0 success, 1 usage error, 2 runtime error.
int run_cli(int argc, char** argv);
