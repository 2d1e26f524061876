#pragma once

namespace homfrac::cli {

/// Entry point for the homfrac tool. Exit codes: 0 success, 1 criterion
/// failure in `report`, 2 configuration error.
int run(int argc, char** argv);

}  // namespace homfrac::cli
