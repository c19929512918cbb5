#pragma once

namespace cpsdiag {

// Selects the serial reference kernel or its OpenMP counterpart. Both produce
// identical results.
enum class Execution { serial, parallel };

}  // namespace cpsdiag
